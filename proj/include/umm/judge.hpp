#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "umm/config.hpp"
#include "umm/core.hpp"
#include "umm/error.hpp"

namespace umm {

struct JudgeVerdict {
  double sc = 0.0;
  double pq = 0.0;
  std::string rationale;
  std::string raw;

  bool operator==(const JudgeVerdict&) const = default;
};

void to_json(json& j, const JudgeVerdict& v);
void from_json(const json& j, JudgeVerdict& v);

/// Reply did not contain the mandated "SC: <x>\nPQ: <y>" lines.
class JudgeParseError : public Error {
 public:
  JudgeParseError(std::string detail, std::string raw)
      : Error(ErrorCode::ParseFailure, std::move(detail)), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Recoverable transport failure; the client retries these.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prompt template. Changing the text requires a new id.
struct JudgeTemplate {
  std::string id;
  std::string kind;  // edit | rephrase | embed
  std::string text;  // placeholders: {instruction} {question} {n}
};

const JudgeTemplate& find_template(std::string_view id);
std::vector<std::string> template_ids();
std::string render_template(const JudgeTemplate& t, const std::map<std::string, std::string>& vars);

/// One request/reply exchange with a judge endpoint.
///
/// Request fields: kind, model_name, template_id, prompt, plus
///   edit:     instruction, images [{mime, data}], sample_id
///   rephrase: question, n
///   embed:    texts
/// Reply: free text for edit, a JSON array of strings for rephrase, a JSON
/// array of number arrays for embed.
class JudgeTransport {
 public:
  virtual ~JudgeTransport() = default;
  virtual std::string send(const json& request) = 0;
  /// In-process transports skip rate limiting.
  virtual bool local() const { return false; }
};

/// POSTs the request as JSON and reads `{"text": ...}` back.
std::shared_ptr<JudgeTransport> make_http_transport(const std::string& endpoint);

/// Deterministic mocks, selected with `mock:<name>[:<arg>]`:
///   hash        pseudo-scores from an input hash; also rephrases and embeds
///   table:PATH  JSON object keyed by sample_id: {"sc","pq"} or a raw reply string
///   rephrase    scripted paraphrases
///   hash-embed  character n-gram count embedding
std::shared_ptr<JudgeTransport> make_mock_transport(const std::string& spec);

std::shared_ptr<JudgeTransport> make_transport(const std::string& endpoint);

/// Extracts SC and PQ from a reply; everything else becomes the rationale.
JudgeVerdict parse_verdict(const std::string& raw);

/// Clock hooks; tests swap in a fake timeline.
struct JudgeClock {
  std::function<double()> now;
  std::function<void(double)> sleep;
  static JudgeClock system();
};

/// Sliding window: at most max(1, floor(rate)) requests per max(1s, capacity/rate).
class RateLimiter {
 public:
  RateLimiter(double rate, JudgeClock clock);
  void acquire();

 private:
  std::size_t capacity_;
  double window_;
  JudgeClock clock_;
  std::mutex mu_;
  std::deque<double> stamps_;
};

struct JudgeStats {
  std::size_t transport_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t requests = 0;
};

class JudgeClient {
 public:
  /// `transport` defaults to the one named by cfg.endpoint. The disk cache lives
  /// in cfg.cache_dir, falling back to $UMM_CACHE_DIR/judge; without either it is
  /// in-memory only.
  explicit JudgeClient(JudgeConfig cfg, std::shared_ptr<JudgeTransport> transport = nullptr,
                       JudgeClock clock = JudgeClock::system());

  JudgeVerdict judge_edit(const Image& src, const Image& edited, const std::string& instruction,
                          const std::string& sample_id = "");
  std::vector<std::string> rephrase(const std::string& question, int n);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);

  static std::string edit_cache_key(const Image& src, const Image& edited, const std::string& instruction,
                                    const std::string& template_id, const std::string& model_name);

  JudgeStats stats() const;
  const JudgeConfig& config() const noexcept { return cfg_; }

 private:
  std::string call(const json& request);
  std::optional<json> cache_get(const std::string& key);
  void cache_put(const std::string& key, const json& value);

  JudgeConfig cfg_;
  std::shared_ptr<JudgeTransport> transport_;
  JudgeClock clock_;
  RateLimiter limiter_;
  fs::path cache_dir_;
  mutable std::mutex mu_;
  std::map<std::string, json> memory_;
  JudgeStats stats_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace umm
