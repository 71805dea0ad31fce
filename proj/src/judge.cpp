#include "umm/judge.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

#include <fmt/format.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace umm {

void to_json(json& j, const JudgeVerdict& v) {
  j = json{{"sc", v.sc}, {"pq", v.pq}, {"rationale", v.rationale}, {"raw", v.raw}};
}

void from_json(const json& j, JudgeVerdict& v) {
  j.at("sc").get_to(v.sc);
  j.at("pq").get_to(v.pq);
  v.rationale = j.value("rationale", "");
  v.raw = j.value("raw", "");
}

// ---- templates ----

namespace {

const std::vector<JudgeTemplate>& templates() {
  static const std::vector<JudgeTemplate> kTemplates = {
      {"viescore-edit/v1", "edit",
       "You are a professional digital artist evaluating an AI image edit.\n"
       "Two images are given: the original first, the edited result second.\n"
       "Editing instruction: {instruction}\n"
       "\n"
       "Rate each criterion from 0 to 10.\n"
       "SC (semantic correctness): how well the edit follows the instruction without over-editing.\n"
       "PQ (perceptual quality): how natural the edited image looks and how free it is of artifacts.\n"
       "\n"
       "Reply with exactly these two lines, then an optional one-sentence rationale:\n"
       "SC: <score>\n"
       "PQ: <score>\n"},
      {"rephrase/v1", "rephrase",
       "Rewrite the question below {n} times. Every rewrite must keep the meaning and the answer\n"
       "unchanged and must not repeat the original wording verbatim.\n"
       "Return a JSON array of {n} strings and nothing else.\n"
       "\n"
       "Question: {question}\n"},
      {"embed/v1", "embed", "Represent the text for semantic similarity search.\n"},
  };
  return kTemplates;
}

}  // namespace

const JudgeTemplate& find_template(std::string_view id) {
  for (const auto& t : templates()) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::ConfigError, "unknown judge template '" + std::string(id) + "'");
}

std::vector<std::string> template_ids() {
  std::vector<std::string> out;
  for (const auto& t : templates()) out.push_back(t.id);
  return out;
}

std::string render_template(const JudgeTemplate& t, const std::map<std::string, std::string>& vars) {
  std::string out = t.text;
  for (const auto& [k, v] : vars) {
    const std::string needle = "{" + k + "}";
    for (std::size_t pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + v.size())) {
      out.replace(pos, needle.size(), v);
    }
  }
  return out;
}

// ---- verdict parsing ----

JudgeVerdict parse_verdict(const std::string& raw) {
  static const std::regex kLine(R"(^\s*(SC|PQ)\s*:\s*([-+]?[0-9]+(?:\.[0-9]+)?)\s*$)");
  std::optional<double> sc;
  std::optional<double> pq;
  std::string rationale;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string::npos) end = raw.size();
    std::string line = raw.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, kLine)) {
      auto& slot = m[1] == "SC" ? sc : pq;
      if (slot) throw JudgeParseError("duplicate " + m[1].str() + " line", raw);
      slot = std::stod(m[2].str());
    } else if (!trim(line).empty()) {
      rationale += (rationale.empty() ? "" : "\n") + trim(line);
    }
    start = end + 1;
  }
  if (!sc || !pq) throw JudgeParseError("reply lacks SC/PQ lines", raw);
  if (*sc < 0 || *sc > 10 || *pq < 0 || *pq > 10) throw JudgeParseError("score outside [0, 10]", raw);
  return JudgeVerdict{*sc, *pq, rationale, raw};
}

// ---- transports ----

namespace {

class HttpTransport final : public JudgeTransport {
 public:
  explicit HttpTransport(const std::string& endpoint) {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(endpoint, m, kUrl)) {
      throw Error(ErrorCode::ConfigError, "judge endpoint is not an http(s) URL: " + endpoint);
    }
    base_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
  }

  std::string send(const json& request) override {
    httplib::Client cli(base_);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    auto res = cli.Post(path_, request.dump(), "application/json");
    if (!res) throw TransportError("judge request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
      throw TransportError(fmt::format("judge returned HTTP {}", res->status));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::JudgeUnavailable, fmt::format("judge returned HTTP {}: {}", res->status, res->body));
    }
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("text") || !body.at("text").is_string()) {
      throw JudgeParseError("judge reply is not {\"text\": ...}", res->body);
    }
    return body.at("text").get<std::string>();
  }

 private:
  std::string base_;
  std::string path_;
};

std::vector<std::string> scripted_paraphrases(const std::string& question, int n) {
  static const std::vector<std::string> kForms = {
      "Could you answer this: {q}",
      "Here is a question for you. {q}",
      "{q} Please answer carefully.",
  };
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    std::string form = i < static_cast<int>(kForms.size()) ? kForms[i] : fmt::format("Variant {}: {{q}}", i + 1);
    out.push_back(render_template(JudgeTemplate{"", "", form}, {{"q", question}}));
  }
  return out;
}

constexpr std::size_t kHashEmbedDim = 64;

std::vector<double> hash_embed(const std::string& text) {
  std::vector<double> v(kHashEmbedDim, 0.0);
  const std::string s = to_lower(text);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      const auto bucket = fnv1a64(std::to_string(n) + "#" + s.substr(i, n)) % kHashEmbedDim;
      v[bucket] += static_cast<double>(n);
    }
  }
  return v;
}

double hash_score(std::uint64_t h) { return static_cast<double>(h % 10001) / 1000.0; }

class MockTransport final : public JudgeTransport {
 public:
  bool local() const override { return true; }

  explicit MockTransport(const std::string& spec) {
    const std::string body = spec.substr(5);  // strip "mock:"
    const auto colon = body.find(':');
    name_ = body.substr(0, colon);
    if (name_ == "table") {
      if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "mock:table needs a path");
      const fs::path path = body.substr(colon + 1);
      if (!fs::exists(path)) throw Error(ErrorCode::ConfigError, "judge table not found: " + path.string());
      table_ = json::parse(read_file(path));
      if (!table_.is_object()) throw Error(ErrorCode::ConfigError, "judge table must be a JSON object");
    } else if (name_ != "hash" && name_ != "rephrase" && name_ != "hash-embed") {
      throw Error(ErrorCode::ConfigError, "unknown mock judge '" + name_ + "'");
    }
  }

  std::string send(const json& request) override {
    const std::string kind = request.at("kind");
    if (kind == "edit") return edit(request);
    if (kind == "rephrase") {
      return json(scripted_paraphrases(request.at("question"), request.at("n"))).dump();
    }
    if (kind == "embed") {
      json out = json::array();
      for (const auto& t : request.at("texts")) out.push_back(hash_embed(t.get<std::string>()));
      return out.dump();
    }
    throw Error(ErrorCode::InvalidRequest, "unknown judge request kind '" + kind + "'");
  }

 private:
  std::string edit(const json& request) const {
    if (name_ == "table") {
      const std::string id = request.value("sample_id", "");
      if (!table_.contains(id)) throw Error(ErrorCode::JudgeUnavailable, "mock table has no entry for '" + id + "'");
      const json& e = table_.at(id);
      if (e.is_string()) return e.get<std::string>();
      return fmt::format("SC: {}\nPQ: {}\n", e.at("sc").get<double>(), e.at("pq").get<double>());
    }
    FieldHasher h;
    for (const auto& img : request.at("images")) h.add(img.at("data").get<std::string>());
    h.add(request.at("instruction").get<std::string>());
    const std::string hex = h.hex();
    const auto a = std::stoull(hex.substr(0, 15), nullptr, 16);
    const auto b = std::stoull(hex.substr(15, 15), nullptr, 16);
    return fmt::format("SC: {:.3f}\nPQ: {:.3f}\nhash mock verdict\n", hash_score(a), hash_score(b));
  }

  std::string name_;
  json table_;
};

bool decodable(const Image& img) {
  const std::string& b = img.bytes;
  auto starts = [&](std::string_view magic) { return b.compare(0, magic.size(), magic) == 0; };
  return b.size() > 4 && (starts("\x89PNG") || starts("\xFF\xD8") || starts("P6") || starts("P3") ||
                          starts("GIF8") || starts("BM") || starts("RIFF"));
}

std::vector<double> normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::ParseFailure, "embedder returned a zero vector");
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

std::shared_ptr<JudgeTransport> make_http_transport(const std::string& endpoint) {
  return std::make_shared<HttpTransport>(endpoint);
}

std::shared_ptr<JudgeTransport> make_mock_transport(const std::string& spec) {
  return std::make_shared<MockTransport>(spec);
}

std::shared_ptr<JudgeTransport> make_transport(const std::string& endpoint) {
  if (endpoint.rfind("mock:", 0) == 0) return make_mock_transport(endpoint);
  return make_http_transport(endpoint);
}

// ---- rate limiting ----

JudgeClock JudgeClock::system() {
  return JudgeClock{
      [] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
      },
      [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); }};
}

RateLimiter::RateLimiter(double rate, JudgeClock clock) : clock_(std::move(clock)) {
  if (!(rate > 0)) throw Error(ErrorCode::ConfigError, "rate_limit must be > 0");
  capacity_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(rate)));
  window_ = std::max(1.0, static_cast<double>(capacity_) / rate);
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  for (;;) {
    const double now = clock_.now();
    while (!stamps_.empty() && stamps_.front() <= now - window_) stamps_.pop_front();
    if (stamps_.size() < capacity_) {
      stamps_.push_back(now);
      return;
    }
    clock_.sleep(stamps_.front() + window_ - now);
  }
}

// ---- client ----

JudgeClient::JudgeClient(JudgeConfig cfg, std::shared_ptr<JudgeTransport> transport, JudgeClock clock)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport) : make_transport(cfg_.endpoint)),
      clock_(clock),
      limiter_(cfg_.rate_limit, clock) {
  if (cfg_.max_retries < 0) throw Error(ErrorCode::ConfigError, "max_retries must be >= 0");
  find_template(cfg_.template_id);
  if (!cfg_.cache_dir.empty()) {
    cache_dir_ = cfg_.cache_dir;
  } else if (const char* env = std::getenv(kCacheDirEnv); env && *env) {
    cache_dir_ = fs::path(env) / "judge";
  }
}

std::string JudgeClient::edit_cache_key(const Image& src, const Image& edited, const std::string& instruction,
                                        const std::string& template_id, const std::string& model_name) {
  FieldHasher h;
  h.add("edit");
  h.add(src.bytes);
  h.add(edited.bytes);
  h.add(instruction);
  h.add(template_id);
  h.add(model_name);
  return h.hex();
}

std::optional<json> JudgeClient::cache_get(const std::string& key) {
  std::lock_guard lock(mu_);
  ++stats_.requests;
  if (auto it = memory_.find(key); it != memory_.end()) {
    ++stats_.cache_hits;
    return it->second;
  }
  if (!cache_dir_.empty()) {
    const fs::path p = cache_dir_ / (key + ".json");
    if (fs::exists(p)) {
      json j = json::parse(read_file(p), nullptr, false);
      if (!j.is_discarded()) {
        memory_[key] = j;
        ++stats_.cache_hits;
        return j;
      }
    }
  }
  return std::nullopt;
}

void JudgeClient::cache_put(const std::string& key, const json& value) {
  std::lock_guard lock(mu_);
  memory_[key] = value;
  if (!cache_dir_.empty()) write_file_atomic(cache_dir_ / (key + ".json"), value.dump() + "\n");
}

std::string JudgeClient::call(const json& request) {
  std::string last;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (!transport_->local()) limiter_.acquire();
    {
      std::lock_guard lock(mu_);
      ++stats_.transport_calls;
    }
    try {
      return transport_->send(request);
    } catch (const TransportError& e) {
      last = e.what();
      if (attempt < cfg_.max_retries) clock_.sleep(0.05 * (attempt + 1));
    }
  }
  throw Error(ErrorCode::JudgeUnavailable,
              fmt::format("{} failed after {} attempts: {}", cfg_.endpoint, cfg_.max_retries + 1, last));
}

JudgeVerdict JudgeClient::judge_edit(const Image& src, const Image& edited, const std::string& instruction,
                                     const std::string& sample_id) {
  if (!decodable(src) || !decodable(edited)) {
    throw Error(ErrorCode::InvalidRequest, "judge_edit needs two decodable images (" + sample_id + ")");
  }
  const std::string key = edit_cache_key(src, edited, instruction, cfg_.template_id, cfg_.model_name);
  if (auto hit = cache_get(key)) return hit->get<JudgeVerdict>();

  const auto& tmpl = find_template(cfg_.template_id);
  json req{{"kind", "edit"},
           {"model_name", cfg_.model_name},
           {"template_id", cfg_.template_id},
           {"prompt", render_template(tmpl, {{"instruction", instruction}})},
           {"instruction", instruction},
           {"sample_id", sample_id},
           {"images", json::array({json{{"mime", src.mime}, {"data", base64_encode(src.bytes)}},
                                   json{{"mime", edited.mime}, {"data", base64_encode(edited.bytes)}}})}};
  JudgeVerdict v = parse_verdict(call(req));
  cache_put(key, v);
  return v;
}

std::vector<std::string> JudgeClient::rephrase(const std::string& question, int n) {
  if (n < 1) throw Error(ErrorCode::PreconditionFailed, "rephrase needs n >= 1");
  FieldHasher h;
  h.add("rephrase");
  h.add(question);
  h.add(std::to_string(n));
  h.add(cfg_.template_id);
  h.add(cfg_.model_name);
  const std::string key = h.hex();

  std::vector<std::string> out;
  if (auto hit = cache_get(key)) {
    out = hit->get<std::vector<std::string>>();
  } else {
    const auto& tmpl = find_template(cfg_.template_id);
    json req{{"kind", "rephrase"},
             {"model_name", cfg_.model_name},
             {"template_id", cfg_.template_id},
             {"prompt", render_template(tmpl, {{"question", question}, {"n", std::to_string(n)}})},
             {"question", question},
             {"n", n}};
    const std::string raw = call(req);
    json reply = json::parse(raw, nullptr, false);
    if (reply.is_discarded() || !reply.is_array() || reply.size() != static_cast<std::size_t>(n) ||
        !std::all_of(reply.begin(), reply.end(), [](const json& x) { return x.is_string(); })) {
      throw JudgeParseError(fmt::format("expected a JSON array of {} strings", n), raw);
    }
    out = reply.get<std::vector<std::string>>();
    cache_put(key, out);
  }
  for (const auto& r : out) {
    if (r == question) throw Error(ErrorCode::DegenerateRephrase, "rephrasing repeats the question: " + question);
  }
  return out;
}

std::vector<std::vector<double>> JudgeClient::embed(const std::vector<std::string>& texts) {
  auto key_for = [&](const std::string& t) {
    FieldHasher h;
    h.add("embed");
    h.add(t);
    h.add(cfg_.template_id);
    h.add(cfg_.model_name);
    return h.hex();
  };
  std::vector<std::vector<double>> out(texts.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw Error(ErrorCode::PreconditionFailed, "embed: empty text");
    if (auto hit = cache_get(key_for(texts[i]))) out[i] = hit->get<std::vector<double>>();
    else missing.push_back(i);
  }
  if (!missing.empty()) {
    json batch = json::array();
    for (auto i : missing) batch.push_back(texts[i]);
    json req{{"kind", "embed"},
             {"model_name", cfg_.model_name},
             {"template_id", cfg_.template_id},
             {"prompt", find_template(cfg_.template_id).text},
             {"texts", batch}};
    const std::string raw = call(req);
    json reply = json::parse(raw, nullptr, false);
    if (reply.is_discarded() || !reply.is_array() || reply.size() != missing.size()) {
      throw JudgeParseError("expected one vector per text", raw);
    }
    for (std::size_t k = 0; k < missing.size(); ++k) {
      auto v = normalized(reply[k].get<std::vector<double>>());
      cache_put(key_for(texts[missing[k]]), v);
      out[missing[k]] = std::move(v);
    }
  }
  for (const auto& v : out) {
    if (v.size() != out.front().size()) throw Error(ErrorCode::ParseFailure, "embedding dimensions differ");
  }
  return out;
}

JudgeStats JudgeClient::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::PreconditionFailed, "cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0) || !(nb > 0)) throw Error(ErrorCode::PreconditionFailed, "cosine of a zero vector");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace umm
