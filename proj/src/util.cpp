#include "umm/util.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "umm/error.hpp"

namespace umm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::DuplicateAdapter: return "DuplicateAdapter";
    case ErrorCode::NotRegistered: return "NotRegistered";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::LoadError: return "LoadError";
    case ErrorCode::CapabilityError: return "CapabilityError";
    case ErrorCode::AdapterFailure: return "AdapterFailure";
    case ErrorCode::NotLoaded: return "NotLoaded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::PipelineAborted: return "PipelineAborted";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::DegenerateRephrase: return "DegenerateRephrase";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::Misaligned: return "Misaligned";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::UnknownBenchmark: return "UnknownBenchmark";
    case ErrorCode::MethodNotRegistered: return "MethodNotRegistered";
    case ErrorCode::NotTrainable: return "NotTrainable";
    case ErrorCode::TrainingDiverged: return "TrainingDiverged";
    case ErrorCode::NotImplemented: return "NotImplemented";
    case ErrorCode::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::NoLatentSupport: return "NoLatentSupport";
    case ErrorCode::SpanEmpty: return "SpanEmpty";
    case ErrorCode::MixedBenchmarks: return "MixedBenchmarks";
    case ErrorCode::OddQuestionCount: return "OddQuestionCount";
    case ErrorCode::ExternalScorerFailed: return "ExternalScorerFailed";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(n * 2, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr);
  return to_hex(md.data(), len);
}

FieldHasher::FieldHasher() : ctx_(EVP_MD_CTX_new()) {
  EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr);
}

FieldHasher::~FieldHasher() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

FieldHasher& FieldHasher::add(std::string_view field) {
  auto* ctx = static_cast<EVP_MD_CTX*>(ctx_);
  std::uint64_t n = field.size();
  unsigned char len[8];
  for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(n >> (8 * i));
  EVP_DigestUpdate(ctx, len, sizeof len);
  EVP_DigestUpdate(ctx, field.data(), field.size());
  return *this;
}

std::string FieldHasher::hex() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), md.data(), &len);
  return to_hex(md.data(), len);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(bytes.data()),
                          static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) throw Error(ErrorCode::ParseError, "base64 length not a multiple of 4");
  std::string out(3 * text.size() / 4, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::ParseError, "invalid base64");
  std::size_t pad = 0;
  if (text.back() == '=') ++pad;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  std::random_device rd;
  fs::path tmp = path;
  tmp += fmt::format(".tmp{:08x}", rd());
  write_file(tmp, content);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Nudge by a few ulps so that 78.805 stored as 78.80499999 still rounds up.
  const double scaled = value * scale;
  const double nudged = std::nextafter(std::nextafter(scaled, scaled + (scaled >= 0 ? 1 : -1)),
                                       scaled + (scaled >= 0 ? 1 : -1));
  return std::round(nudged) / scale;
}

std::string format_fixed(double value, int decimals) {
  double r = round_to(value, decimals);
  if (r == 0.0) r = 0.0;  // no "-0.00"
  return fmt::format("{:.{}f}", r, decimals);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
  std::uint64_t z = seed ^ fnv1a64(salt);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string make_run_id() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
  std::random_device rd;
  return fmt::format("{}-{:08x}", buf, rd());
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace umm
