#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace umm {

namespace fs = std::filesystem;

// ---- hashing ---------------------------------------------------------------

std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 over a sequence of length-framed fields, so that
/// ("ab","c") and ("a","bc") hash differently.
class FieldHasher {
 public:
  FieldHasher();
  ~FieldHasher();
  FieldHasher(const FieldHasher&) = delete;
  FieldHasher& operator=(const FieldHasher&) = delete;

  FieldHasher& add(std::string_view field);
  std::string hex();

 private:
  void* ctx_;
};

std::uint64_t fnv1a64(std::string_view data);

// ---- encoding --------------------------------------------------------------

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

// ---- files -----------------------------------------------------------------

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view content);
std::vector<std::string> read_lines(const fs::path& path);

// ---- numerics --------------------------------------------------------------

/// Round half away from zero to `decimals` places.
double round_to(double value, int decimals);
std::string format_fixed(double value, int decimals);

/// Deterministic generator whose output does not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

// ---- time ------------------------------------------------------------------

std::string utc_timestamp();
/// `<UTC timestamp>-<8 hex>`; the suffix is drawn from a nondeterministic source.
std::string make_run_id();

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace umm
