#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace defplan {

// ------------------------------------------------------------ schema ---

inline constexpr int kFeatureCount = 20;

// Canonical static-metric schema. CSV columns are located by header name,
// not by position; this array fixes the in-memory feature order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "wmc",  "dit",   "noc", "cbo", "rfc", "lcom", "ca",  "ce",     "npm",
    "lcom3", "loc",  "dam", "moa", "mfa", "cam",  "ic",  "cbm",    "amc",
    "max_cc", "avg_cc"};

// Index of `name` in kFeatureNames, or -1 when unknown.
int feature_index(std::string_view name);

using FeatureVector = std::array<double, kFeatureCount>;

// Closed value interval [lo, hi]; the unit square primitive shared by the
// discretizer, explanations, and plans.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

// ------------------------------------------------------------ errors ---

enum class ErrorCode {
  io,                // file missing / unreadable / unwritable
  schema,            // header or column-set problems, duplicate unit names
  parse,             // malformed cell values (with row/column context)
  config,            // bad experiment configuration
  alignment,         // release pairing produced no shared units
  rebalance,         // oversampling impossible (minority too small)
  training,          // model cannot be fit (e.g. single-class data)
  undefined_effect,  // requested statistic has no defined value
  contract,          // caller broke an API precondition
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

// ------------------------------------------------------------ hashing ---

// FNV-1a, 64-bit; used to derive per-unit seeds from unit names.
std::uint64_t fnv1a64(std::string_view text);

// splitmix64 finalizer; used to decorrelate derived seed streams.
std::uint64_t splitmix64(std::uint64_t x);

// Seed for the `index`-th derived stream of a master seed.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index);

// --------------------------------------------------------------- rng ---

// All randomness flows through this wrapper. mt19937_64 output is fully
// specified by the standard, and the two draw helpers below avoid the
// implementation-defined std:: distributions, so identical seeds give
// identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1): top 53 bits of one engine draw.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); n must be positive.
  std::size_t uniform_below(std::size_t n) {
    require(n > 0, ErrorCode::contract, "uniform_below: n must be positive");
    return static_cast<std::size_t>(engine_() % n);
  }

 private:
  std::mt19937_64 engine_;
};

// -------------------------------------------------------- formatting ---

// Shortest decimal that round-trips `value`; locale-free (std::to_chars),
// so emitted reports are byte-stable across runs and machines.
std::string format_double(double value);

// Quotes a CSV field only when it holds a comma, quote, or newline;
// embedded quotes are doubled.
std::string csv_field(const std::string& text);

}  // namespace defplan
