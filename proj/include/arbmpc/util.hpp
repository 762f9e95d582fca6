#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace arbmpc {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;

// ---------------------------------------------------------------------------
// Errors. Every failure mode the library reports is one of these; the CLI
// maps them onto its exit-code contract.
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

// Strict-mode memory accounting violation (local or global budget).
struct MemoryViolation : std::runtime_error {
  explicit MemoryViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// A derandomization search failed to reach its certified score.
struct EstimatorError : std::runtime_error {
  explicit EstimatorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Peeling or a reduction loop stopped making progress.
struct NonProgressError : std::runtime_error {
  explicit NonProgressError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvariantError(msg);
}

// ---------------------------------------------------------------------------
// Exact dyadic rationals: num / 2^log2den with num a signed 128-bit integer.
// All estimator scores and conditional expectations in this project are sums
// of products of probabilities with power-of-two denominators, so this type
// is closed under every operation we need and comparisons are exact.
// ---------------------------------------------------------------------------

class Dyadic {
 public:
  constexpr Dyadic() : num_(0), exp_(0) {}
  constexpr Dyadic(i64 value) : num_(value), exp_(0) {}  // NOLINT(implicit)
  static Dyadic ratio_pow2(i128 num, int log2den) {
    Dyadic d;
    d.num_ = num;
    d.exp_ = log2den;
    d.normalize();
    return d;
  }

  i128 num() const { return num_; }
  int log2den() const { return exp_; }

  Dyadic operator+(const Dyadic& o) const {
    int e = exp_ > o.exp_ ? exp_ : o.exp_;
    i128 a = shifted(num_, e - exp_);
    i128 b = shifted(o.num_, e - o.exp_);
    return ratio_pow2(checked_add(a, b), e);
  }
  Dyadic operator-(const Dyadic& o) const { return *this + o.negated(); }
  Dyadic operator*(const Dyadic& o) const {
    return ratio_pow2(checked_mul(num_, o.num_), exp_ + o.exp_);
  }
  Dyadic negated() const {
    Dyadic d = *this;
    d.num_ = -d.num_;
    return d;
  }
  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
  Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

  bool operator==(const Dyadic& o) const { return cmp(o) == 0; }
  bool operator!=(const Dyadic& o) const { return cmp(o) != 0; }
  bool operator<(const Dyadic& o) const { return cmp(o) < 0; }
  bool operator<=(const Dyadic& o) const { return cmp(o) <= 0; }
  bool operator>(const Dyadic& o) const { return cmp(o) > 0; }
  bool operator>=(const Dyadic& o) const { return cmp(o) >= 0; }

  double to_double() const {
    double d = static_cast<double>(num_);
    for (int i = 0; i < exp_; ++i) d /= 2.0;
    return d;
  }

  std::string to_string() const;

 private:
  static i128 shifted(i128 v, int by) {
    while (by-- > 0) {
      if (v > (max_i128() >> 1) || v < -(max_i128() >> 1))
        throw std::overflow_error("Dyadic shift overflow");
      v <<= 1;
    }
    return v;
  }
  static constexpr i128 max_i128() {
    return (i128(0x7fffffffffffffffLL) << 64) | i128(0xffffffffffffffffULL);
  }
  static i128 checked_add(i128 a, i128 b) {
    if (b > 0 && a > max_i128() - b) throw std::overflow_error("Dyadic add overflow");
    if (b < 0 && a < -max_i128() - b) throw std::overflow_error("Dyadic add overflow");
    return a + b;
  }
  static i128 checked_mul(i128 a, i128 b) {
    if (a == 0 || b == 0) return 0;
    i128 r = a * b;
    if (r / b != a) throw std::overflow_error("Dyadic mul overflow");
    return r;
  }
  int cmp(const Dyadic& o) const {
    int e = exp_ > o.exp_ ? exp_ : o.exp_;
    i128 a = shifted(num_, e - exp_);
    i128 b = shifted(o.num_, e - o.exp_);
    return a < b ? -1 : (a > b ? 1 : 0);
  }
  void normalize() {
    while (exp_ > 0 && (num_ & 1) == 0) {
      num_ >>= 1;
      --exp_;
    }
    if (num_ == 0) exp_ = 0;
  }

  i128 num_;
  int exp_;  // denominator = 2^exp_, exp_ >= 0
};

inline std::string Dyadic::to_string() const {
  i128 v = num_ < 0 ? -num_ : num_;
  std::string digits;
  if (v == 0) digits = "0";
  while (v > 0) {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::string s = (num_ < 0 ? "-" : "") + digits;
  if (exp_ > 0) s += "/2^" + std::to_string(exp_);
  return s;
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). Used only by generators and fuzz harnesses;
// fixed here so outputs are stable across platforms and standard libraries.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(u64 seed) : state_(seed) {}

  u64 next() {
    u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound), bound >= 1. Rejection sampling, unbiased.
  u64 below(u64 bound) {
    u64 threshold = (~bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
      u64 r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  u64 state_;
};

// ---------------------------------------------------------------------------
// Small bit helpers.
// ---------------------------------------------------------------------------

inline int ceil_log2(u64 x) {
  int b = 0;
  while ((u64(1) << b) < x) {
    ++b;
    if (b >= 63) break;
  }
  return b;
}

inline int floor_log2(u64 x) {
  int b = 0;
  while (x >>= 1) ++b;
  return b;
}

inline u64 pow2_ceil(u64 x) { return u64(1) << ceil_log2(x); }

inline bool is_prime(u64 p) {
  if (p < 2) return false;
  for (u64 d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline u64 next_prime_above(u64 x) {
  u64 p = x + 1;
  while (!is_prime(p)) ++p;
  return p;
}

}  // namespace arbmpc
