#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace czflow {

inline constexpr int kMaxBaseDim = 4;

/// Coordinate vector of a base-group element (dimension <= kMaxBaseDim).
/// Plain value type; no heap traffic in hot sampling loops.
struct Vec {
  std::array<double, kMaxBaseDim> c{};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(std::initializer_list<double> xs) {
    n = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) c[i++] = x;
  }

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }
  int size() const { return n; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }
};

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec operator*(double s, const Vec& a) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = s * a[i];
  return r;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double euclid_norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double sup_dist(const Vec& a, const Vec& b) {
  double m = 0;
  for (int i = 0; i < a.n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

enum class ErrorCode {
  config = 2,       // malformed or inconsistent configuration
  resource = 3,     // window/generation range exhausted
  certificate = 4,  // a certified bound failed
  internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

/// arccosh(u) = log(u + sqrt(u^2-1)).  Near u = 1 the direct form cancels
/// catastrophically, so below the switchover u < 1 + 1e-8 we use the series
/// sqrt(2x)(1 - x/12 + 3x^2/160), x = u - 1; above it, u^2 - 1 is expanded as
/// x(x+2) and the log taken via log1p, which stays accurate for moderate x.
inline double acosh_stable(double u) {
  if (u < 1.0) {
    if (u > 1.0 - 1e-12) return 0.0;  // roundoff guard for exact-equal inputs
    fail(ErrorCode::internal, "acosh argument below 1");
  }
  double x = u - 1.0;
  if (x < 1e-8) return std::sqrt(2.0 * x) * (1.0 - x / 12.0 + 3.0 * x * x / 160.0);
  return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

/// splitmix64; used to derive independent stream seeds from a master seed so
/// campaigns stay reproducible regardless of task order.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(split_seed(master, stream));
}

struct Interval {
  double lo = 0, hi = 0;
  double length() const { return hi - lo; }
  bool contains_open(double t) const { return t > lo && t < hi; }
  bool empty() const { return !(lo < hi); }
};

inline Interval intersect(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

inline double overlap_length(const Interval& a, const Interval& b) {
  Interval i = intersect(a, b);
  return i.empty() ? 0.0 : i.length();
}

}  // namespace czflow
