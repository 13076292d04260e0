#pragma once

#include <cmath>

namespace mdma {

/// Univariate second-order forward-mode scalar: value, first and second derivative.
/// Lets the templated KPI/value maps deliver exact curvature to the barrier solver.
struct Dual2 {
  double v = 0.0;
  double d = 0.0;
  double dd = 0.0;

  Dual2() = default;
  Dual2(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual2(double value, double d1, double d2) : v(value), d(d1), dd(d2) {}

  static Dual2 variable(double x) { return {x, 1.0, 0.0}; }

  Dual2 operator-() const { return {-v, -d, -dd}; }
  Dual2& operator+=(const Dual2& o) { v += o.v; d += o.d; dd += o.dd; return *this; }
  Dual2& operator-=(const Dual2& o) { v -= o.v; d -= o.d; dd -= o.dd; return *this; }
  Dual2& operator*=(const Dual2& o) {
    *this = {v * o.v, d * o.v + v * o.d, dd * o.v + 2.0 * d * o.d + v * o.dd};
    return *this;
  }
  Dual2& operator/=(const Dual2& o) {
    const double inv = 1.0 / o.v;
    // r = 1/g: r' = -g'/g^2, r'' = (2g'^2 - g g'')/g^3
    const Dual2 r{inv, -o.d * inv * inv, (2.0 * o.d * o.d - o.v * o.dd) * inv * inv * inv};
    return *this *= r;
  }
};

inline Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
inline Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
inline Dual2 operator*(Dual2 a, const Dual2& b) { return a *= b; }
inline Dual2 operator/(Dual2 a, const Dual2& b) { return a /= b; }
inline Dual2 operator+(Dual2 a, double b) { a.v += b; return a; }
inline Dual2 operator+(double a, Dual2 b) { b.v += a; return b; }
inline Dual2 operator-(Dual2 a, double b) { a.v -= b; return a; }
inline Dual2 operator-(double a, const Dual2& b) { return Dual2(a) - b; }
inline Dual2 operator*(Dual2 a, double b) { return {a.v * b, a.d * b, a.dd * b}; }
inline Dual2 operator*(double a, Dual2 b) { return b * a; }
inline Dual2 operator/(Dual2 a, double b) { return a * (1.0 / b); }
inline Dual2 operator/(double a, const Dual2& b) { return Dual2(a) / b; }

inline bool operator<(const Dual2& a, const Dual2& b) { return a.v < b.v; }
inline bool operator>(const Dual2& a, const Dual2& b) { return a.v > b.v; }
inline bool operator<=(const Dual2& a, const Dual2& b) { return a.v <= b.v; }
inline bool operator>=(const Dual2& a, const Dual2& b) { return a.v >= b.v; }

/// Chain rule for a scalar map with known f, f', f''.
inline Dual2 chain(const Dual2& x, double f, double f1, double f2) {
  return {f, f1 * x.d, f2 * x.d * x.d + f1 * x.dd};
}

inline Dual2 exp(const Dual2& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e, e);
}
inline Dual2 log(const Dual2& x) { return chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v)); }
inline Dual2 log2(const Dual2& x) { return log(x) / std::log(2.0); }
inline Dual2 log1p(const Dual2& x) {
  const double u = 1.0 + x.v;
  return chain(x, std::log1p(x.v), 1.0 / u, -1.0 / (u * u));
}
inline Dual2 pow(const Dual2& x, double a) {
  const double p = std::pow(x.v, a);
  return chain(x, p, a * std::pow(x.v, a - 1.0), a * (a - 1.0) * std::pow(x.v, a - 2.0));
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual2& x) { return x.v; }

}  // namespace mdma
