#pragma once

// Forward-mode dual numbers with a fixed-capacity gradient.
//
//   Dual<32> x(2.0, 0);        // value 2, seeded on coordinate 0
//   auto y = x * x + sin(x);
//   y.v      == 4 + sin(2)
//   y.d[0]   == 4 + cos(2)
//
// The capacity is a compile-time bound; unused trailing partials stay zero.
// Works as an Eigen scalar (see the NumTraits specialization at the bottom).

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace densegrasp {

template <int N>
struct Dual {
  using Grad = Eigen::Matrix<double, N, 1>;

  double v = 0.0;
  Grad d = Grad::Zero();

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants
  Dual(double value, int seed) : v(value) { d[seed] = 1.0; }
  Dual(double value, const Grad& grad) : v(value), d(grad) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + o.d * v; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

template <int N> inline Dual<N> operator-(const Dual<N>& a) { return {-a.v, typename Dual<N>::Grad(-a.d)}; }
template <int N> inline Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) { return {a.v + b.v, typename Dual<N>::Grad(a.d + b.d)}; }
template <int N> inline Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) { return {a.v - b.v, typename Dual<N>::Grad(a.d - b.d)}; }
template <int N> inline Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  return {a.v * b.v, typename Dual<N>::Grad(a.d * b.v + b.d * a.v)};
}
template <int N> inline Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  const double q = a.v / b.v;
  return {q, typename Dual<N>::Grad((a.d - b.d * q) / b.v)};
}

template <int N> inline Dual<N> operator+(const Dual<N>& a, double b) { return {a.v + b, a.d}; }
template <int N> inline Dual<N> operator+(double a, const Dual<N>& b) { return {a + b.v, b.d}; }
template <int N> inline Dual<N> operator-(const Dual<N>& a, double b) { return {a.v - b, a.d}; }
template <int N> inline Dual<N> operator-(double a, const Dual<N>& b) { return {a - b.v, typename Dual<N>::Grad(-b.d)}; }
template <int N> inline Dual<N> operator*(const Dual<N>& a, double b) { return {a.v * b, typename Dual<N>::Grad(a.d * b)}; }
template <int N> inline Dual<N> operator*(double a, const Dual<N>& b) { return {a * b.v, typename Dual<N>::Grad(b.d * a)}; }
template <int N> inline Dual<N> operator/(const Dual<N>& a, double b) { return {a.v / b, typename Dual<N>::Grad(a.d / b)}; }

template <int N> inline bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.v < b.v; }
template <int N> inline bool operator>(const Dual<N>& a, const Dual<N>& b) { return a.v > b.v; }
template <int N> inline bool operator<=(const Dual<N>& a, const Dual<N>& b) { return a.v <= b.v; }
template <int N> inline bool operator>=(const Dual<N>& a, const Dual<N>& b) { return a.v >= b.v; }
template <int N> inline bool operator==(const Dual<N>& a, const Dual<N>& b) { return a.v == b.v; }
template <int N> inline bool operator!=(const Dual<N>& a, const Dual<N>& b) { return a.v != b.v; }

template <int N> inline Dual<N> sqrt(const Dual<N>& a) {
  const double s = std::sqrt(a.v);
  return {s, typename Dual<N>::Grad(a.d * (0.5 / s))};
}
template <int N> inline Dual<N> sin(const Dual<N>& a) { return {std::sin(a.v), typename Dual<N>::Grad(a.d * std::cos(a.v))}; }
template <int N> inline Dual<N> cos(const Dual<N>& a) { return {std::cos(a.v), typename Dual<N>::Grad(a.d * -std::sin(a.v))}; }
template <int N> inline Dual<N> exp(const Dual<N>& a) {
  const double e = std::exp(a.v);
  return {e, typename Dual<N>::Grad(a.d * e)};
}
template <int N> inline Dual<N> abs(const Dual<N>& a) { return a.v < 0 ? -a : a; }
template <int N> inline Dual<N> abs2(const Dual<N>& a) { return a * a; }
template <int N> inline bool isfinite(const Dual<N>& a) { return std::isfinite(a.v) && a.d.allFinite(); }

// Scalar helpers that work for both double and Dual.
inline double value_of(double x) { return x; }
template <int N> inline double value_of(const Dual<N>& x) { return x.v; }

/// Gradient carrier used by every loss: 9 pose coordinates plus up to 23 joints.
inline constexpr int kMaxParams = 32;
using Jet = Dual<kMaxParams>;

}  // namespace densegrasp

namespace Eigen {

template <int N>
struct NumTraits<densegrasp::Dual<N>> : NumTraits<double> {
  using Real = densegrasp::Dual<N>;
  using NonInteger = densegrasp::Dual<N>;
  using Nested = densegrasp::Dual<N>;
  using Literal = densegrasp::Dual<N>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<densegrasp::Dual<N>, double, BinaryOp> {
  using ReturnType = densegrasp::Dual<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, densegrasp::Dual<N>, BinaryOp> {
  using ReturnType = densegrasp::Dual<N>;
};

}  // namespace Eigen
