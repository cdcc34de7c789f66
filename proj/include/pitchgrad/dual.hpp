// Copyright 2026 The Pitchgrad Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Forward-mode automatic differentiation with a single derivative channel.
//
// Every DSP routine in this library is a template over a scalar type that is
// either `double` or `Dual`. The free functions below (sin, cos, log, ...)
// are overloaded for both so that template code can call them unqualified
// and get identical values on either path.

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <type_traits>

namespace pitchgrad {

/// A value together with its derivative with respect to one seeded
/// parameter.
struct Dual {
  double val = 0.0;
  double der = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v) {}  // NOLINT: implicit constant lift
  constexpr Dual(double v, double d) : val(v), der(d) {}

  constexpr Dual& operator+=(const Dual& o) {
    val += o.val;
    der += o.der;
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    val -= o.val;
    der -= o.der;
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    der = val * o.der + der * o.val;
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o);
};

template <class T>
inline constexpr bool is_dual_v = std::is_same_v<std::remove_cvref_t<T>, Dual>;

constexpr Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
constexpr Dual operator*(const Dual& a, const Dual& b) {
  return {a.val * b.val, a.val * b.der + a.der * b.val};
}
// Mixed forms avoid the zero-derivative multiplications of the lifted path.
constexpr Dual operator*(const Dual& a, double b) { return {a.val * b, a.der * b}; }
constexpr Dual operator*(double a, const Dual& b) { return {a * b.val, a * b.der}; }
constexpr Dual operator+(const Dual& a, double b) { return {a.val + b, a.der}; }
constexpr Dual operator+(double a, const Dual& b) { return {a + b.val, b.der}; }
constexpr Dual operator-(const Dual& a, double b) { return {a.val - b, a.der}; }
constexpr Dual operator-(double a, const Dual& b) { return {a - b.val, -b.der}; }

inline Dual operator/(const Dual& a, const Dual& b) {
  if (b.val == 0.0) throw std::domain_error("Dual division by zero");
  const double q = a.val / b.val;
  return {q, (a.der - q * b.der) / b.val};
}
inline Dual operator/(const Dual& a, double b) {
  if (b == 0.0) throw std::domain_error("Dual division by zero");
  return {a.val / b, a.der / b};
}
inline Dual operator/(double a, const Dual& b) { return Dual(a) / b; }
inline Dual& Dual::operator/=(const Dual& o) { return *this = *this / o; }

constexpr bool operator==(const Dual& a, const Dual& b) {
  return a.val == b.val && a.der == b.der;
}
// Ordering compares values only; derivatives do not participate.
constexpr bool operator<(const Dual& a, const Dual& b) { return a.val < b.val; }
constexpr bool operator>(const Dual& a, const Dual& b) { return a.val > b.val; }

inline std::ostream& operator<<(std::ostream& os, const Dual& d) {
  return os << "(" << d.val << ", " << d.der << ")";
}

/// Value part of a scalar, for code that is generic over double and Dual.
constexpr double value_of(double x) { return x; }
constexpr double value_of(const Dual& x) { return x.val; }
constexpr double derivative_of(double) { return 0.0; }
constexpr double derivative_of(const Dual& x) { return x.der; }

// Elementary functions. The double overloads are thin wrappers so generic
// code can use one spelling; domain rules are identical on both paths.

inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) {
  if (!(x > 0.0)) throw std::domain_error("log of non-positive value");
  return std::log(x);
}
inline double log10(double x) {
  if (!(x > 0.0)) throw std::domain_error("log10 of non-positive value");
  return std::log10(x);
}
inline double log2(double x) {
  if (!(x > 0.0)) throw std::domain_error("log2 of non-positive value");
  return std::log2(x);
}
inline double sqrt(double x) {
  if (x < 0.0) throw std::domain_error("sqrt of negative value");
  return std::sqrt(x);
}
inline double abs(double x) { return std::fabs(x); }
inline double pow(double x, double p) { return std::pow(x, p); }

namespace detail {
// Out of line so the compiler cannot fuse sin(v) and cos(v) into one
// sincos call, whose last-bit rounding differs from cos alone; values must
// match the plain double path exactly.
[[gnu::noinline]] inline double sin_of(double v) { return std::sin(v); }
[[gnu::noinline]] inline double cos_of(double v) { return std::cos(v); }
}  // namespace detail

inline Dual sin(const Dual& x) { return {std::sin(x.val), detail::cos_of(x.val) * x.der}; }
inline Dual cos(const Dual& x) { return {std::cos(x.val), -detail::sin_of(x.val) * x.der}; }
inline Dual exp(const Dual& x) {
  const double e = std::exp(x.val);
  return {e, e * x.der};
}
inline Dual log(const Dual& x) {
  if (!(x.val > 0.0)) throw std::domain_error("log of non-positive value");
  return {std::log(x.val), x.der / x.val};
}
inline Dual log10(const Dual& x) {
  if (!(x.val > 0.0)) throw std::domain_error("log10 of non-positive value");
  return {std::log10(x.val), x.der / (x.val * std::numbers::ln10)};
}
inline Dual log2(const Dual& x) {
  if (!(x.val > 0.0)) throw std::domain_error("log2 of non-positive value");
  return {std::log2(x.val), x.der / (x.val * std::numbers::ln2)};
}
/// sqrt with derivative 0 at the origin.
inline Dual sqrt(const Dual& x) {
  if (x.val < 0.0) throw std::domain_error("sqrt of negative value");
  const double s = std::sqrt(x.val);
  if (s == 0.0) return {0.0, 0.0};
  return {s, x.der / (2.0 * s)};
}
/// abs with subgradient 0 at the origin.
inline Dual abs(const Dual& x) {
  if (x.val > 0.0) return x;
  if (x.val < 0.0) return -x;
  return {std::fabs(x.val), 0.0};
}
inline Dual pow(const Dual& x, double p) {
  const double v = std::pow(x.val, p);
  if (x.der == 0.0) return {v, 0.0};
  return {v, p * std::pow(x.val, p - 1.0) * x.der};
}

/// Complex number over a real scalar. `ComplexDual` carries STFT values.
template <class T>
struct Complex {
  T re{};
  T im{};

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
};

using ComplexDual = Complex<Dual>;

template <class T>
Complex<T> operator+(Complex<T> a, const Complex<T>& b) {
  return a += b;
}
template <class T>
Complex<T> operator-(const Complex<T>& a, const Complex<T>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class T>
Complex<T> operator*(const Complex<T>& a, const Complex<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
// Scalar-by-constant-twiddle product.
inline Complex<Dual> operator*(const Complex<Dual>& a, const Complex<double>& w) {
  return {a.re * w.re - a.im * w.im, a.re * w.im + a.im * w.re};
}

/// Modulus. At the origin the derivative is defined as 0.
inline double magnitude(const Complex<double>& z) {
  return std::sqrt(z.re * z.re + z.im * z.im);
}
inline Dual magnitude(const ComplexDual& z) {
  const double m = std::sqrt(z.re.val * z.re.val + z.im.val * z.im.val);
  if (m == 0.0) return {0.0, 0.0};
  return {m, (z.re.val * z.re.der + z.im.val * z.im.der) / m};
}

}  // namespace pitchgrad
