#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>

namespace treepoly {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Non-negative sum carried as mantissa * 2^exponent so that sums of
/// e^{-beta * (path conductance)} neither overflow nor underflow. The
/// exponent only moves when the mantissa leaves [2^-512, 2^512].
class ScaledSum {
 public:
  static constexpr double kHigh = 0x1.0p512;
  static constexpr double kLow = 0x1.0p-512;

  void add(double mantissa, int exponent) {
    if (mantissa == 0.0) return;
    if (mantissa_ == 0.0) {
      mantissa_ = mantissa;
      exponent_ = exponent;
    } else if (exponent == exponent_) {
      mantissa_ += mantissa;
    } else if (exponent > exponent_) {
      mantissa_ = std::ldexp(mantissa_, exponent_ - exponent) + mantissa;
      exponent_ = exponent;
    } else {
      mantissa_ += std::ldexp(mantissa, exponent - exponent_);
    }
    if (mantissa_ > kHigh) normalize();
  }

  void add(const ScaledSum& other) { add(other.mantissa_, other.exponent_); }

  double mantissa() const { return mantissa_; }
  int exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_ == 0.0; }

  double log() const {
    return std::log(mantissa_) + exponent_ * std::numbers::ln2;
  }

 private:
  void normalize() {
    int shift = 0;
    mantissa_ = std::frexp(mantissa_, &shift);
    exponent_ += shift;
  }

  double mantissa_ = 0.0;
  int exponent_ = 0;
};

/// Root of `f` on [lo, hi] given a sign change, by TOMS 748 (a Brent-family
/// bracketing method). Stops when the bracket is narrower than `x_tol`.
template <class F>
double find_root(F&& f, double lo, double hi, double x_tol = 1e-12) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::invalid_argument("find_root: no sign change on the bracket");
  }
  std::uintmax_t max_iter = 300;
  auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (a + b);
}

/// Plain bisection; used where an independent check of find_root is wanted.
template <class F>
double bisect(F&& f, double lo, double hi, double x_tol) {
  double flo = f(lo);
  if ((flo > 0.0) == (f(hi) > 0.0)) {
    throw std::invalid_argument("bisect: no sign change on the bracket");
  }
  while (hi - lo > x_tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for the minimizer of a unimodal `f` on [lo, hi].
template <class F>
double golden_section_minimize(F&& f, double lo, double hi, double x_tol) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > x_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace treepoly
