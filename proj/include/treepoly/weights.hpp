#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>
#include <vector>

#include "treepoly/conductance.hpp"

namespace treepoly {

// Boltzmann-weight samplers: map a uniform u in (0,1) to e^{-beta X - shift}
// with X = quantile(law, u). Concrete types so hot loops can be instantiated
// per law; with_weight_sampler does the single variant dispatch.

class AtomWeightSampler {
 public:
  AtomWeightSampler(const ConductanceLaw& law, double beta, double shift = 0.0)
      : cumulative_(cumulative_probs(atoms(law))) {
    for (double v : atoms(law).values) {
      weights_.push_back(std::exp(-beta * v - shift));
    }
  }
  double operator()(double u) const {
    return weights_[pick_atom(cumulative_, u)];
  }

 private:
  std::vector<double> cumulative_;
  std::vector<double> weights_;
};

class TwoAtomWeightSampler {
 public:
  TwoAtomWeightSampler(const ConductanceLaw& law, double beta,
                       double shift = 0.0) {
    const auto at = atoms(law);
    threshold_ = cumulative_probs(at)[0];
    low_ = std::exp(-beta * at.values[0] - shift);
    high_ = std::exp(-beta * at.values[1] - shift);
  }
  double operator()(double u) const { return u < threshold_ ? low_ : high_; }

 private:
  double threshold_ = 0.0;
  double low_ = 1.0;
  double high_ = 1.0;
};

class GaussianWeightSampler {
 public:
  GaussianWeightSampler(const Gaussian& law, double beta, double shift = 0.0)
      : offset_(-beta * law.mean - shift), slope_(-beta * law.stdev) {}
  double operator()(double u) const {
    return std::exp(offset_ + slope_ * normal_quantile(u));
  }

 private:
  double offset_;
  double slope_;
};

class ExponentialWeightSampler {
 public:
  ExponentialWeightSampler(const Exponential& law, double beta,
                           double shift = 0.0)
      : scale_(beta / law.rate), shift_(shift) {}
  double operator()(double u) const {
    return std::exp(scale_ * std::log1p(-u) - shift_);
  }

 private:
  double scale_;
  double shift_;
};

/// Weight as mantissa * 2^exponent, for log-weights beyond double range.
struct WideWeight {
  double mantissa;
  int exponent;
};

class WideWeightSampler {
 public:
  WideWeightSampler(const ConductanceLaw& law, double beta, double shift)
      : law_(law), beta_(beta), shift_(shift) {}
  WideWeight operator()(double u) const {
    const double lw = -beta_ * quantile(law_, u) - shift_;
    const double k = std::floor(lw / std::numbers::ln2);
    return {std::exp(lw - k * std::numbers::ln2), static_cast<int>(k)};
  }

 private:
  ConductanceLaw law_;
  double beta_;
  double shift_;
};

/// Range of -beta X over every u the edge hash can produce, u in
/// [2^-54, 1 - 2^-54].
struct LogWeightRange {
  double lo;
  double hi;
};

inline LogWeightRange log_weight_range(const ConductanceLaw& law,
                                       double beta) {
  double xlo = 0.0;
  double xhi = 0.0;
  if (const auto* g = std::get_if<Gaussian>(&law)) {
    xlo = g->mean - 8.5 * g->stdev;
    xhi = g->mean + 8.5 * g->stdev;
  } else if (const auto* e = std::get_if<Exponential>(&law)) {
    xhi = 54.0 * std::numbers::ln2 / e->rate;
  } else {
    const auto at = atoms(law);
    const auto [lo, hi] = std::minmax_element(at.values.begin(), at.values.end());
    xlo = *lo;
    xhi = *hi;
  }
  const double a = -beta * xlo;
  const double b = -beta * xhi;
  return {std::min(a, b), std::max(a, b)};
}

/// Calls fn(sampler, shift) where the sampler returns e^{-beta X - shift}.
/// The shift centers the log-weight range; when even the centered range
/// leaves double precision the sampler returns WideWeight instead of double.
template <class Fn>
decltype(auto) with_shifted_sampler(const ConductanceLaw& law, double beta,
                                    Fn&& fn) {
  constexpr double kSafeHalfWidth = 600.0;
  const auto range = log_weight_range(law, beta);
  const double shift = 0.5 * (range.lo + range.hi);
  if (0.5 * (range.hi - range.lo) > kSafeHalfWidth) {
    return fn(WideWeightSampler(law, beta, shift), shift);
  }
  if (const auto* g = std::get_if<Gaussian>(&law)) {
    return fn(GaussianWeightSampler(*g, beta, shift), shift);
  }
  if (const auto* e = std::get_if<Exponential>(&law)) {
    return fn(ExponentialWeightSampler(*e, beta, shift), shift);
  }
  if (atom_count(law) == 2) return fn(TwoAtomWeightSampler(law, beta, shift), shift);
  return fn(AtomWeightSampler(law, beta, shift), shift);
}

template <class Fn>
decltype(auto) with_weight_sampler(const ConductanceLaw& law, double beta,
                                   Fn&& fn) {
  if (const auto* g = std::get_if<Gaussian>(&law)) {
    return fn(GaussianWeightSampler(*g, beta));
  }
  if (const auto* e = std::get_if<Exponential>(&law)) {
    return fn(ExponentialWeightSampler(*e, beta));
  }
  if (atom_count(law) == 2) return fn(TwoAtomWeightSampler(law, beta));
  return fn(AtomWeightSampler(law, beta));
}

}  // namespace treepoly
