#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace treepoly {

// Conductance laws. Each variant is a plain parameter record; use the
// make_* factories (or parse_law) to get validated instances.

struct TwoPoint {
  double a = 0.0;
  double b = 1.0;
  double p = 0.5;  // P(X = a)

  bool operator==(const TwoPoint&) const = default;
};

struct FiniteDiscrete {
  std::vector<double> values;
  std::vector<double> probs;

  bool operator==(const FiniteDiscrete&) const = default;
};

struct Gaussian {
  double mean = 0.0;
  double stdev = 1.0;

  bool operator==(const Gaussian&) const = default;
};

struct Exponential {
  double rate = 1.0;

  bool operator==(const Exponential&) const = default;
};

struct Constant {
  double x0 = 0.0;

  bool operator==(const Constant&) const = default;
};

using ConductanceLaw =
    std::variant<TwoPoint, FiniteDiscrete, Gaussian, Exponential, Constant>;

ConductanceLaw make_two_point(double a, double b, double p);
ConductanceLaw make_discrete(std::vector<double> values,
                             std::vector<double> probs);
ConductanceLaw make_gaussian(double mean, double stdev);
ConductanceLaw make_exponential(double rate);
ConductanceLaw make_constant(double x0);

/// Throws ConfigError when the parameters violate the law's invariants.
void validate(const ConductanceLaw& law);

/// Parses `twopoint:a,b,p`, `discrete:v1:p1,v2:p2,...`, `gaussian:mean,stdev`,
/// `exponential:rate` or `constant:x0`.
ConductanceLaw parse_law(std::string_view spec);

/// Inverse of parse_law; numbers are written with 17 significant digits so
/// parse_law(format_law(law)) reproduces the law exactly.
std::string format_law(const ConductanceLaw& law);

/// True when E[X^k e^{-beta X}] is finite for k = 0, 1, 2.
bool laplace_exists(const ConductanceLaw& law, double beta);

/// lambda_beta = E[e^{-beta X}]. Throws DomainError if divergent.
double laplace(const ConductanceLaw& law, double beta);

/// log lambda_beta, evaluated without forming lambda_beta for atom laws.
double log_laplace(const ConductanceLaw& law, double beta);

struct LaplaceDerivatives {
  double first = 0.0;   // E[X e^{-beta X}]
  double second = 0.0;  // E[X^2 e^{-beta X}]
};

LaplaceDerivatives laplace_derivatives(const ConductanceLaw& law, double beta);

/// Mean and variance of X under the exponentially tilted law
/// dP_beta = e^{-beta X} dP / lambda_beta. These are the ratios
/// E[X e^{-beta X}]/lambda_beta and the corresponding centered second moment,
/// computed stably.
struct TiltedMoments {
  double log_lambda = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

TiltedMoments tilted_moments(const ConductanceLaw& law, double beta);

/// Inverse CDF. `u` must lie in (0, 1).
double quantile(const ConductanceLaw& law, double u);

/// P(X <= x).
double cdf(const ConductanceLaw& law, double x);

/// Number of atoms for finite laws (TwoPoint, FiniteDiscrete, Constant),
/// zero for continuous laws.
std::size_t atom_count(const ConductanceLaw& law);

/// Atom values and probabilities for finite laws, in quantile order.
struct Atoms {
  std::vector<double> values;
  std::vector<double> probs;
};

Atoms atoms(const ConductanceLaw& law);

/// Running sums of `at.probs`; the quantile of an atom law picks the first
/// atom whose cumulative probability exceeds u.
std::vector<double> cumulative_probs(const Atoms& at);
std::size_t pick_atom(const std::vector<double>& cumulative, double u);

/// Standard normal quantile (Wichura's AS241, ~1e-16 relative accuracy).
double normal_quantile(double u);

}  // namespace treepoly
