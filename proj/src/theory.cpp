#include "treepoly/theory.hpp"

#include <cmath>
#include <string>

#include "treepoly/errors.hpp"
#include "treepoly/numerics.hpp"

namespace treepoly::theory {

namespace {

void require_tree(int ell) {
  if (ell < 2) throw DomainError("tree degree must be >= 2");
}

// Operations resting on the weak/strong dichotomy need a branching tree.
void require_branching(int ell) {
  if (ell < 3) {
    throw DomainError("degree " + std::to_string(ell) +
                      " < 3: no weak/strong disorder transition on this tree");
  }
}

void require_theta_window(const ConductanceLaw& law, double beta) {
  if (!laplace_exists(law, 0.0) || !laplace_exists(law, 2.0 * beta) ||
      !laplace_exists(law, beta)) {
    throw DomainError("Laplace transform must exist for theta*beta, theta in [0,2]");
  }
}

constexpr double kThetaFloor = 1e-6;
constexpr double kThetaTolerance = 1e-12;

}  // namespace

double connective_constant(int ell) {
  require_tree(ell);
  return ell - 1.0;
}

double saw_count(int ell, int n) {
  require_tree(ell);
  if (n < 0) throw DomainError("walk length must be >= 0");
  if (n == 0) return 1.0;
  double count = ell;
  for (int i = 1; i < n; ++i) count *= ell - 1.0;
  return count;
}

double log_saw_count(int ell, int n) {
  require_tree(ell);
  if (n < 0) throw DomainError("walk length must be >= 0");
  if (n == 0) return 0.0;
  const double count = saw_count(ell, n);
  if (count < 0x1.0p53) return std::log(count);
  return std::log(static_cast<double>(ell)) + (n - 1) * std::log(ell - 1.0);
}

double annealed_critical_point(const ConductanceLaw& law, double beta, int ell) {
  require_tree(ell);
  return std::log(ell - 1.0) + log_laplace(law, beta);
}

double annealed_slope(const ConductanceLaw& law, double beta) {
  return -tilted_moments(law, beta).mean;
}

double f_criterion(const ConductanceLaw& law, double beta, int ell) {
  require_tree(ell);
  const auto tm = tilted_moments(law, beta);
  return std::log(ell - 1.0) + tm.log_lambda + beta * tm.mean;
}

BetaCritical beta_c(const ConductanceLaw& law, int ell,
                    const BetaCriticalOptions& options) {
  require_branching(ell);
  BetaCritical out;
  auto f = [&](double b) { return f_criterion(law, b, ell); };
  double lo = 0.0;
  double hi = 1.0;
  while (true) {
    double value = 0.0;
    try {
      value = f(hi);
    } catch (const DomainError&) {
      out.transform_diverged = true;
      out.verified_weak_up_to = lo;
      return out;
    }
    if (value <= 0.0) break;
    lo = hi;
    if (hi >= options.ceiling) {
      out.verified_weak_up_to = hi;
      return out;
    }
    hi *= 2.0;
  }
  out.value = find_root(f, lo, hi, options.x_tolerance);
  out.verified_weak_up_to = *out.value;
  return out;
}

double log_r_theta(const ConductanceLaw& law, double beta, double theta,
                   int ell) {
  require_tree(ell);
  return annealed_critical_point(law, theta * beta, ell) -
         theta * annealed_critical_point(law, beta, ell);
}

double r_theta(const ConductanceLaw& law, double beta, double theta, int ell) {
  return std::exp(log_r_theta(law, beta, theta, ell));
}

LogRDerivatives log_r_derivatives(const ConductanceLaw& law, double beta,
                                  double theta, int ell) {
  const auto tm = tilted_moments(law, theta * beta);
  return {-beta * tm.mean - annealed_critical_point(law, beta, ell),
          beta * beta * tm.variance};
}

double theta_c(const ConductanceLaw& law, double beta, int ell) {
  const auto bc = beta_c(law, ell);
  if (!bc.finite()) {
    throw DomainError("beta_c is infinite for " + format_law(law) +
                      ": every beta is weak disorder, h_q = h_a");
  }
  if (beta < *bc.value) {
    throw DomainError("beta below beta_c (weak disorder): theta_c would exceed "
                      "1; use the weak branch h_q = h_a");
  }
  return *bc.value / beta;
}

double theta_c_numeric(const ConductanceLaw& law, double beta, int ell) {
  require_branching(ell);
  require_theta_window(law, beta);
  auto scaled = [&](double t) { return log_r_theta(law, beta, t, ell) / t; };
  return golden_section_minimize(scaled, kThetaFloor, 1.0, kThetaTolerance);
}

double log_r_minimizer(const ConductanceLaw& law, double beta, int ell) {
  require_branching(ell);
  require_theta_window(law, beta);
  auto log_r = [&](double t) { return log_r_theta(law, beta, t, ell); };
  return golden_section_minimize(log_r, 0.0, 1.0, kThetaTolerance);
}

std::optional<double> theta_1(const ConductanceLaw& law, double beta, int ell) {
  const auto bc = beta_c(law, ell);
  if (!bc.finite() || beta <= *bc.value) return std::nullopt;
  // log r(theta_c) = theta_c (h_q - h_a) < 0 and log r(0) = log(ell-1) > 0.
  const double upper = *bc.value / beta;
  auto log_r = [&](double t) { return log_r_theta(law, beta, t, ell); };
  if (log_r(upper) >= 0.0) return std::nullopt;
  return bisect(log_r, 0.0, upper, kThetaTolerance);
}

double quenched_critical_point(const ConductanceLaw& law, double beta, int ell) {
  const auto bc = beta_c(law, ell);
  if (!bc.finite() || beta <= *bc.value) {
    return annealed_critical_point(law, beta, ell);
  }
  return beta / *bc.value * annealed_critical_point(law, *bc.value, ell);
}

double fractional_moment_bound(const ConductanceLaw& law, double beta,
                               double theta, int n, int ell) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw DomainError("fractional moment bound needs theta in (0, 1]");
  }
  if (n < 0) throw DomainError("n must be >= 0");
  const double prefactor = (1.0 - theta) * std::log(ell / (ell - 1.0));
  return std::exp(prefactor + n * log_r_theta(law, beta, theta, ell));
}

namespace {

struct OverlapSums {
  double disjoint = 0.0;  // (ell-1)/ell
  double partial = 0.0;   // ((ell-2)/ell) sum_{k=1}^{n-1} r2^k
  double full = 0.0;      // r2^n
};

OverlapSums overlap_sums(const ConductanceLaw& law, double beta, int n,
                         int ell) {
  require_branching(ell);
  if (n < 1) throw DomainError("second moment needs n >= 1");
  const double log_r2 = log_r_theta(law, beta, 2.0, ell);
  CompensatedSum partial;
  for (int k = 1; k < n; ++k) partial.add(std::exp(k * log_r2));
  return {(ell - 1.0) / ell, (ell - 2.0) / ell * partial.value(),
          std::exp(n * log_r2)};
}

}  // namespace

double second_moment_closed_form(const ConductanceLaw& law, double beta, int n,
                                 int ell) {
  const auto s = overlap_sums(law, beta, n, ell);
  return s.disjoint + s.partial + (ell - 1.0) / ell * s.full;
}

double second_moment_overlap_only_form(const ConductanceLaw& law, double beta,
                                       int n, int ell) {
  const auto s = overlap_sums(law, beta, n, ell);
  return (ell - 1.0) / ell * (s.partial + s.full);
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::weak:
      return "weak";
    case Regime::critical:
      return "critical";
    case Regime::strong:
      return "strong";
  }
  return "?";
}

CriticalParams critical_params(const ConductanceLaw& law, double beta, int ell) {
  require_branching(ell);
  if (beta < 0.0) throw DomainError("beta must be >= 0");
  CriticalParams p;
  p.ell = ell;
  p.law = law;
  p.beta = beta;
  p.h_a = annealed_critical_point(law, beta, ell);
  p.f_value = f_criterion(law, beta, ell);
  p.beta_c = beta_c(law, ell);
  p.r2 = r_theta(law, beta, 2.0, ell);
  if (p.beta_c.finite()) {
    const double bc = *p.beta_c.value;
    p.regime = beta < bc ? Regime::weak
               : beta > bc ? Regime::strong
                           : Regime::critical;
    if (beta > 0.0 && beta >= bc) p.theta_c = bc / beta;
  }
  if (p.regime == Regime::strong) {
    p.theta_c_numeric = theta_c_numeric(law, beta, ell);
    p.log_r_minimizer = log_r_minimizer(law, beta, ell);
    p.theta_1 = theta_1(law, beta, ell);
  }
  p.h_q = quenched_critical_point(law, beta, ell);
  return p;
}

}  // namespace treepoly::theory
