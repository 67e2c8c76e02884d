#pragma once

#include <optional>
#include <string_view>

#include "treepoly/conductance.hpp"

/// Critical-point calculus for the directed polymer on the degree-ell tree
/// with i.i.d. edge conductances X and inverse temperature beta.
///
/// Notation used throughout: lambda_b = E[e^{-bX}], the annealed critical
/// point h_a(b) = log(ell - 1) + log lambda_b, the criterion
/// f(b) = h_a(b) - b h_a'(b) whose root is beta_c, and the fractional-moment
/// contraction factor log r(theta) = h_a(theta beta) - theta h_a(beta).
namespace treepoly::theory {

/// mu = ell - 1.
double connective_constant(int ell);

/// Number of n-step self-avoiding walks from a vertex: 1 for n = 0,
/// ell (ell-1)^{n-1} otherwise.
double saw_count(int ell, int n);
double log_saw_count(int ell, int n);

double annealed_critical_point(const ConductanceLaw& law, double beta, int ell);

/// d/dbeta h_a(beta) = -E[X e^{-beta X}] / lambda_beta.
double annealed_slope(const ConductanceLaw& law, double beta);

double f_criterion(const ConductanceLaw& law, double beta, int ell);

/// Search settings for beta_c. The bracket [0, B] starts at B = 1 and doubles
/// until f changes sign or B exceeds `ceiling`.
struct BetaCriticalOptions {
  double ceiling = 128.0;
  double x_tolerance = 1e-13;
};

struct BetaCritical {
  std::optional<double> value;  // empty: f > 0 on the whole search range
  double verified_weak_up_to = 0.0;
  bool transform_diverged = false;

  bool finite() const { return value.has_value(); }
};

BetaCritical beta_c(const ConductanceLaw& law, int ell,
                    const BetaCriticalOptions& options = {});

double log_r_theta(const ConductanceLaw& law, double beta, double theta,
                   int ell);
double r_theta(const ConductanceLaw& law, double beta, double theta, int ell);

struct LogRDerivatives {
  double first = 0.0;
  double second = 0.0;
};

LogRDerivatives log_r_derivatives(const ConductanceLaw& law, double beta,
                                  double theta, int ell);

/// beta_c / beta; requires beta >= beta_c (finite). Throws DomainError for
/// weak-disorder input, where the quenched critical point is h_a(beta).
double theta_c(const ConductanceLaw& law, double beta, int ell);

/// Numeric minimizer of (1/theta) log r(theta) over (0, 1] by golden-section
/// search. Independent of beta_c; agrees with theta_c in strong disorder.
double theta_c_numeric(const ConductanceLaw& law, double beta, int ell);

/// Minimizer of log r(theta) itself over [0, 1]. Differs from theta_c for
/// general laws; reported alongside it.
double log_r_minimizer(const ConductanceLaw& law, double beta, int ell);

/// Smaller zero of log r on (0, 1); empty unless beta > beta_c.
std::optional<double> theta_1(const ConductanceLaw& law, double beta, int ell);

/// h_a(beta) for beta <= beta_c, (beta / beta_c) h_a(beta_c) above.
double quenched_critical_point(const ConductanceLaw& law, double beta, int ell);

/// Upper bound (ell/(ell-1))^{1-theta} r(theta)^n on E[Z_n^theta].
double fractional_moment_bound(const ConductanceLaw& law, double beta,
                               double theta, int n, int ell);

/// E[Z_n^2] from the overlap decomposition of pairs of n-step walks:
///   (ell-1)/ell + ((ell-2)/ell) sum_{k=1}^{n-1} r(2)^k + ((ell-1)/ell) r(2)^n.
/// The three terms are pairs that split at the root, pairs sharing k edges,
/// and identical pairs.
double second_moment_closed_form(const ConductanceLaw& law, double beta, int n,
                                 int ell);

/// ((ell-1)/ell) [((ell-2)/ell) sum_{k=1}^{n-1} r(2)^k + r(2)^n]: the
/// overlap sum without the root-split pairs. Not an expectation of anything;
/// kept so reports can show its distance from the exhaustive value.
double second_moment_overlap_only_form(const ConductanceLaw& law, double beta,
                                       int n, int ell);

enum class Regime { weak, critical, strong };

std::string_view to_string(Regime regime);

struct CriticalParams {
  int ell = 3;
  ConductanceLaw law;
  double beta = 0.0;
  double h_a = 0.0;
  double f_value = 0.0;
  BetaCritical beta_c;
  std::optional<double> theta_c;           // beta > 0, beta >= beta_c
  std::optional<double> theta_c_numeric;   // strong disorder only
  std::optional<double> log_r_minimizer;   // strong disorder only
  std::optional<double> theta_1;           // strong disorder only
  double h_q = 0.0;
  double r2 = 0.0;
  Regime regime = Regime::weak;
};

CriticalParams critical_params(const ConductanceLaw& law, double beta, int ell);

}  // namespace treepoly::theory
