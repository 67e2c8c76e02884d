#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treepoly/conductance.hpp"
#include "treepoly/environment.hpp"

namespace treepoly::engine {

/// root: walks from the tree root x (ell children at the root, ell - 1 below).
/// forward: walks from a neighbor y of x that never return to x; every
/// vertex has ell - 1 children.
enum class TreeMode { root, forward };

struct EngineOptions {
  std::uint64_t work_budget = std::uint64_t{1} << 31;  // edge visits
  int split_depth = 4;  // subtrees below this depth are independent tasks
  unsigned threads = 1;
};

/// Partition functions along one environment. For n >= 1,
///   root:    Z_n = U_n / (c_n lambda^n),        c_n = ell (ell-1)^{n-1}
///   forward: Z_n = U_n / ((ell-1)^n lambda^n)
/// where U_n = sum over n-step walks of e^{-beta * (sum of conductances)}.
struct ZnProfile {
  int ell = 3;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int depth = 0;
  TreeMode mode = TreeMode::root;
  std::vector<double> z;
  std::vector<double> log_unnormalized;  // log U_n
  std::vector<double> free_energy;       // log U_n / n; NaN at n = 0
};

/// Number of edges a depth-`depth` traversal visits (saturates at 2^64 - 1).
std::uint64_t edge_visits(int ell, int depth, TreeMode mode);

/// Exact depth-first evaluation. Deterministic: the task split and the
/// reduction order depend only on `split_depth`, never on `threads`.
/// Throws BudgetExceeded or DomainError (lambda_beta divergent).
ZnProfile compute_profile(const Environment& env, double beta, int depth,
                          TreeMode mode = TreeMode::root,
                          const EngineOptions& options = {});

/// Forward-tree profile below the vertex reached by `anchor` (child indices
/// from the root, as for EdgeCode). compute_profile(..., forward) uses
/// anchor {0}.
ZnProfile compute_forward_profile(const Environment& env, double beta,
                                  int depth, std::span<const int> anchor,
                                  const EngineOptions& options = {});

/// Partial sums of the quenched susceptibility
///   S_N = sum_{n<=N} c_n lambda^n e^{-h n} Z_n = sum_{n<=N} e^{-h n} U_n.
struct Susceptibility {
  double h = 0.0;
  std::vector<double> log_terms;
  std::vector<double> partial_sums;
  double tail_ratio = 0.0;       // last term / previous term
  double tail_estimate = 0.0;    // geometric tail beyond N; +inf if ratio >= 1
  int nondecreasing_run = 0;     // trailing run of non-decreasing terms
  bool diverging = false;        // nondecreasing_run >= kDivergenceRun

  static constexpr int kDivergenceRun = 10;
};

Susceptibility susceptibility(const ZnProfile& profile, double h);
Susceptibility susceptibility(const Environment& env, double beta, double h,
                              int n_max, const EngineOptions& options = {});

/// log U_N / N, the finite-depth estimate of the quenched critical point.
double free_energy(const Environment& env, double beta, int depth,
                   const EngineOptions& options = {});

struct PoolOptions {
  std::size_t pool_size = 100000;
  int generations = 50;
  std::uint64_t seed = 1;
  double vanishing_threshold = 1e-12;
};

struct PoolSummary {
  std::size_t pool_size = 0;
  int generations = 0;
  double mean = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double fraction_below = 0.0;  // fraction below vanishing_threshold
  bool degenerate = false;      // every particle is exactly 0
};

/// Particle approximation of the forward-tree recursion in distribution,
///   Z'_n = sum_{i < ell-1} e^{-beta X_i} / ((ell-1) lambda) Z'_{n-1,i},
/// with the Z'_{n-1,i} drawn uniformly from the previous pool.
PoolSummary population_dynamics(const ConductanceLaw& law, double beta,
                                int ell, const PoolOptions& options);

}  // namespace treepoly::engine
