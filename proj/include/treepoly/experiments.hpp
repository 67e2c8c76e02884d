#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treepoly/conductance.hpp"
#include "treepoly/report.hpp"

/// Monte Carlo studies over many independent environments. Replica r uses
/// the environment seed derive_seed(seed, r); replicas run in parallel and
/// are reduced in replica order, so every report is bit-identical for any
/// thread count.
namespace treepoly::experiments {

struct McSetup {
  ConductanceLaw law;
  double beta = 1.0;
  int ell = 3;
  int depth = 10;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint64_t work_budget = std::uint64_t{1} << 31;
  int split_depth = 4;
};

inline constexpr std::size_t kMinReplicas = 100;

/// Z_0..Z_depth and log U_0..log U_depth for every replica.
struct ReplicaBatch {
  McSetup setup;
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> log_unnormalized;
};

ReplicaBatch draw_replicas(const McSetup& setup);

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double std_error = 0.0;
};

SampleStats sample_stats(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Weighted least squares of y on x with weights 1 / y_se^2.
LinearFit weighted_fit(std::span<const double> x, std::span<const double> y,
                       std::span<const double> y_se);

/// Sample means of Z_n^theta against (ell/(ell-1))^{1-theta} r(theta)^n,
/// plus the fitted decay rate of log E[Z_n^theta] against log r(theta).
/// Needs >= 1000 replicas.
ExperimentReport mc_fractional_moment(const ReplicaBatch& batch, double theta,
                                      std::span<const int> n_list);

/// Sample means of Z_n^2 against the closed-form second moment and the
/// fitted growth rate against log r(2).
ExperimentReport mc_second_moment(const ReplicaBatch& batch,
                                  std::span<const int> n_list);

/// Empirical P(Z_n > (r(theta_c) - eps)^{n / theta_c}). Strong disorder only.
ExperimentReport survival_probability(const ReplicaBatch& batch, double eps,
                                      std::span<const int> n_list,
                                      double floor = 0.01);

/// eps = r(theta_c) / 2 for the batch's instance.
double default_survival_eps(const ConductanceLaw& law, double beta, int ell);

/// Critical-point table over an increasing beta grid.
ExperimentReport phase_scan(const ConductanceLaw& law, int ell,
                            std::span<const double> beta_grid);

/// Free-energy estimates log U_n / n at n = depth/2 and n = depth against h_q.
ExperimentReport quenched_point_estimate(const ReplicaBatch& batch);

struct WeakExponentOptions {
  int exact_depth = 20;       // deepest exactly enumerated level
  double horizon = 30.0;      // series truncated at N = ceil(horizon / delta)
  unsigned threads = 1;
  std::uint64_t work_budget = std::uint64_t{1} << 31;
  int split_depth = 4;
};

/// (h - h_a) S_N(h = h_a + delta) over a delta grid on one environment.
/// Terms up to exact_depth are exact; beyond it Z_n is replaced by the last
/// exact value Z_{exact_depth} (weak disorder: Z_n -> Z_inf > 0) and the
/// geometric remainder is summed in closed form. Rows record both parts.
ExperimentReport weak_exponent_check(const ConductanceLaw& law, double beta,
                                     int ell, std::span<const double> delta_grid,
                                     std::uint64_t seed,
                                     const WeakExponentOptions& options = {});

}  // namespace treepoly::experiments
