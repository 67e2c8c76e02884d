#include "treepoly/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "treepoly/errors.hpp"
#include "treepoly/numerics.hpp"
#include "treepoly/parallel.hpp"
#include "treepoly/theory.hpp"
#include "treepoly/weights.hpp"

namespace treepoly::engine {

namespace {

using hashing::absorb;
using hashing::kTerminator;
using hashing::to_unit_open;

struct Vertex {
  std::uint64_t state = 0;  // hash prefix state of the vertex path
  double mantissa = 1.0;    // path weight = mantissa * 2^exponent
  int exponent = 0;
};

inline void renormalize(double& mantissa, int& exponent) {
  if (mantissa > ScaledSum::kHigh || mantissa < ScaledSum::kLow) {
    if (mantissa == 0.0) return;
    int shift = 0;
    mantissa = std::frexp(mantissa, &shift);
    exponent += shift;
  }
}

template <class Sampler>
inline auto edge_weight(const Sampler& sample, std::uint64_t child_state) {
  return sample(to_unit_open(absorb(child_state, kTerminator)));
}

inline Vertex child_of(const Vertex& parent, std::uint64_t state, double w) {
  Vertex child{state, parent.mantissa * w, parent.exponent};
  renormalize(child.mantissa, child.exponent);
  return child;
}

inline Vertex child_of(const Vertex& parent, std::uint64_t state, WideWeight w) {
  Vertex child{state, parent.mantissa * w.mantissa, parent.exponent + w.exponent};
  renormalize(child.mantissa, child.exponent);
  return child;
}

// Adds the weights of every descendant of `top` down to `max_depth` into
// acc[depth]. `top` itself sits at `top_depth` and is not counted. Every
// vertex below the top has `arity` children.
template <class Sampler>
void accumulate_subtree(const Sampler& sample, int arity, const Vertex& top,
                        int top_depth, int max_depth,
                        std::vector<ScaledSum>& acc) {
  if (top_depth >= max_depth) return;
  struct Frame {
    Vertex v;
    int next_child;
  };
  std::vector<Frame> stack(static_cast<std::size_t>(max_depth - top_depth));
  int sp = 0;
  stack[0] = {top, 0};
  const int last_inner = max_depth - 1;
  while (sp >= 0) {
    Frame& frame = stack[static_cast<std::size_t>(sp)];
    const int depth = top_depth + sp;
    if (depth == last_inner) {
      auto& leaf = acc[static_cast<std::size_t>(max_depth)];
      if constexpr (std::is_same_v<decltype(edge_weight(sample, 0)), double>) {
        double sum = 0.0;
        for (int c = 0; c < arity; ++c) {
          sum += edge_weight(sample, absorb(frame.v.state, static_cast<std::uint8_t>(c)));
        }
        leaf.add(frame.v.mantissa * sum, frame.v.exponent);
      } else {
        for (int c = 0; c < arity; ++c) {
          const auto w =
              edge_weight(sample, absorb(frame.v.state, static_cast<std::uint8_t>(c)));
          leaf.add(frame.v.mantissa * w.mantissa, frame.v.exponent + w.exponent);
        }
      }
      --sp;
      continue;
    }
    if (frame.next_child == arity) {
      --sp;
      continue;
    }
    const int c = frame.next_child++;
    const auto state = absorb(frame.v.state, static_cast<std::uint8_t>(c));
    const Vertex child = child_of(frame.v, state, edge_weight(sample, state));
    acc[static_cast<std::size_t>(depth + 1)].add(child.mantissa, child.exponent);
    stack[static_cast<std::size_t>(++sp)] = {child, 0};
  }
}

template <class Sampler>
std::vector<ScaledSum> unnormalized_sums(const Sampler& sample, int ell,
                                         TreeMode mode,
                                         std::uint64_t anchor_state, int depth,
                                         const EngineOptions& options) {
  std::vector<ScaledSum> acc(static_cast<std::size_t>(depth + 1));
  acc[0].add(1.0, 0);
  if (depth == 0) return acc;

  const int arity = ell - 1;
  const int split = std::clamp(options.split_depth, 1, depth);

  // Breadth-first expansion of the first `split` levels, in child order.
  std::vector<Vertex> frontier{Vertex{anchor_state, 1.0, 0}};
  for (int d = 0; d < split; ++d) {
    const int children = (mode == TreeMode::root && d == 0) ? ell : arity;
    std::vector<Vertex> next;
    next.reserve(frontier.size() * static_cast<std::size_t>(children));
    for (const auto& v : frontier) {
      for (int c = 0; c < children; ++c) {
        const auto state = absorb(v.state, static_cast<std::uint8_t>(c));
        const Vertex child = child_of(v, state, edge_weight(sample, state));
        acc[static_cast<std::size_t>(d + 1)].add(child.mantissa, child.exponent);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  if (split == depth) return acc;

  std::vector<std::vector<ScaledSum>> partial(frontier.size());
  parallel_for(frontier.size(), options.threads, [&](std::size_t i) {
    partial[i].assign(static_cast<std::size_t>(depth + 1), ScaledSum{});
    accumulate_subtree(sample, arity, frontier[i], split, depth, partial[i]);
  });
  for (const auto& p : partial) {
    for (int d = split + 1; d <= depth; ++d) {
      acc[static_cast<std::size_t>(d)].add(p[static_cast<std::size_t>(d)]);
    }
  }
  return acc;
}

void check_budget(int ell, int depth, TreeMode mode,
                  const EngineOptions& options) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  const auto visits = edge_visits(ell, depth, mode);
  if (visits > options.work_budget) {
    throw BudgetExceeded("depth " + std::to_string(depth) + " on the degree-" +
                         std::to_string(ell) + " tree needs " +
                         std::to_string(visits) + " edge visits; budget is " +
                         std::to_string(options.work_budget));
  }
}

ZnProfile build_profile(const Environment& env, double beta, int depth,
                        TreeMode mode, std::uint64_t anchor_state,
                        const EngineOptions& options) {
  check_budget(env.ell, depth, mode, options);
  const double log_lambda = log_laplace(env.law, beta);  // throws if divergent
  double shift = 0.0;
  const auto acc = with_shifted_sampler(
      env.law, beta, [&](const auto& sampler, double s) {
        shift = s;
        return unnormalized_sums(sampler, env.ell, mode, anchor_state, depth,
                                 options);
      });

  ZnProfile out;
  out.ell = env.ell;
  out.beta = beta;
  out.seed = env.seed;
  out.depth = depth;
  out.mode = mode;
  out.z.resize(static_cast<std::size_t>(depth + 1));
  out.log_unnormalized.resize(out.z.size());
  out.free_energy.resize(out.z.size());
  const double log_arity = std::log(env.ell - 1.0);
  double forward_count = 1.0;
  for (int n = 0; n <= depth; ++n) {
    const auto i = static_cast<std::size_t>(n);
    double log_count = 0.0;
    if (mode == TreeMode::root) {
      log_count = theory::log_saw_count(env.ell, n);
    } else {
      log_count = forward_count < 0x1.0p53 ? std::log(forward_count) : n * log_arity;
      forward_count *= env.ell - 1.0;
    }
    // Each of the n edges of a path carries a factor e^{-shift}.
    const double log_sum = acc[i].log();
    out.log_unnormalized[i] = log_sum + n * shift;
    out.z[i] = n == 0 ? 1.0
                      : std::exp((log_sum - log_count) + n * (shift - log_lambda));
    out.free_energy[i] = n == 0 ? std::numeric_limits<double>::quiet_NaN()
                                : out.log_unnormalized[i] / n;
  }
  return out;
}

}  // namespace

std::uint64_t edge_visits(int ell, int depth, TreeMode mode) {
  if (ell < 2) throw std::invalid_argument("tree degree must be >= 2");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (int d = 0; d < depth; ++d) {
    const std::uint64_t factor =
        (mode == TreeMode::root && d == 0) ? ell : static_cast<std::uint64_t>(ell - 1);
    if (level > kMax / factor) return kMax;
    level *= factor;
    if (total > kMax - level) return kMax;
    total += level;
  }
  return total;
}

ZnProfile compute_profile(const Environment& env, double beta, int depth,
                          TreeMode mode, const EngineOptions& options) {
  if (mode == TreeMode::forward) {
    const int anchor[] = {0};
    return compute_forward_profile(env, beta, depth, anchor, options);
  }
  return build_profile(env, beta, depth, mode, hashing::seed_state(env.seed),
                       options);
}

ZnProfile compute_forward_profile(const Environment& env, double beta,
                                  int depth, std::span<const int> anchor,
                                  const EngineOptions& options) {
  // Validates the anchor exactly as an edge code would.
  const auto code = EdgeCode::from_path(anchor, env.ell);
  std::uint64_t state = hashing::seed_state(env.seed);
  for (auto byte : code.bytes().first(code.depth())) {
    state = hashing::absorb(state, byte);
  }
  return build_profile(env, beta, depth, TreeMode::forward, state, options);
}

Susceptibility susceptibility(const ZnProfile& profile, double h) {
  if (profile.mode != TreeMode::root) {
    throw std::invalid_argument("susceptibility is defined from the tree root");
  }
  Susceptibility out;
  out.h = h;
  CompensatedSum running;
  for (int n = 0; n <= profile.depth; ++n) {
    const double log_term =
        profile.log_unnormalized[static_cast<std::size_t>(n)] - h * n;
    out.log_terms.push_back(log_term);
    running.add(std::exp(log_term));
    out.partial_sums.push_back(running.value());
  }
  const auto& t = out.log_terms;
  for (std::size_t n = t.size() - 1; n >= 1; --n) {
    // Non-decreasing up to rounding in the last bits.
    if (t[n] - t[n - 1] < -1e-12) break;
    ++out.nondecreasing_run;
  }
  out.diverging = out.nondecreasing_run >= Susceptibility::kDivergenceRun;
  if (t.size() >= 2) {
    out.tail_ratio = std::exp(t.back() - t[t.size() - 2]);
    out.tail_estimate = out.tail_ratio < 1.0
                            ? std::exp(t.back()) * out.tail_ratio /
                                  (1.0 - out.tail_ratio)
                            : std::numeric_limits<double>::infinity();
  }
  return out;
}

Susceptibility susceptibility(const Environment& env, double beta, double h,
                              int n_max, const EngineOptions& options) {
  return susceptibility(compute_profile(env, beta, n_max, TreeMode::root, options),
                        h);
}

double free_energy(const Environment& env, double beta, int depth,
                   const EngineOptions& options) {
  if (depth < 1) throw std::invalid_argument("free energy needs depth >= 1");
  return compute_profile(env, beta, depth, TreeMode::root, options)
      .free_energy[static_cast<std::size_t>(depth)];
}

PoolSummary population_dynamics(const ConductanceLaw& law, double beta,
                                int ell, const PoolOptions& options) {
  if (ell < 2) throw std::invalid_argument("tree degree must be >= 2");
  if (options.pool_size < 1000 || options.generations < 1) {
    throw std::invalid_argument("population dynamics needs M >= 1000, G >= 1");
  }
  const std::size_t m = options.pool_size;
  const int arity = ell - 1;
  const double scale = 1.0 / (arity * laplace(law, beta));

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::vector<double> pool(m, 1.0);
  std::vector<double> next(m);

  with_weight_sampler(law, beta, [&](const auto& sampler) {
    for (int g = 0; g < options.generations; ++g) {
      for (std::size_t i = 0; i < m; ++i) {
        double value = 0.0;
        for (int j = 0; j < arity; ++j) {
          const double w = sampler(hashing::to_unit_open(rng()));
          value += w * scale * pool[pick(rng)];
        }
        next[i] = value;
      }
      pool.swap(next);
    }
    return 0;
  });

  PoolSummary out;
  out.pool_size = m;
  out.generations = options.generations;
  CompensatedSum total;
  std::size_t below = 0;
  bool all_zero = true;
  for (double v : pool) {
    total.add(v);
    if (v < options.vanishing_threshold) ++below;
    if (v != 0.0) all_zero = false;
  }
  out.mean = total.value() / static_cast<double>(m);
  out.fraction_below = static_cast<double>(below) / static_cast<double>(m);
  out.degenerate = all_zero;
  auto quantile_at = [&](double q) {
    auto k = static_cast<std::size_t>(q * static_cast<double>(m - 1));
    std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k),
                     pool.end());
    return pool[k];
  };
  out.median = quantile_at(0.5);
  out.q10 = quantile_at(0.1);
  out.q90 = quantile_at(0.9);
  return out;
}

}  // namespace treepoly::engine
