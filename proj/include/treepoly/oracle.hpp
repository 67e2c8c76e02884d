#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "treepoly/conductance.hpp"
#include "treepoly/environment.hpp"

/// Brute-force ground truth at tiny scale. Nothing here shares code with the
/// engine's traversal: walks are listed explicitly and every edge is sampled
/// through its EdgeCode.
namespace treepoly::oracle {

struct PathSet {
  int ell = 3;
  int n = 0;
  std::vector<std::vector<int>> paths;  // child-index sequences from the root
};

inline constexpr std::uint64_t kMaxPaths = 10'000'000;
inline constexpr std::uint64_t kMaxConfigurations = 10'000'000;

/// Every n-step self-avoiding walk from the root, in lexicographic order.
PathSet enumerate_saws(int ell, int n, std::uint64_t max_paths = kMaxPaths);

/// Direct summation of Z_n over enumerated walks, in path order with
/// compensated accumulation.
double naive_Zn(const Environment& env, double beta, int n);

struct MeanZn {};
struct SecondMoment {};
struct FractionalMoment {
  double theta = 0.5;
};
/// Indicator of {Z_n > threshold}.
struct Exceeds {
  double threshold = 0.0;
};

using Functional = std::variant<MeanZn, SecondMoment, FractionalMoment, Exceeds>;

/// E[F(Z_n)] for a finite-atom law by summing over every assignment of atoms
/// to the edges within depth n. Edges are ordered breadth-first (depth, then
/// child index); configurations run in mixed-radix order over that list.
/// Throws DomainError for continuous laws, BudgetExceeded above
/// `max_configurations`.
std::vector<double> exact_expectations(
    const ConductanceLaw& law, double beta, int ell, int n,
    std::span<const Functional> functionals,
    std::uint64_t max_configurations = kMaxConfigurations);

double exact_expectation(const ConductanceLaw& law, double beta, int ell, int n,
                         const Functional& functional,
                         std::uint64_t max_configurations = kMaxConfigurations);

/// Number of edges within depth n of the root.
std::uint64_t edges_within(int ell, int n);

}  // namespace treepoly::oracle
