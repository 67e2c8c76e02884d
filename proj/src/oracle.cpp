#include "treepoly/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "treepoly/errors.hpp"
#include "treepoly/numerics.hpp"

namespace treepoly::oracle {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t walk_count(int ell, int n) {
  if (n == 0) return 1;
  std::uint64_t count = static_cast<std::uint64_t>(ell);
  for (int i = 1; i < n; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / (ell - 1)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= static_cast<std::uint64_t>(ell - 1);
  }
  return count;
}

double apply(const Functional& functional, double z) {
  return std::visit(
      Overloaded{
          [&](const MeanZn&) { return z; },
          [&](const SecondMoment&) { return z * z; },
          [&](const FractionalMoment& f) { return std::pow(z, f.theta); },
          [&](const Exceeds& e) { return z > e.threshold ? 1.0 : 0.0; },
      },
      functional);
}

}  // namespace

PathSet enumerate_saws(int ell, int n, std::uint64_t max_paths) {
  if (ell < 2) throw std::invalid_argument("tree degree must be >= 2");
  if (n < 0) throw std::invalid_argument("walk length must be >= 0");
  const auto count = walk_count(ell, n);
  if (count > max_paths) {
    throw BudgetExceeded(std::to_string(count) + " walks exceed the limit of " +
                         std::to_string(max_paths));
  }
  PathSet out{ell, n, {}};
  out.paths.reserve(count);
  std::vector<int> path;
  // Recursive listing; depth is tiny by construction.
  auto extend = [&](auto&& self, int depth) -> void {
    if (depth == n) {
      out.paths.push_back(path);
      return;
    }
    const int children = depth == 0 ? ell : ell - 1;
    for (int c = 0; c < children; ++c) {
      path.push_back(c);
      self(self, depth + 1);
      path.pop_back();
    }
  };
  extend(extend, 0);
  return out;
}

double naive_Zn(const Environment& env, double beta, int n) {
  const auto walks = enumerate_saws(env.ell, n);
  CompensatedSum total;
  for (const auto& path : walks.paths) {
    double conductance = 0.0;
    for (std::size_t j = 1; j <= path.size(); ++j) {
      conductance += sample_edge(
          env, EdgeCode::from_path(std::span(path).first(j), env.ell));
    }
    total.add(std::exp(-beta * conductance));
  }
  const double normalization =
      static_cast<double>(walks.paths.size()) * std::pow(laplace(env.law, beta), n);
  return total.value() / normalization;
}

std::uint64_t edges_within(int ell, int n) {
  std::uint64_t total = 0;
  for (int d = 1; d <= n; ++d) total += walk_count(ell, d);
  return total;
}

std::vector<double> exact_expectations(const ConductanceLaw& law, double beta,
                                       int ell, int n,
                                       std::span<const Functional> functionals,
                                       std::uint64_t max_configurations) {
  if (atom_count(law) == 0) {
    throw DomainError("exhaustive expectation needs a finite-atom law");
  }
  if (n < 1) throw std::invalid_argument("exhaustive expectation needs n >= 1");
  const auto at = atoms(law);
  const std::size_t k = at.values.size();

  // Breadth-first edge list; each edge stores the index of its parent edge.
  std::vector<int> parent;
  std::vector<int> level_start{0};
  {
    std::vector<int> frontier{-1};
    for (int d = 0; d < n; ++d) {
      std::vector<int> next;
      const int children = d == 0 ? ell : ell - 1;
      for (int p : frontier) {
        for (int c = 0; c < children; ++c) {
          next.push_back(static_cast<int>(parent.size()));
          parent.push_back(p);
        }
      }
      frontier = std::move(next);
      level_start.push_back(static_cast<int>(parent.size()));
    }
  }
  const std::size_t edges = parent.size();
  double configurations = std::pow(static_cast<double>(k), static_cast<double>(edges));
  if (configurations > static_cast<double>(max_configurations)) {
    throw BudgetExceeded(std::to_string(k) + "^" + std::to_string(edges) +
                         " environment configurations exceed the limit of " +
                         std::to_string(max_configurations));
  }

  // Each depth-n walk as its list of edges, root side first.
  std::vector<std::vector<int>> walks;
  for (int e = level_start[static_cast<std::size_t>(n - 1)];
       e < level_start[static_cast<std::size_t>(n)]; ++e) {
    std::vector<int> walk;
    for (int cur = e; cur >= 0; cur = parent[static_cast<std::size_t>(cur)]) {
      walk.insert(walk.begin(), cur);
    }
    walks.push_back(std::move(walk));
  }

  double lambda = 0.0;
  std::vector<double> weight(k);
  for (std::size_t i = 0; i < k; ++i) {
    weight[i] = std::exp(-beta * at.values[i]);
    lambda += at.probs[i] * weight[i];
  }
  const double normalization =
      static_cast<double>(walks.size()) * std::pow(lambda, n);

  std::vector<CompensatedSum> sums(functionals.size());
  std::vector<std::size_t> digit(edges, 0);
  while (true) {
    double probability = 1.0;
    for (std::size_t e = 0; e < edges; ++e) probability *= at.probs[digit[e]];
    if (probability > 0.0) {
      double total = 0.0;
      for (const auto& walk : walks) {
        double w = 1.0;
        for (int e : walk) w *= weight[digit[static_cast<std::size_t>(e)]];
        total += w;
      }
      const double z = total / normalization;
      for (std::size_t f = 0; f < functionals.size(); ++f) {
        sums[f].add(probability * apply(functionals[f], z));
      }
    }
    // Mixed-radix increment; the first edge is the fastest digit.
    std::size_t e = 0;
    while (e < edges && ++digit[e] == k) digit[e++] = 0;
    if (e == edges) break;
  }
  std::vector<double> out;
  for (const auto& s : sums) out.push_back(s.value());
  return out;
}

double exact_expectation(const ConductanceLaw& law, double beta, int ell, int n,
                         const Functional& functional,
                         std::uint64_t max_configurations) {
  return exact_expectations(law, beta, ell, n, std::span(&functional, 1),
                            max_configurations)[0];
}

}  // namespace treepoly::oracle
