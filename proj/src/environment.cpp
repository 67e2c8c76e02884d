#include "treepoly/environment.hpp"

#include <stdexcept>
#include <string>

namespace treepoly {

EdgeCode EdgeCode::from_path(std::span<const int> path, int ell) {
  if (ell < 2 || ell > 255) {
    throw std::out_of_range("tree degree must be in [2, 255]");
  }
  if (path.empty()) {
    throw std::out_of_range("the root has no parent edge");
  }
  EdgeCode code;
  code.bytes_.reserve(path.size() + 1);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const int limit = i == 0 ? ell : ell - 1;
    if (path[i] < 0 || path[i] >= limit) {
      throw std::out_of_range("child index " + std::to_string(path[i]) +
                              " at depth " + std::to_string(i + 1) +
                              " outside [0, " + std::to_string(limit) + ")");
    }
    code.bytes_.push_back(static_cast<std::uint8_t>(path[i]));
  }
  code.bytes_.push_back(hashing::kTerminator);
  return code;
}

std::uint64_t hash_code(std::uint64_t seed, const EdgeCode& code) {
  std::uint64_t state = hashing::seed_state(seed);
  for (auto byte : code.bytes()) state = hashing::absorb(state, byte);
  return state;
}

Environment::Environment(ConductanceLaw law_, std::uint64_t seed_, int ell_)
    : law(std::move(law_)), seed(seed_), ell(ell_) {
  validate(law);
  if (ell < 2 || ell > 255) {
    throw std::out_of_range("tree degree must be in [2, 255]");
  }
}

double sample_edge(const Environment& env, const EdgeCode& code) {
  return quantile(env.law, hashing::to_unit_open(hash_code(env.seed, code)));
}

}  // namespace treepoly
