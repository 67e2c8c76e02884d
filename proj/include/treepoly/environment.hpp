#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treepoly/conductance.hpp"

namespace treepoly {

/// Counter-based hashing used to realize the environment. A code's hash is a
/// left fold of `absorb` over its bytes starting from `seed_state(seed)`, so
/// a traversal can carry the prefix state down the tree and finish each edge
/// with one more absorb of the terminator byte.
namespace hashing {

inline constexpr std::uint8_t kTerminator = 0xFF;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t seed_state(std::uint64_t seed) {
  return mix64(seed ^ 0x6a09e667f3bcc909ULL);
}

constexpr std::uint64_t absorb(std::uint64_t state, std::uint8_t byte) {
  return mix64(state + (static_cast<std::uint64_t>(byte) + 1) *
                           0x9e3779b97f4a7c15ULL);
}

/// Maps 64 random bits to the open interval (0, 1) with 53-bit resolution.
constexpr double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace hashing

/// Independent child seed for replica `index` of a run keyed by `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return hashing::mix64(hashing::seed_state(master) ^
                        hashing::mix64(index + 0x3c6ef372fe94f82bULL));
}

/// Prefix-free byte encoding of an edge, identified with its endpoint farther
/// from the root: the child indices along the root-to-endpoint path followed
/// by a 0xFF terminator. Indices are < 255, so the terminator only ever
/// appears last.
class EdgeCode {
 public:
  /// `path[0]` must be in [0, ell); later entries in [0, ell - 1).
  /// Throws std::out_of_range for an empty path or an index out of range.
  static EdgeCode from_path(std::span<const int> path, int ell);

  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::size_t depth() const { return bytes_.size() - 1; }

  friend bool operator==(const EdgeCode&, const EdgeCode&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
};

inline EdgeCode edge_code(std::span<const int> path, int ell) {
  return EdgeCode::from_path(path, ell);
}

std::uint64_t hash_code(std::uint64_t seed, const EdgeCode& code);

/// A realization of the i.i.d. conductances on the degree-`ell` tree.
struct Environment {
  ConductanceLaw law;
  std::uint64_t seed = 0;
  int ell = 3;

  Environment(ConductanceLaw law_, std::uint64_t seed_, int ell_);
};

/// X_b for the edge with the given code: one hash, one inverse-CDF transform.
double sample_edge(const Environment& env, const EdgeCode& code);

}  // namespace treepoly
