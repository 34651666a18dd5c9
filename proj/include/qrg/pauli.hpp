#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "qrg/small_matrix.hpp"

namespace qrg {

enum class Axis { x, y, z };

// Product basis ordering: site 1 is the most significant factor and
// |↑⟩ = index 0, so two sites read (↑↑, ↑↓, ↓↑, ↓↓).
inline constexpr std::size_t kMaxPauliSites = 4;

namespace detail {

inline SmallMatrix single_site(Axis axis) {
  switch (axis) {
    case Axis::x:
      return SmallMatrix(2, {0.0, 1.0, 1.0, 0.0});
    case Axis::z:
      return SmallMatrix(2, {1.0, 0.0, 0.0, -1.0});
    case Axis::y:
      // i·σʸ, which is real.
      return SmallMatrix(2, {0.0, 1.0, -1.0, 0.0});
  }
  throw std::invalid_argument("pauli: unknown axis");
}

}  // namespace detail

/// I ⊗ … ⊗ σ^axis ⊗ … ⊗ I with the Pauli factor at 1-based position `site`.
///
/// σʸ is imaginary; for Axis::y the real matrix i·σʸ is returned instead, so
/// σʸ_a σʸ_b = −pauli(y, a)·pauli(y, b). The only place σʸ enters this library
/// is the spin flip σʸ⊗σʸ, which is real.
inline SmallMatrix pauli(Axis axis, std::size_t site, std::size_t n_sites) {
  if (n_sites == 0 || n_sites > kMaxPauliSites)
    throw std::out_of_range("pauli: n_sites must be in [1, " + std::to_string(kMaxPauliSites) + "]");
  if (site < 1 || site > n_sites)
    throw std::out_of_range("pauli: site " + std::to_string(site) + " outside [1, " +
                            std::to_string(n_sites) + "]");
  SmallMatrix out = SmallMatrix::identity(1);
  for (std::size_t s = 1; s <= n_sites; ++s)
    out = kron(out, s == site ? detail::single_site(axis) : SmallMatrix::identity(2));
  return out;
}

/// σʸ ⊗ σʸ on two sites (real): antidiag(−1, 1, 1, −1).
inline SmallMatrix sigma_yy() { return -1.0 * (pauli(Axis::y, 1, 2) * pauli(Axis::y, 2, 2)); }

}  // namespace qrg
