#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrg/block.hpp"
#include "qrg/jacobi.hpp"
#include "qrg/pauli.hpp"
#include "qrg/small_matrix.hpp"
#include "qrg/two_qubit.hpp"

namespace qrg {

/// Square roots of the spectrum of ρ·ρ̃, descending.
struct ConcurrenceSpectrum {
  std::array<double, 4> lambdas{};

  double concurrence() const { return std::max(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3], 0.0); }
};

/// ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ); ρ is real here so ρ* = ρ.
inline DensityMatrix4 spin_flip(const DensityMatrix4& rho) {
  static const SmallMatrix yy = sigma_yy();
  return DensityMatrix4(yy * rho.matrix() * yy);
}

/// Eigenvalues of ρ below this are treated as an invalid (non-PSD) input;
/// those between it and zero are rounding noise and get clipped.
inline constexpr double kNegativeEigenvalueTol = 1e-10;

/// The spectrum is taken from the symmetric factorization ρ = W·Wᵀ,
/// W = Q·√Λ: the eigenvalues of ρ·ρ̃ are the squared eigenvalues of the
/// symmetric matrix T = Wᵀ·Y·W (Y = σʸ⊗σʸ). Working with |eig(T)| keeps
/// the small λ's at the rounding level instead of √ε.
inline ConcurrenceSpectrum concurrence_spectrum(const DensityMatrix4& rho) {
  static const SmallMatrix yy = sigma_yy();
  const auto eig = diagonalize_symmetric(rho.matrix());

  SmallMatrix w(4);
  for (std::size_t k = 0; k < 4; ++k) {
    const double mu = eig[k].value;
    if (mu < -kNegativeEigenvalueTol)
      throw std::domain_error("concurrence: density matrix has eigenvalue " + std::to_string(mu) +
                              " (not positive semidefinite)");
    const double root = std::sqrt(std::max(mu, 0.0));
    for (std::size_t i = 0; i < 4; ++i) w(i, k) = eig[k].vector[i] * root;
  }

  SmallMatrix t = w.transposed() * yy * w;
  // Symmetrize away rounding asymmetry before the symmetric solve.
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = r + 1; c < 4; ++c) t(r, c) = t(c, r) = 0.5 * (t(r, c) + t(c, r));

  ConcurrenceSpectrum spec;
  const auto teig = diagonalize_symmetric(t);
  for (std::size_t k = 0; k < 4; ++k) spec.lambdas[k] = std::abs(teig[k].value);
  std::sort(spec.lambdas.begin(), spec.lambdas.end(), std::greater<>{});
  return spec;
}

/// max(λ₁ - λ₂ - λ₃ - λ₄, 0).
inline double concurrence_mixed(const DensityMatrix4& rho) { return concurrence_spectrum(rho).concurrence(); }

/// 2|ad - bc| for a|↑↑⟩ + b|↑↓⟩ + c|↓↑⟩ + d|↓↓⟩.
inline double concurrence_pure(const TwoQubitState& s) {
  if (!s.is_normalized()) throw std::invalid_argument("concurrence_pure: state is not normalized");
  return 2.0 * std::abs(s[0] * s[3] - s[1] * s[2]);
}

enum class DoubletCombination { even, odd };

/// Equal-weight combination (psi0 ± psi1)/√2 of the block ground doublet.
/// The even one is the symmetry-unbroken block ground state and is the state
/// whose concurrence is renormalized; the odd one has the same concurrence.
inline TwoQubitState block_pure_state(const Coupling& c, DoubletCombination which = DoubletCombination::even) {
  const auto d = ground_doublet(c);
  const double sign = which == DoubletCombination::even ? 1.0 : -1.0;
  TwoQubitState s;
  for (std::size_t i = 0; i < 4; ++i) s[i] = (d.psi0[i] + sign * d.psi1[i]) / std::sqrt(2.0);
  return normalized(s);
}

/// Concurrence of the renormalized two-site block at field ratio g.
inline double block_concurrence(double g) { return concurrence_pure(block_pure_state(Coupling(1.0, g))); }

// Chain states are bit coded: bit i of the basis index is site i (0-based),
// bit set = ↑. Reduced matrices come back in the two-site order
// (↑↑, ↑↓, ↓↑, ↓↓) with `keep_a` as the first site.

namespace detail {

inline void check_pair(std::size_t n_sites, std::size_t a, std::size_t b) {
  if (n_sites < 2 || n_sites > 30) throw std::invalid_argument("partial_trace: n_sites must be in [2, 30]");
  if (a >= n_sites || b >= n_sites)
    throw std::out_of_range("partial_trace: kept site index out of range");
  if (a == b) throw std::invalid_argument("partial_trace: kept sites must be distinct");
}

// Basis index of (local pair state, rest) where rest has bits a and b cleared.
inline std::size_t with_pair(std::size_t rest, std::size_t local, std::size_t a, std::size_t b) {
  const bool a_up = (local & 2u) == 0;
  const bool b_up = (local & 1u) == 0;
  return rest | (a_up ? std::size_t{1} << a : 0) | (b_up ? std::size_t{1} << b : 0);
}

}  // namespace detail

/// Reduced density matrix of sites (keep_a, keep_b) from a pure chain state.
/// The result is normalized by ⟨ψ|ψ⟩.
inline DensityMatrix4 partial_trace(std::span<const double> state, std::size_t n_sites, std::size_t keep_a,
                                    std::size_t keep_b) {
  detail::check_pair(n_sites, keep_a, keep_b);
  const std::size_t dim = std::size_t{1} << n_sites;
  if (state.size() != dim) throw std::invalid_argument("partial_trace: state length is not 2^n_sites");

  const std::size_t pair_mask = (std::size_t{1} << keep_a) | (std::size_t{1} << keep_b);
  SmallMatrix rho(4);
  std::array<double, 4> local{};
  for (std::size_t rest = 0; rest < dim; ++rest) {
    if (rest & pair_mask) continue;
    for (std::size_t l = 0; l < 4; ++l) local[l] = state[detail::with_pair(rest, l, keep_a, keep_b)];
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) rho(r, c) += local[r] * local[c];
  }
  const double tr = rho.trace();
  if (!(tr > 0.0)) throw std::invalid_argument("partial_trace: zero state");
  rho *= 1.0 / tr;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = r + 1; c < 4; ++c) rho(c, r) = rho(r, c);
  return DensityMatrix4(std::move(rho));
}

/// Same contraction for a full 2^n × 2^n row-major density matrix.
inline DensityMatrix4 partial_trace_density(std::span<const double> rho_full, std::size_t n_sites,
                                            std::size_t keep_a, std::size_t keep_b) {
  detail::check_pair(n_sites, keep_a, keep_b);
  const std::size_t dim = std::size_t{1} << n_sites;
  if (rho_full.size() != dim * dim) throw std::invalid_argument("partial_trace: matrix size is not 4^n_sites");

  const std::size_t pair_mask = (std::size_t{1} << keep_a) | (std::size_t{1} << keep_b);
  SmallMatrix rho(4);
  for (std::size_t rest = 0; rest < dim; ++rest) {
    if (rest & pair_mask) continue;
    for (std::size_t r = 0; r < 4; ++r) {
      const std::size_t row = detail::with_pair(rest, r, keep_a, keep_b);
      for (std::size_t c = 0; c < 4; ++c) rho(r, c) += rho_full[row * dim + detail::with_pair(rest, c, keep_a, keep_b)];
    }
  }
  const double tr = rho.trace();
  if (!(tr > 0.0)) throw std::invalid_argument("partial_trace: zero trace");
  rho *= 1.0 / tr;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = r + 1; c < 4; ++c) rho(r, c) = rho(c, r) = 0.5 * (rho(r, c) + rho(c, r));
  return DensityMatrix4(std::move(rho));
}

}  // namespace qrg
