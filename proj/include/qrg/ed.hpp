#pragma once

// Exact reference for the full periodic/open transverse-field Ising chain:
// matrix-free Hamiltonian, ground state by dense solve or Lanczos inside the
// spin-flip-even sector, and the Jordan-Wigner free-fermion energy.
//
// Basis states are bit coded: bit i is site i (0-based), bit set = ↑.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrg/block.hpp"
#include "qrg/concurrence.hpp"
#include "qrg/small_matrix.hpp"

namespace qrg {

enum class Boundary { periodic, open };

inline constexpr std::size_t kMaxChainSites = 12;
inline constexpr std::size_t kMaxDenseSites = 10;

struct ChainSpec {
  std::size_t n_sites;
  Coupling coupling;
  Boundary boundary = Boundary::periodic;

  ChainSpec(std::size_t n, Coupling c, Boundary b = Boundary::periodic) : n_sites(n), coupling(c), boundary(b) {
    if (n < 2 || n > kMaxChainSites || n % 2 != 0)
      throw std::invalid_argument("ChainSpec: n_sites must be even and in [2, " + std::to_string(kMaxChainSites) + "]");
  }

  std::size_t dim() const { return std::size_t{1} << n_sites; }
};

struct ChainState {
  std::size_t n_sites = 0;
  std::vector<double> amplitudes;
  double energy = 0.0;
  double gap = 0.0;  ///< to the next level in the spin-flip-even sector
};

/// Diagonal part -J Σ_bonds σᶻ_i σᶻ_j for basis state s.
inline double ising_diagonal(const ChainSpec& spec, std::size_t s) {
  const std::size_t n = spec.n_sites;
  const std::size_t bonds = spec.boundary == Boundary::periodic ? n : n - 1;
  double e = 0.0;
  for (std::size_t i = 0; i < bonds; ++i) {
    const std::size_t j = (i + 1) % n;
    e += (((s >> i) ^ (s >> j)) & 1u) ? -1.0 : 1.0;
  }
  return -spec.coupling.j() * e;
}

/// H·v without building H: bond parities on the diagonal, single-bit flips
/// for the transverse field.
inline std::vector<double> apply_hamiltonian(const ChainSpec& spec, std::span<const double> v) {
  const std::size_t dim = spec.dim();
  if (v.size() != dim)
    throw std::invalid_argument("apply_hamiltonian: vector length " + std::to_string(v.size()) + " != 2^" +
                                std::to_string(spec.n_sites));
  const double field = -spec.coupling.j() * spec.coupling.g();
  std::vector<double> out(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    double acc = ising_diagonal(spec, s) * v[s];
    if (field != 0.0) {
      double flips = 0.0;
      for (std::size_t i = 0; i < spec.n_sites; ++i) flips += v[s ^ (std::size_t{1} << i)];
      acc += field * flips;
    }
    out[s] = acc;
  }
  return out;
}

/// Explicit matrix, for cross-checks on small chains.
inline Eigen::MatrixXd dense_hamiltonian(const ChainSpec& spec) {
  const std::size_t dim = spec.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    h(Eigen::Index(s), Eigen::Index(s)) = ising_diagonal(spec, s);
    for (std::size_t i = 0; i < spec.n_sites; ++i)
      h(Eigen::Index(s ^ (std::size_t{1} << i)), Eigen::Index(s)) += -spec.coupling.j() * spec.coupling.g();
  }
  return h;
}

namespace detail {

inline std::size_t flip_all(std::size_t s, std::size_t n_sites) { return s ^ ((std::size_t{1} << n_sites) - 1); }

// Project onto the spin-flip-even sector: v <- (v + P v)/2.
inline void project_even(std::vector<double>& v, std::size_t n_sites) {
  for (std::size_t s = 0; s < v.size(); ++s) {
    const std::size_t t = flip_all(s, n_sites);
    if (t < s) continue;
    const double avg = 0.5 * (v[s] + v[t]);
    v[s] = avg;
    v[t] = avg;
  }
}

inline void fix_sign(std::vector<double>& v) {
  for (double x : v)
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
}

inline double residual_norm(const ChainSpec& spec, std::span<const double> psi, double energy) {
  const auto hpsi = apply_hamiltonian(spec, psi);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = hpsi[i] - energy * psi[i];
    s += r * r;
  }
  return std::sqrt(s);
}

// Dense solve in the even sector, basis (|r⟩ + |r̄⟩)/√2 with bit n-1 of r clear.
inline ChainState ground_state_dense(const ChainSpec& spec) {
  const std::size_t n = spec.n_sites, dim = spec.dim(), half = dim / 2;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(half), Eigen::Index(half));
  std::vector<double> e(dim, 0.0);
  for (std::size_t r = 0; r < half; ++r) {
    std::fill(e.begin(), e.end(), 0.0);
    e[r] = inv_sqrt2;
    e[flip_all(r, n)] = inv_sqrt2;
    const auto w = apply_hamiltonian(spec, e);
    for (std::size_t q = 0; q < half; ++q)
      m(Eigen::Index(q), Eigen::Index(r)) = (w[q] + w[flip_all(q, n)]) * inv_sqrt2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("ground_state: dense eigensolver failed");

  ChainState st;
  st.n_sites = n;
  st.energy = solver.eigenvalues()(0);
  st.gap = half > 1 ? solver.eigenvalues()(1) - solver.eigenvalues()(0) : 0.0;
  st.amplitudes.assign(dim, 0.0);
  for (std::size_t r = 0; r < half; ++r) {
    const double a = solver.eigenvectors()(Eigen::Index(r), 0) * inv_sqrt2;
    st.amplitudes[r] = a;
    st.amplitudes[flip_all(r, n)] = a;
  }
  return st;
}

struct LanczosOptions {
  std::size_t max_krylov = 200;
  int max_restarts = 8;
  double tolerance = 1e-10;  ///< on ‖Hψ - Eψ‖ / |E|
};

// Lanczos with full reorthogonalization, restarted from the current Ritz
// vector until the true residual meets the tolerance.
inline ChainState ground_state_lanczos(const ChainSpec& spec, const LanczosOptions& opt = {}) {
  const std::size_t n = spec.n_sites, dim = spec.dim();
  std::vector<double> start(dim, 1.0);

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    project_even(start, n);
    const double s0 = norm(start);
    for (double& x : start) x /= s0;

    std::vector<std::vector<double>> basis{start};
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz_values;
    Eigen::MatrixXd ritz_vectors;

    for (std::size_t j = 0; j < std::min(opt.max_krylov, dim / 2); ++j) {
      auto w = apply_hamiltonian(spec, basis[j]);
      alpha.push_back(dot(basis[j], w));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) {
          const double proj = dot(q, w);
          for (std::size_t i = 0; i < dim; ++i) w[i] -= proj * q[i];
        }
      project_even(w, n);
      const double b = norm(w);

      const Eigen::Index k = Eigen::Index(alpha.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        t(i, i) = alpha[std::size_t(i)];
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[std::size_t(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
      ritz_values = tri.eigenvalues();
      ritz_vectors = tri.eigenvectors();

      const double estimate = b * std::abs(ritz_vectors(k - 1, 0));
      if (estimate <= 0.1 * opt.tolerance * std::abs(ritz_values(0)) || b < 1e-13) break;
      beta.push_back(b);
      for (double& x : w) x /= b;
      basis.push_back(std::move(w));
    }

    ChainState st;
    st.n_sites = n;
    st.energy = ritz_values(0);
    st.gap = ritz_values.size() > 1 ? ritz_values(1) - ritz_values(0) : 0.0;
    st.amplitudes.assign(dim, 0.0);
    for (std::size_t k = 0; k < std::size_t(ritz_values.size()); ++k) {
      const double c = ritz_vectors(Eigen::Index(k), 0);
      for (std::size_t i = 0; i < dim; ++i) st.amplitudes[i] += c * basis[k][i];
    }
    const double nrm = norm(st.amplitudes);
    for (double& x : st.amplitudes) x /= nrm;
    st.energy = dot(st.amplitudes, apply_hamiltonian(spec, st.amplitudes));

    if (residual_norm(spec, st.amplitudes, st.energy) <= opt.tolerance * std::abs(st.energy)) return st;
    start = st.amplitudes;
  }
  throw std::runtime_error("ground_state: Lanczos did not converge for N=" + std::to_string(n));
}

}  // namespace detail

/// Lowest state of the chain. The search is confined to the spin-flip-even
/// sector, which holds the unique ground state for g > 0 and selects
/// (|↑…↑⟩ + |↓…↓⟩)/√2 out of the degenerate pair at g = 0.
inline ChainState ground_state(const ChainSpec& spec) {
  ChainState st = spec.n_sites <= kMaxDenseSites ? detail::ground_state_dense(spec) : detail::ground_state_lanczos(spec);
  detail::fix_sign(st.amplitudes);

  const double nrm = norm(st.amplitudes);
  if (std::abs(nrm - 1.0) > 1e-10) throw std::logic_error("ground_state: state not normalized");
  const double scale = std::max(std::abs(st.energy), 1e-300);
  if (detail::residual_norm(spec, st.amplitudes, st.energy) > 1e-8 * scale)
    throw std::runtime_error("ground_state: eigen-residual above tolerance");
  if (!(st.gap > 0.0)) throw std::runtime_error("ground_state: no spectral gap above the ground state");
  return st;
}

/// Single-fermion energy Λ(k) = 2J sqrt(1 + g² - 2g cos k).
inline double jw_dispersion(double k, const Coupling& c) {
  const double g = c.g();
  return 2.0 * c.j() * std::sqrt(std::max(1.0 + g * g - 2.0 * g * std::cos(k), 0.0));
}

/// min_k Λ(k) = 2J|1 - g|; closes only at g = 1.
inline double jw_gap(const Coupling& c) { return 2.0 * c.j() * std::abs(1.0 - c.g()); }

/// Ground energy of the periodic chain from free fermions. The ground state
/// has even fermion parity, so momenta are antiperiodic: k = (2m+1)π/N.
/// E₀ = -½ Σ_k Λ(k).
inline double jw_ground_energy(std::size_t n_sites, const Coupling& c) {
  if (n_sites < 2 || n_sites % 2 != 0) throw std::invalid_argument("jw_ground_energy: n_sites must be even and >= 2");
  double e = 0.0;
  for (std::size_t m = 0; m < n_sites; ++m) {
    const double k = std::numbers::pi * double(2 * m + 1) / double(n_sites);
    e -= 0.5 * jw_dispersion(k, c);
  }
  return e;
}

/// Concurrence of sites (bond, bond+1 mod N) in the given chain state.
inline double bond_concurrence(const ChainState& st, std::size_t bond) {
  const std::size_t n = st.n_sites;
  return concurrence_mixed(partial_trace(st.amplitudes, n, bond % n, (bond + 1) % n));
}

/// Nearest-neighbour concurrence in the exact ground state.
inline double nn_concurrence_exact(const ChainSpec& spec) { return bond_concurrence(ground_state(spec), 0); }

}  // namespace qrg
