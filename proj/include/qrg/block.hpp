#pragma once

// Exact treatment of the two-site block of the transverse-field Ising chain
//
//   H = -J Σ_i (σᶻ_i σᶻ_{i+1} + g σˣ_i),
//
// and the block renormalization map obtained by keeping the two lowest block
// states. Each block is h = -J(σᶻ₁σᶻ₂ + g σˣ₁); the inter-block part carries
// σᶻ₂σᶻ₁' and g σˣ₂, which is what gets projected.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrg/jacobi.hpp"
#include "qrg/pauli.hpp"
#include "qrg/small_matrix.hpp"
#include "qrg/two_qubit.hpp"

namespace qrg {

/// Exchange energy J and dimensionless field ratio g.
class Coupling {
 public:
  Coupling(double j, double g) : j_(j), g_(g) {
    if (!std::isfinite(j) || !std::isfinite(g)) throw std::invalid_argument("Coupling: J and g must be finite");
    if (!(j > 0.0)) throw std::invalid_argument("Coupling: J must be positive");
    if (!(g >= 0.0)) throw std::invalid_argument("Coupling: g must be non-negative");
  }

  double j() const { return j_; }
  double g() const { return g_; }

  friend bool operator==(const Coupling&, const Coupling&) = default;

 private:
  double j_;
  double g_;
};

/// -J·(σᶻ⊗σᶻ) - J·g·(σˣ⊗I).
inline SmallMatrix block_hamiltonian(const Coupling& c) {
  SmallMatrix h = pauli(Axis::z, 1, 2) * pauli(Axis::z, 2, 2);
  h += c.g() * pauli(Axis::x, 1, 2);
  h *= -c.j();
  return h;
}

/// The two degenerate block ground states. psi0 lives in the σᶻ₂ = +1 sector
/// {↑↑, ↓↑}, psi1 in σᶻ₂ = -1 {↑↓, ↓↓}; both have a positive leading amplitude.
struct GroundDoublet {
  TwoQubitState psi0;
  TwoQubitState psi1;
  double energy = 0.0;
};

inline double sz2_expectation(std::span<const double> v) {
  return v[0] * v[0] - v[1] * v[1] + v[2] * v[2] - v[3] * v[3];
}

inline GroundDoublet ground_doublet(const Coupling& c) {
  if (c.g() == 0.0) {
    // Ising limit: every sector is already diagonal.
    return GroundDoublet{TwoQubitState{{1.0, 0.0, 0.0, 0.0}}, TwoQubitState{{0.0, 0.0, 0.0, 1.0}}, -c.j()};
  }
  const auto pairs = diagonalize_symmetric(block_hamiltonian(c), sz2_expectation);

  auto to_state = [](const std::vector<double>& v) { return TwoQubitState{{v[0], v[1], v[2], v[3]}}; };
  GroundDoublet d{to_state(pairs[0].vector), to_state(pairs[1].vector), pairs[0].value};

  // The Hamiltonian never couples the σᶻ₂ sectors, so the off-sector
  // amplitudes must be exact zeros.
  if (d.psi0[1] != 0.0 || d.psi0[3] != 0.0 || d.psi1[0] != 0.0 || d.psi1[2] != 0.0)
    throw std::logic_error("ground_doublet: eigenvectors leaked across σᶻ₂ sectors");
  return d;
}

/// 2×2 images of the inter-block operators in the {psi0, psi1} basis.
struct ProjectedOperators {
  SmallMatrix sz1;
  SmallMatrix sz2;
  SmallMatrix sx2;
};

inline ProjectedOperators project_block_operators(const GroundDoublet& d) {
  const std::array<const TwoQubitState*, 2> basis{&d.psi0, &d.psi1};
  auto project = [&](const SmallMatrix& op) {
    SmallMatrix out(2);
    for (std::size_t a = 0; a < 2; ++a) {
      const auto op_b = [&](std::size_t b) { return op.apply(basis[b]->view()); };
      for (std::size_t b = 0; b < 2; ++b) out(a, b) = dot(basis[a]->view(), op_b(b));
    }
    return out;
  };
  return ProjectedOperators{project(pauli(Axis::z, 1, 2)), project(pauli(Axis::z, 2, 2)),
                            project(pauli(Axis::x, 2, 2))};
}

/// Renormalized couplings in closed form:
///   J' = J·2q/(1+q²),  q = √(g²+1)+g,   g' = g².
/// J' is also computed as J/√(1+g²) and the two must agree.
inline Coupling rg_map_closed(const Coupling& c) {
  const double g = c.g();
  const double q = std::hypot(g, 1.0) + g;
  const double ratio = q < 1e100 ? 2.0 * q / (1.0 + q * q) : 2.0 / (q + 1.0 / q);
  const double j_literal = c.j() * ratio;
  const double j_simplified = c.j() / std::hypot(g, 1.0);
  if (std::abs(j_literal - j_simplified) > 1e-12 * j_simplified)
    throw std::logic_error("rg_map_closed: literal and simplified J' disagree");
  return Coupling(j_literal, g * g);
}

inline constexpr double kProjectionTol = 1e-12;

/// Renormalized couplings re-derived by projecting σᶻ₁, σᶻ₂ and σˣ₂ onto the
/// ground doublet: σᶻ₂ ↦ σ'ᶻ, σᶻ₁ ↦ b·σ'ᶻ, σˣ₂ ↦ c·σ'ˣ, hence J' = J·b and
/// g' = g·c/b.
inline Coupling rg_map_numeric(const Coupling& c) {
  if (!(c.g() > 0.0)) throw std::domain_error("rg_map_numeric: requires g > 0");
  const auto ops = project_block_operators(ground_doublet(c));

  const auto& z2 = ops.sz2;
  if (std::abs(z2(0, 0) - 1.0) > kProjectionTol || std::abs(z2(1, 1) + 1.0) > kProjectionTol ||
      z2(0, 1) != 0.0 || z2(1, 0) != 0.0)
    throw std::runtime_error("rg_map_numeric: σᶻ₂ does not project onto σ'ᶻ");

  const auto& z1 = ops.sz1;
  if (std::abs(z1.trace()) > kProjectionTol)
    throw std::runtime_error("rg_map_numeric: projected σᶻ₁ has an identity part (broken doublet gauge)");
  if (z1(0, 1) != 0.0 || z1(1, 0) != 0.0)
    throw std::runtime_error("rg_map_numeric: projected σᶻ₁ is not diagonal");
  const double b = 0.5 * (z1(0, 0) - z1(1, 1));

  const auto& x2 = ops.sx2;
  if (x2(0, 0) != 0.0 || x2(1, 1) != 0.0 || std::abs(x2(0, 1) - x2(1, 0)) > kProjectionTol)
    throw std::runtime_error("rg_map_numeric: projected σˣ₂ is not proportional to σ'ˣ");
  const double cx = x2(0, 1);

  return Coupling(c.j() * b, c.g() * cx / b);
}

enum class Stability { stable, unstable };

struct FixedPoint {
  double g;  ///< +inf for the paramagnetic point
  Stability stability;
  double slope;  ///< |dg'/dg| at g, or |du'/du| at u = 1/g = 0 for g = ∞
};

/// dg'/dg of the field map g' = g².
inline double field_map_slope(double g) { return 2.0 * g; }

/// Fixed points of g' = g²: 0 and ∞ are stable, 1 is the critical point.
inline std::vector<FixedPoint> fixed_points() {
  auto classify = [](double slope) { return std::abs(slope) < 1.0 ? Stability::stable : Stability::unstable; };
  std::vector<FixedPoint> out;
  for (double g : {0.0, 1.0}) {
    if (g * g != g) throw std::logic_error("fixed_points: candidate is not invariant");
    const double slope = std::abs(field_map_slope(g));
    out.push_back({g, classify(slope), slope});
  }
  // u = 1/g obeys u' = u², so u = 0 has slope 2u = 0.
  const double u_slope = std::abs(field_map_slope(0.0));
  out.push_back({std::numeric_limits<double>::infinity(), classify(u_slope), u_slope});
  return out;
}

struct CriticalExponents {
  double nu;
  int block_size;
  double map_slope;
  double theta_predicted() const { return 1.0 / nu; }
};

/// ν from linearizing the map at the unstable fixed point: a block of n_B
/// sites rescales lengths by n_B while g - g_c grows by the map slope.
inline CriticalExponents critical_exponents() {
  constexpr int kBlockSize = 2;
  double slope = 0.0;
  for (const auto& fp : fixed_points())
    if (fp.stability == Stability::unstable) slope = fp.slope;
  return CriticalExponents{std::log(double(kBlockSize)) / std::log(slope), kBlockSize, slope};
}

}  // namespace qrg
