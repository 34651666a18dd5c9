#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qrg/concurrence.hpp"

using namespace qrg;
using Catch::Matchers::WithinAbs;

namespace {

DensityMatrix4 werner(double p) {
  const double h = 0.5;
  SmallMatrix bell(4, {h, 0, 0, h, 0, 0, 0, 0, 0, 0, 0, 0, h, 0, 0, h});
  return DensityMatrix4(bell * p + SmallMatrix::identity(4) * ((1.0 - p) / 4.0));
}

oracle::Mat4 to_mat4(const DensityMatrix4& rho) {
  oracle::Mat4 m{};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) m[r][c] = rho(r, c);
  return m;
}

// Concurrence through the characteristic polynomial of ρ·ρ̃, formed here with
// an explicit σʸ⊗σʸ rather than the library's spin flip.
double concurrence_charpoly(const DensityMatrix4& rho) {
  const oracle::Mat4 yy{{{0, 0, 0, -1}, {0, 0, 1, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}}};
  const auto r = to_mat4(rho);
  const auto ev = oracle::charpoly_eigenvalues(oracle::matmul(r, oracle::matmul(yy, oracle::matmul(r, yy))));
  std::array<double, 4> l{};
  for (int i = 0; i < 4; ++i) l[i] = std::sqrt(std::max(ev[i], 0.0));
  return std::max(l[0] - l[1] - l[2] - l[3], 0.0);
}

}  // namespace

TEST_CASE("spin flip") {
  const auto bell = DensityMatrix4::from_pure(TwoQubitState{{1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)}});
  const auto flipped = spin_flip(bell);
  CHECK((flipped.matrix() - bell.matrix()).max_abs() <= 1e-15);

  const std::vector<double> up{1, 0, 0, 0}, down{0, 0, 0, 1};
  CHECK(spin_flip(DensityMatrix4(SmallMatrix::diagonal(up))).matrix() == SmallMatrix::diagonal(down));
}

TEST_CASE("mixed-state concurrence examples") {
  const auto bell = DensityMatrix4::from_pure(TwoQubitState{{1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)}});
  CHECK_THAT(concurrence_mixed(bell), WithinAbs(1.0, 1e-12));

  const std::vector<double> up{1, 0, 0, 0};
  CHECK(concurrence_mixed(DensityMatrix4(SmallMatrix::diagonal(up))) == 0.0);

  CHECK_THAT(concurrence_mixed(werner(0.8)), WithinAbs(0.7, 1e-12));

  const auto spec = concurrence_spectrum(werner(0.8));
  CHECK(spec.lambdas[0] >= spec.lambdas[1]);
  CHECK(spec.lambdas[1] >= spec.lambdas[2]);
  CHECK(spec.lambdas[2] >= spec.lambdas[3]);
  CHECK(spec.lambdas[3] >= 0.0);
}

TEST_CASE("Werner family matches max(0, (3p - 1)/2)") {
  for (double p : {0.0, 0.25, 1.0 / 3.0, 0.5, 0.8, 0.9, 1.0}) {
    INFO("p = " << p);
    const double expected = std::max(0.0, (3 * p - 1) / 2);
    CHECK_THAT(concurrence_mixed(werner(p)), WithinAbs(expected, 1e-12));
    // repeated roots limit the polynomial route to ~cbrt(eps) accuracy
    CHECK_THAT(concurrence_charpoly(werner(p)), WithinAbs(expected, 1e-5));
  }
}

TEST_CASE("pure-state concurrence examples") {
  CHECK_THAT(concurrence_pure(TwoQubitState{{1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)}}), WithinAbs(1.0, 1e-15));
  CHECK(concurrence_pure(TwoQubitState{{0, 1, 0, 0}}) == 0.0);

  const double t = std::numbers::pi / 8;
  const TwoQubitState s{{std::cos(t), 0, 0, std::sin(t)}};
  CHECK_THAT(concurrence_pure(s), WithinAbs(std::sin(std::numbers::pi / 4), 1e-15));
  CHECK_THAT(concurrence_mixed(DensityMatrix4::from_pure(s)), WithinAbs(std::sin(std::numbers::pi / 4), 1e-12));

  CHECK_THROWS_AS(concurrence_pure(TwoQubitState{{1, 1, 0, 0}}), std::invalid_argument);
}

TEST_CASE("pure and mixed concurrence agree on random states") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = oracle::random_unit_vector(rng, 4);
    const TwoQubitState s{{v[0], v[1], v[2], v[3]}};
    CHECK_THAT(concurrence_mixed(DensityMatrix4::from_pure(s)), WithinAbs(concurrence_pure(s), 1e-12));
  }
}

TEST_CASE("mixed concurrence agrees with a characteristic-polynomial oracle on reduced states") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto psi = oracle::random_unit_vector(rng, 16);
    const auto rho = partial_trace(psi, 4, 0, 1);
    CHECK_THAT(concurrence_mixed(rho), WithinAbs(concurrence_charpoly(rho), 1e-6));
  }
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix4(SmallMatrix(3)), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix4(SmallMatrix::identity(4)), std::invalid_argument);  // trace 4
  SmallMatrix asym = SmallMatrix::identity(4) * 0.25;
  asym(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix4(asym), std::invalid_argument);

  // trace 1 but eigenvalue -0.5
  const std::vector<double> d{0.75, 0.75, 0.0, -0.5};
  CHECK_THROWS_AS(concurrence_mixed(DensityMatrix4(SmallMatrix::diagonal(d))), std::domain_error);
  // rounding-level negativity is tolerated
  const std::vector<double> tiny{0.5 + 1e-13, 0.5, 0.0, -1e-13};
  CHECK(concurrence_mixed(DensityMatrix4(SmallMatrix::diagonal(tiny))) == 0.0);
}

TEST_CASE("block concurrence") {
  SECTION("Ising limit is the Bell state") {
    const auto s = block_pure_state(Coupling(1, 1e-9));
    CHECK_THAT(s[0], WithinAbs(1 / std::sqrt(2.0), 1e-8));
    CHECK_THAT(s[3], WithinAbs(1 / std::sqrt(2.0), 1e-8));
    CHECK_THAT(block_concurrence(0.0), WithinAbs(1.0, 1e-15));
  }

  SECTION("examples") {
    CHECK_THAT(block_concurrence(1.0), WithinAbs(1 / std::sqrt(2.0), 1e-12));
    CHECK_THAT(block_concurrence(3.0), WithinAbs(1 / std::sqrt(10.0), 1e-12));
  }

  SECTION("closed form, monotonicity and doublet-combination independence") {
    double prev = 2.0;
    for (int i = 0; i <= 1000; ++i) {
      const double g = 0.01 * i;
      const double c = block_concurrence(g);
      CHECK_THAT(c, WithinAbs(1.0 / std::sqrt(1.0 + g * g), 1e-10));
      CHECK(c < prev);
      prev = c;
      if (g > 0) {
        const auto odd = block_pure_state(Coupling(1, g), DoubletCombination::odd);
        CHECK_THAT(concurrence_pure(odd), WithinAbs(c, 1e-12));
      }
    }
  }

  SECTION("the bare doublet member is unentangled") {
    for (double g : {0.3, 1.0, 4.0}) CHECK(concurrence_pure(ground_doublet(Coupling(1, g)).psi0) <= 1e-15);
  }
}

TEST_CASE("partial trace") {
  SECTION("GHZ keeps a classical mixture") {
    std::vector<double> ghz(16, 0.0);
    ghz[0] = ghz[15] = 1 / std::sqrt(2.0);
    const auto rho = partial_trace(ghz, 4, 0, 1);
    const std::vector<double> d{0.5, 0, 0, 0.5};
    CHECK((rho.matrix() - SmallMatrix::diagonal(d)).max_abs() <= 1e-15);
  }

  SECTION("all-up product state projects onto ↑↑ for every pair") {
    std::vector<double> up(64, 0.0);
    up[63] = 1.0;
    const std::vector<double> d{1, 0, 0, 0};
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b)
        if (a != b) CHECK(partial_trace(up, 6, a, b).matrix() == SmallMatrix::diagonal(d));
  }

  SECTION("site order within the pair") {
    // site 0 ↑, site 1 ↓ (bit 0 set only)
    std::vector<double> psi(4, 0.0);
    psi[1] = 1.0;
    CHECK(partial_trace(psi, 2, 0, 1)(1, 1) == 1.0);  // ↑↓
    CHECK(partial_trace(psi, 2, 1, 0)(2, 2) == 1.0);  // ↓↑
  }

  SECTION("random 8-site states match the brute-force oracle") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
      const auto psi = oracle::random_unit_vector(rng, 256);
      for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) {
          if (a == b) continue;
          const auto rho = partial_trace(psi, 8, a, b);
          const auto ref = oracle::brute_force_partial_trace(psi, 8, a, b);
          double diff = 0.0;
          for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) diff = std::max(diff, std::abs(rho(r, c) - ref[r][c]));
          CHECK(diff <= 1e-13);
          CHECK_THAT(rho.matrix().trace(), WithinAbs(1.0, 1e-12));
          for (const auto& p : diagonalize_symmetric(rho.matrix())) CHECK(p.value >= -1e-12);
        }
    }
  }

  SECTION("density-matrix input agrees with the state input") {
    std::mt19937_64 rng(3);
    const auto psi = oracle::random_unit_vector(rng, 32);
    std::vector<double> full(32 * 32);
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j) full[i * 32 + j] = psi[i] * psi[j];
    const auto a = partial_trace(psi, 5, 1, 3);
    const auto b = partial_trace_density(full, 5, 1, 3);
    CHECK((a.matrix() - b.matrix()).max_abs() <= 1e-14);
  }

  SECTION("errors") {
    std::vector<double> psi(16, 0.25);
    CHECK_THROWS_AS(partial_trace(psi, 4, 0, 4), std::out_of_range);
    CHECK_THROWS_AS(partial_trace(psi, 4, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(psi, 5, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(std::vector<double>(16, 0.0), 4, 0, 1), std::invalid_argument);
  }
}
