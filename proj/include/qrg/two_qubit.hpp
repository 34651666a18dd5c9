#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>

#include "qrg/small_matrix.hpp"

namespace qrg {

/// Real pure state of two spins in the basis (↑↑, ↑↓, ↓↑, ↓↓).
struct TwoQubitState {
  std::array<double, 4> amp{};

  static constexpr double kNormTol = 1e-12;

  double& operator[](std::size_t i) { return amp[i]; }
  double operator[](std::size_t i) const { return amp[i]; }

  double norm_squared() const { return amp[0] * amp[0] + amp[1] * amp[1] + amp[2] * amp[2] + amp[3] * amp[3]; }
  bool is_normalized(double tol = kNormTol) const { return std::abs(norm_squared() - 1.0) <= tol; }

  std::span<const double> view() const { return amp; }

  friend bool operator==(const TwoQubitState&, const TwoQubitState&) = default;
};

inline TwoQubitState normalized(TwoQubitState s) {
  const double n = std::sqrt(s.norm_squared());
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("normalized: zero or non-finite state");
  for (double& a : s.amp) a /= n;
  return s;
}

/// 4×4 real symmetric density matrix over a pair of spins.
class DensityMatrix4 {
 public:
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kSymTol = 1e-12;

  DensityMatrix4() : m_(4) {}

  /// Validates trace and symmetry; positivity is checked where it matters
  /// (concurrence), since that needs a diagonalization.
  explicit DensityMatrix4(SmallMatrix m) : m_(std::move(m)) {
    if (m_.dim() != 4) throw std::invalid_argument("DensityMatrix4: matrix must be 4x4");
    if (!m_.is_finite()) throw std::invalid_argument("DensityMatrix4: non-finite entry");
    if (!m_.is_symmetric(kSymTol)) throw std::invalid_argument("DensityMatrix4: matrix is not symmetric");
    if (std::abs(m_.trace() - 1.0) > kTraceTol) throw std::invalid_argument("DensityMatrix4: trace is not 1");
  }

  static DensityMatrix4 from_pure(const TwoQubitState& s) {
    SmallMatrix m(4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) m(i, j) = s[i] * s[j];
    return DensityMatrix4(std::move(m));
  }

  const SmallMatrix& matrix() const { return m_; }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

 private:
  SmallMatrix m_;
};

}  // namespace qrg
