#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qrg/small_matrix.hpp"

namespace qrg {

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

struct JacobiOptions {
  /// Converged when the off-diagonal Frobenius norm drops below rel_tol·‖M‖_F.
  double rel_tol = 1e-14;
  int max_sweeps = 100;
  /// Relative width under which two eigenvalues count as degenerate.
  double degeneracy_tol = 1e-12;
  /// Amplitudes below this magnitude are skipped when fixing the sign gauge.
  double gauge_threshold = 1e-12;
};

/// Secondary ordering key inside a degenerate cluster; larger key first.
using DegeneracyKey = std::function<double(const std::vector<double>&)>;

namespace detail {

// Flip the sign so the first amplitude above threshold is positive.
inline void fix_gauge(std::vector<double>& v, double threshold) {
  for (double x : v) {
    if (std::abs(x) > threshold) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for real symmetric matrices.
///
/// Eigenvalues come back ascending with orthonormal, sign-fixed eigenvectors.
/// Within a degenerate cluster, pairs are ordered by `key` (descending) when
/// one is given; otherwise the rotation order decides, which is deterministic.
inline std::vector<EigenPair> diagonalize_symmetric(const SmallMatrix& m, const DegeneracyKey& key = {},
                                                    const JacobiOptions& opt = {}) {
  const std::size_t n = m.dim();
  if (!m.is_finite()) throw std::invalid_argument("diagonalize_symmetric: non-finite entry");
  const double scale = m.frobenius_norm();
  if (!m.is_symmetric(1e-14 * std::max(scale, 1.0)))
    throw std::invalid_argument("diagonalize_symmetric: matrix is not symmetric");

  SmallMatrix a = m;
  SmallMatrix v = SmallMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    if (off_norm() <= opt.rel_tol * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == opt.max_sweeps && off_norm() > opt.rel_tol * scale)
    throw std::runtime_error("diagonalize_symmetric: Jacobi sweeps did not converge");

  std::vector<EigenPair> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    pairs[i].value = a(i, i);
    pairs[i].vector.resize(n);
    for (std::size_t k = 0; k < n; ++k) pairs[i].vector[k] = v(k, i);
    detail::fix_gauge(pairs[i].vector, opt.gauge_threshold);
  }

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });

  if (key) {
    const double tol = opt.degeneracy_tol * std::max(scale, 1.0);
    std::size_t first = 0;
    while (first < n) {
      std::size_t last = first + 1;
      while (last < n && pairs[last].value - pairs[last - 1].value <= tol) ++last;
      if (last - first > 1) {
        std::vector<double> keys(last - first);
        for (std::size_t i = first; i < last; ++i) keys[i - first] = key(pairs[i].vector);
        std::vector<std::size_t> order(last - first);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return keys[x] > keys[y]; });
        std::vector<EigenPair> cluster;
        cluster.reserve(order.size());
        for (std::size_t i : order) cluster.push_back(std::move(pairs[first + i]));
        std::move(cluster.begin(), cluster.end(), pairs.begin() + static_cast<std::ptrdiff_t>(first));
      }
      first = last;
    }
  }
  return pairs;
}

}  // namespace qrg
