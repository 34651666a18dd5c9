#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace qrg {

/// Dense real square matrix for the few-site operators used by the block
/// treatment (dimension 2, 4, ... 16). Row-major storage.
class SmallMatrix {
 public:
  SmallMatrix() = default;

  explicit SmallMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  SmallMatrix(std::size_t dim, std::initializer_list<double> rows)
      : dim_(dim), data_(rows) {
    if (data_.size() != dim * dim)
      throw std::invalid_argument("SmallMatrix: entry count does not match dim*dim");
  }

  static SmallMatrix identity(std::size_t dim) {
    SmallMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static SmallMatrix diagonal(std::span<const double> d) {
    SmallMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t dim() const { return dim_; }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < dim_ && c < dim_);
    return data_[r * dim_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < dim_ && c < dim_);
    return data_[r * dim_ + c];
  }

  std::span<const double> data() const { return data_; }

  SmallMatrix transposed() const {
    SmallMatrix t(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += (*this)(i, i);
    return s;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool is_symmetric(double tol = 0.0) const {
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = r + 1; c < dim_; ++c)
        if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
    return true;
  }

  std::vector<double> apply(std::span<const double> v) const {
    if (v.size() != dim_) throw std::invalid_argument("SmallMatrix::apply: dimension mismatch");
    std::vector<double> out(dim_, 0.0);
    for (std::size_t r = 0; r < dim_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) s += (*this)(r, c) * v[c];
      out[r] = s;
    }
    return out;
  }

  SmallMatrix& operator+=(const SmallMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SmallMatrix& operator-=(const SmallMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  SmallMatrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) { return a += b; }
  friend SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) { return a -= b; }
  friend SmallMatrix operator*(SmallMatrix a, double s) { return a *= s; }
  friend SmallMatrix operator*(double s, SmallMatrix a) { return a *= s; }

  friend SmallMatrix operator*(const SmallMatrix& a, const SmallMatrix& b) {
    a.check_same(b);
    SmallMatrix out(a.dim_);
    for (std::size_t r = 0; r < a.dim_; ++r)
      for (std::size_t k = 0; k < a.dim_; ++k) {
        const double ark = a(r, k);
        if (ark == 0.0) continue;
        for (std::size_t c = 0; c < a.dim_; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  friend bool operator==(const SmallMatrix&, const SmallMatrix&) = default;

 private:
  void check_same(const SmallMatrix& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("SmallMatrix: dimension mismatch");
  }

  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Kronecker product a ⊗ b.
inline SmallMatrix kron(const SmallMatrix& a, const SmallMatrix& b) {
  const std::size_t na = a.dim(), nb = b.dim();
  SmallMatrix out(na * nb);
  for (std::size_t ra = 0; ra < na; ++ra)
    for (std::size_t ca = 0; ca < na; ++ca) {
      const double x = a(ra, ca);
      if (x == 0.0) continue;
      for (std::size_t rb = 0; rb < nb; ++rb)
        for (std::size_t cb = 0; cb < nb; ++cb) out(ra * nb + rb, ca * nb + cb) = x * b(rb, cb);
    }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace qrg
