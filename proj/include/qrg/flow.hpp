#pragma once

// Iterated block renormalization and the finite-size analysis built on it.
//
// After n steps the two renormalized sites stand for a chain of N = 2^(n+1)
// sites, with g_n = g^(2^n). Everything that depends on g_n is carried as
// log g_n so that large n neither overflows nor underflows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrg/block.hpp"
#include "qrg/concurrence.hpp"
#include "qrg/spline.hpp"

namespace qrg {

inline constexpr int kMaxFlowSteps = 60;

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline std::uint64_t effective_size(int n) {
  if (n < 0 || n > kMaxFlowSteps) throw std::out_of_range("effective_size: step outside [0, 60]");
  return std::uint64_t{1} << (n + 1);
}

struct FlowStep {
  int n = 0;
  double j_n = 0.0;
  double log_g_n = 0.0;
  std::uint64_t size_n = 0;
};

struct FlowTrace {
  std::vector<FlowStep> steps;
};

/// Iterates the closed-form map n_max times. J may underflow to 0 for
/// strongly paramagnetic starts; that is recorded as-is.
inline FlowTrace flow(const Coupling& c0, int n_max) {
  if (n_max < 0 || n_max > kMaxFlowSteps) throw std::out_of_range("flow: n_max must be in [0, 60]");
  FlowTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(n_max) + 1);
  double log_j = std::log(c0.j());
  double log_g = std::log(c0.g());
  for (int n = 0; n <= n_max; ++n) {
    trace.steps.push_back({n, std::exp(log_j), log_g, effective_size(n)});
    // J' = J / sqrt(1 + g²)
    log_j -= 0.5 * softplus(2.0 * log_g);
    log_g *= 2.0;
  }
  return trace;
}

/// log g_n = 2^n log g.
inline double log_renormalized_field(double g, int n) { return std::ldexp(std::log(g), n); }

/// Beyond this |log g_n²| the field is not evaluated directly.
inline constexpr double kDirectEvaluationLimit = 700.0;

/// C_n(g) from the closed form 1/sqrt(1 + g_n²), evaluated in log domain.
inline double concurrence_log_domain(double g, int n) {
  return std::exp(-0.5 * softplus(2.0 * log_renormalized_field(g, n)));
}

/// C_n(g): the block concurrence at the renormalized field g_n, computed from
/// the block ground state when g_n is representable and from the log-domain
/// closed form otherwise.
inline double concurrence_at(double g, int n) {
  if (!(g > 0.0) || !std::isfinite(g)) throw std::domain_error("concurrence_at: g must be positive and finite");
  if (n < 0 || n > kMaxFlowSteps) throw std::out_of_range("concurrence_at: step outside [0, 60]");
  const double log_gn = log_renormalized_field(g, n);
  if (std::abs(2.0 * log_gn) > kDirectEvaluationLimit) return concurrence_log_domain(g, n);
  return block_concurrence(std::exp(log_gn));
}

/// dC_n/dg by the chain rule: C'(g_n)·dg_n/dg with C'(x) = -x(1+x²)^(-3/2)
/// and dg_n/dg = Π_{k<n} 2 g_k accumulated as a sum of logs.
inline double concurrence_derivative_at(double g, int n) {
  if (!(g > 0.0) || !std::isfinite(g)) throw std::domain_error("concurrence_derivative_at: g must be positive");
  if (n < 0 || n > kMaxFlowSteps) throw std::out_of_range("concurrence_derivative_at: step outside [0, 60]");
  double log_jacobian = 0.0;
  double log_gk = std::log(g);
  for (int k = 0; k < n; ++k) {
    log_jacobian += std::log(2.0) + log_gk;
    log_gk *= 2.0;
  }
  return -std::exp(log_gk - 1.5 * softplus(2.0 * log_gk) + log_jacobian);
}

/// Central-difference step: cbrt(ε) relative to the scale on which C_n varies,
/// which is g/2^n.
inline double finite_difference_step(double g, int n) {
  return std::ldexp(std::cbrt(std::numeric_limits<double>::epsilon()) * g, -n);
}

inline double concurrence_derivative_fd(double g, int n) {
  const double h = finite_difference_step(g, n);
  if (!(g - h > 0.0)) throw std::domain_error("concurrence_derivative_fd: stencil leaves g > 0");
  return (concurrence_at(g + h, n) - concurrence_at(g - h, n)) / (2.0 * h);
}

struct Curve {
  std::vector<double> grid;
  std::vector<double> values;
  int step = 0;
  std::uint64_t size = 0;
};

enum class DerivativeMethod { chain_rule, finite_difference };

namespace detail {

inline void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("curve: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw std::invalid_argument("curve: grid values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("curve: grid must be strictly ascending");
  }
}

template <typename F>
Curve tabulate(std::span<const double> grid, int n, F&& f) {
  check_grid(grid);
  Curve c{std::vector<double>(grid.begin(), grid.end()), {}, n, effective_size(n)};
  c.values.reserve(grid.size());
  for (double g : grid) c.values.push_back(f(g));
  return c;
}

}  // namespace detail

/// Uniform grid lo..hi with `count` points, endpoints exact.
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("linspace: need at least 2 points");
  std::vector<double> out(count);
  const double span = hi - lo;
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + span * double(i) / double(count - 1);
  out.back() = hi;
  return out;
}

inline Curve concurrence_curve(std::span<const double> grid, int n) {
  return detail::tabulate(grid, n, [n](double g) { return concurrence_at(g, n); });
}

inline Curve derivative_curve(std::span<const double> grid, int n,
                              DerivativeMethod method = DerivativeMethod::chain_rule) {
  if (method == DerivativeMethod::chain_rule)
    return detail::tabulate(grid, n, [n](double g) { return concurrence_derivative_at(g, n); });

  // Sampled finite differences only make sense if the grid resolves the
  // transition, whose width is ~g/2^n.
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::ldexp(grid[i] - grid[i - 1], n) > grid[i])
      throw std::invalid_argument("derivative_curve: grid too coarse for step " + std::to_string(n));
  return detail::tabulate(grid, n, [n](double g) { return concurrence_derivative_fd(g, n); });
}

struct Minimum {
  double g_m = 0.0;
  double value = 0.0;
};

struct MinimumOptions {
  double lo = 0.5;
  double hi = 1.5;
  std::size_t scan_points = 2001;
  double tolerance = 1e-10;
};

/// Position and value of the minimum of dC_n/dg: coarse scan over the
/// bracket, then golden-section refinement around the best scan point.
inline Minimum find_minimum(int n, const MinimumOptions& opt = {}) {
  if (!(opt.lo > 0.0) || !(opt.hi > opt.lo)) throw std::invalid_argument("find_minimum: invalid bracket");
  if (opt.scan_points < 3) throw std::invalid_argument("find_minimum: need at least 3 scan points");
  const auto grid = linspace(opt.lo, opt.hi, opt.scan_points);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = concurrence_derivative_at(grid[i], n);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == 0 || best + 1 == grid.size())
    throw std::domain_error("find_minimum: no interior minimum in [" + std::to_string(opt.lo) + ", " +
                             std::to_string(opt.hi) + "] for step " + std::to_string(n));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = grid[best - 1], b = grid[best + 1];
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = concurrence_derivative_at(x1, n), f2 = concurrence_derivative_at(x2, n);
  while (b - a > opt.tolerance) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = concurrence_derivative_at(x1, n);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = concurrence_derivative_at(x2, n);
    }
  }
  const double g_m = 0.5 * (a + b);
  return Minimum{g_m, concurrence_derivative_at(g_m, n)};
}

/// Overload that scans the supplied grid's range.
inline Minimum find_minimum(std::span<const double> grid, int n) {
  detail::check_grid(grid);
  MinimumOptions opt;
  opt.lo = grid.front();
  opt.hi = grid.back();
  opt.scan_points = std::max<std::size_t>(grid.size(), 3);
  return find_minimum(n, opt);
}

// --- power-law fits ---------------------------------------------------------

struct ScalingPoint {
  int step = 0;
  double size = 0.0;
  double value = 0.0;
};

enum class FitMode {
  offset_from_gc,  ///< fit (value - g_c) = A·N^exponent
  raw_magnitude,   ///< fit |value| = A·N^exponent
};

struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  int n_min = 0;
  int n_max = 0;
};

/// Same data with the prefactor pinned to 1: only the exponent is free.
struct UnitPrefactorFit {
  double exponent = 0.0;
  double log_rms = 0.0;  ///< RMS residual in ln(value)
};

inline constexpr std::size_t kMinFitPoints = 4;

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> log_points(std::span<const ScalingPoint> pts, FitMode mode,
                                                                     double g_c) {
  if (pts.size() < kMinFitPoints)
    throw std::invalid_argument("fit_power_law: need at least " + std::to_string(kMinFitPoints) + " points");
  std::vector<double> lx, ly;
  for (const auto& p : pts) {
    const double y = mode == FitMode::offset_from_gc ? p.value - g_c : std::abs(p.value);
    if (!(y > 0.0) || !std::isfinite(y))
      throw std::domain_error("fit_power_law: non-positive value under the logarithm at step " + std::to_string(p.step));
    if (!(p.size > 0.0)) throw std::domain_error("fit_power_law: non-positive size");
    lx.push_back(std::log(p.size));
    ly.push_back(std::log(y));
  }
  const auto [mn, mx] = std::minmax_element(lx.begin(), lx.end());
  if (*mx - *mn <= 0.0) throw std::invalid_argument("fit_power_law: all sizes coincide");
  return {lx, ly};
}

}  // namespace detail

/// Least squares of ln(y) against ln(N).
inline ScalingFit fit_power_law(std::span<const ScalingPoint> pts, FitMode mode, double g_c = 1.0) {
  const auto [lx, ly] = detail::log_points(pts, mode, g_c);
  const double k = double(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    ss_res += r * r;
  }
  const double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;

  int n_min = pts.front().step, n_max = pts.front().step;
  for (const auto& p : pts) {
    n_min = std::min(n_min, p.step);
    n_max = std::max(n_max, p.step);
  }
  return ScalingFit{slope, std::exp(intercept), r2, n_min, n_max};
}

inline UnitPrefactorFit fit_power_law_unit_prefactor(std::span<const ScalingPoint> pts, FitMode mode,
                                                     double g_c = 1.0) {
  const auto [lx, ly] = detail::log_points(pts, mode, g_c);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) ss += (ly[i] - slope * lx[i]) * (ly[i] - slope * lx[i]);
  return UnitPrefactorFit{slope, std::sqrt(ss / double(lx.size()))};
}

/// Minimum position and depth for each step, ready for the two fits.
struct ScalingTable {
  std::vector<ScalingPoint> g_m;       ///< value = g_m
  std::vector<ScalingPoint> dcdg_min;  ///< value = dC/dg at g_m (negative)
};

inline ScalingTable scaling_table(std::span<const int> steps, const MinimumOptions& opt = {}) {
  ScalingTable t;
  for (int n : steps) {
    const auto m = find_minimum(n, opt);
    const double size = double(effective_size(n));
    t.g_m.push_back({n, size, m.g_m});
    t.dcdg_min.push_back({n, size, m.value});
  }
  return t;
}

// --- data collapse -----------------------------------------------------------

struct CollapseOptions {
  double nu = 1.0;
  double half_window = 10.0;      ///< common x-window is |x| <= half_window at most
  double sample_half_width = 12.0;
  std::size_t samples = 1201;      ///< per-curve samples, uniform in x
  std::size_t common_points = 401; ///< odd, so x = 0 is a node
  double lorentz_half_width = 2.0;
  std::size_t lorentz_points = 401;
  MinimumOptions minimum{};
};

struct CollapsedCurve {
  int step = 0;
  std::uint64_t size = 0;
  double g_m = 0.0;
  double dcdg_min = 0.0;
  std::vector<double> x;  ///< common grid
  std::vector<double> y;  ///< (dC/dg|_{g_m} - dC/dg) / N
  double rms_vs_lorentzian = 0.0;
};

struct PairResidual {
  int step_a = 0;
  int step_b = 0;
  double sup_norm = 0.0;  ///< relative to the larger peak |dC/dg|_{g_m}/N
};

struct CollapseReport {
  std::vector<CollapsedCurve> curves;
  std::vector<PairResidual> pairwise;
  double rms_vs_lorentzian = 0.0;  ///< worst curve
};

inline double lorentzian(double x) { return 1.0 / (1.0 + x * x); }

/// Rescales dC/dg for each step by x = N^(1/ν)(g - g_m),
/// y = (dC/dg|_{g_m} - dC/dg)/N, interpolates (natural cubic) onto a common
/// symmetric x-grid and measures how well the curves coincide. The shape
/// comparison uses the peak-normalized profile (dC/dg)/(dC/dg|_{g_m}), which
/// equals 1 at x = 0.
inline CollapseReport collapse(std::span<const int> steps, const CollapseOptions& opt = {}) {
  if (steps.size() < 3) throw std::invalid_argument("collapse: need at least 3 steps");
  if (opt.common_points < 3 || opt.common_points % 2 == 0)
    throw std::invalid_argument("collapse: common_points must be odd and >= 3");

  struct Sampled {
    CollapsedCurve meta;
    CubicSpline spline;
    double peak;
  };
  std::vector<Sampled> sampled;
  double lo = -opt.half_window, hi = opt.half_window;

  const auto xs = linspace(-opt.sample_half_width, opt.sample_half_width, opt.samples);
  for (int n : steps) {
    const auto m = find_minimum(n, opt.minimum);
    const std::uint64_t size = effective_size(n);
    const double n_size = double(size);
    const double x_scale = std::pow(n_size, 1.0 / opt.nu);
    std::vector<double> x, y;
    for (double xi : xs) {
      const double g = m.g_m + xi / x_scale;
      if (!(g > 0.0)) continue;
      x.push_back(xi);
      y.push_back((m.value - concurrence_derivative_at(g, n)) / n_size);
    }
    if (x.size() < 3) throw std::runtime_error("collapse: step " + std::to_string(n) + " has no usable samples");
    lo = std::max(lo, x.front());
    hi = std::min(hi, x.back());
    CollapsedCurve meta;
    meta.step = n;
    meta.size = size;
    meta.g_m = m.g_m;
    meta.dcdg_min = m.value;
    sampled.push_back({std::move(meta), CubicSpline(x, y), std::abs(m.value) / n_size});
  }

  const double half = std::min(-lo, hi);
  if (!(half >= opt.lorentz_half_width))
    throw std::domain_error("collapse: insufficient x-overlap between curves");

  CollapseReport report;
  const auto common = linspace(-half, half, opt.common_points);
  const auto lorentz_x = linspace(-opt.lorentz_half_width, opt.lorentz_half_width, opt.lorentz_points);
  for (auto& s : sampled) {
    s.meta.x = common;
    s.meta.y.reserve(common.size());
    for (double x : common) s.meta.y.push_back(x == 0.0 ? 0.0 : s.spline(x));

    double ss = 0.0;
    const double n_size = double(s.meta.size);
    for (double x : lorentz_x) {
      const double profile = 1.0 - n_size * s.spline(x) / s.meta.dcdg_min;
      const double d = profile - lorentzian(x);
      ss += d * d;
    }
    s.meta.rms_vs_lorentzian = std::sqrt(ss / double(lorentz_x.size()));
    report.rms_vs_lorentzian = std::max(report.rms_vs_lorentzian, s.meta.rms_vs_lorentzian);
  }

  for (std::size_t i = 0; i < sampled.size(); ++i)
    for (std::size_t j = i + 1; j < sampled.size(); ++j) {
      double sup = 0.0;
      for (std::size_t k = 0; k < common.size(); ++k)
        sup = std::max(sup, std::abs(sampled[i].meta.y[k] - sampled[j].meta.y[k]));
      const double peak = std::max(sampled[i].peak, sampled[j].peak);
      report.pairwise.push_back({sampled[i].meta.step, sampled[j].meta.step, sup / peak});
    }

  for (auto& s : sampled) report.curves.push_back(std::move(s.meta));
  return report;
}

}  // namespace qrg
