#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "rbench/common.hpp"
#include "rbench/dynamics.hpp"

namespace rbench {

enum class LyapunovMethod { Rosenstein, Wolf, LogisticAnalytic };

struct LyapunovEstimate {
  double lambda_max = 0.0;
  int fit_lo = 0, fit_hi = 0;       // step range the slope was fitted on
  LyapunovMethod method = LyapunovMethod::Rosenstein;
  bool low_confidence = false;
  std::vector<double> curve;        // mean log divergence per step offset
};

namespace detail {

// Exact brute-force nearest neighbor with a Theiler exclusion window.
// Desk-scale T keeps O(T^2) tractable and avoids a spatial index.
inline std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& pts, int theiler) {
  const Eigen::Index n = pts.rows();
  std::vector<Eigen::Index> nn(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(static_cast<long>(i - j)) <= theiler) continue;
      const double d2 = (pts.row(i) - pts.row(j)).squaredNorm();
      if (d2 < best) {
        best = d2;
        arg = j;
      }
    }
    nn[static_cast<std::size_t>(i)] = arg;
  }
  return nn;
}

inline double ols_slope(const std::vector<double>& y, int lo, int hi) {
  const int n = hi - lo + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = lo; k <= hi; ++k) {
    sx += k;
    sy += y[static_cast<std::size_t>(k)];
    sxx += static_cast<double>(k) * k;
    sxy += k * y[static_cast<std::size_t>(k)];
  }
  const double denom = n * sxx - sx * sx;
  require(denom > 0, "ols_slope: degenerate fit range");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace detail

// Largest Lyapunov exponent from the average log divergence of nearest
// neighbor pairs in a delay embedding, slope taken over the linear region.
// When no fit range is given, the region is picked from the rise of the
// divergence curve (between 2/5 and all of k_max); chaotic curves saturate at
// the attractor size so a fixed early window would catch the neighbor
// relaxation transient instead of the exponential regime.
inline LyapunovEstimate lyapunov_rosenstein(const Eigen::VectorXd& series, int m, int tau_lag,
                                            double dt, int k_max, int theiler,
                                            std::optional<std::pair<int, int>> fit_range = {}) {
  require(k_max >= 2, "lyapunov_rosenstein: k_max must be >= 2");
  require(dt > 0, "lyapunov_rosenstein: dt must be > 0");
  const Eigen::MatrixXd embedded = delay_embed(series, m, tau_lag);
  const Eigen::Index usable = embedded.rows() - k_max;
  require(usable >= 2, "lyapunov_rosenstein: series too short for k_max");

  const Eigen::MatrixXd base = embedded.topRows(usable);
  const auto nn = detail::nearest_neighbors(base, theiler);
  if (std::all_of(nn.begin(), nn.end(), [](Eigen::Index j) { return j < 0; }))
    throw ComputeError("lyapunov_rosenstein: no valid neighbor pairs");

  LyapunovEstimate est;
  est.method = LyapunovMethod::Rosenstein;
  est.curve.resize(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    double acc = 0;
    std::size_t cnt = 0;
    for (Eigen::Index i = 0; i < usable; ++i) {
      const Eigen::Index j = nn[static_cast<std::size_t>(i)];
      if (j < 0) continue;
      const double d = (embedded.row(i + k) - embedded.row(j + k)).norm();
      if (d <= 0) continue;
      acc += std::log(d);
      ++cnt;
    }
    if (cnt == 0) throw ComputeError("lyapunov_rosenstein: all pairs degenerate at offset " + std::to_string(k));
    est.curve[static_cast<std::size_t>(k)] = acc / static_cast<double>(cnt);
  }

  if (fit_range) {
    est.fit_lo = fit_range->first;
    est.fit_hi = fit_range->second;
    require(est.fit_lo >= 0 && est.fit_hi <= k_max && est.fit_lo < est.fit_hi,
            "lyapunov_rosenstein: bad fit range");
  } else {
    est.fit_lo = std::max(1, (2 * k_max) / 5);
    est.fit_hi = k_max;
  }
  est.lambda_max = detail::ols_slope(est.curve, est.fit_lo, est.fit_hi) / dt;

  for (int k = 0; k < std::min(5, k_max); ++k)
    if (est.curve[static_cast<std::size_t>(k + 1)] < est.curve[static_cast<std::size_t>(k)])
      est.low_confidence = true;
  return est;
}

inline LyapunovEstimate lyapunov_rosenstein(const TimeSeries& ts, int m, int tau_lag, int k_max,
                                            int theiler,
                                            std::optional<std::pair<int, int>> fit_range = {}) {
  require(ts.dims() == 1, "lyapunov_rosenstein: expects a scalar series");
  return lyapunov_rosenstein(Eigen::VectorXd(ts.data.col(0)), m, tau_lag, ts.dt, k_max, theiler,
                             fit_range);
}

// Wolf-style neighbor tracking: evolve a reference/neighbor pair, accumulate
// log growth per segment, renormalize by picking a fresh neighbor whenever the
// separation exceeds the threshold. Replacement prefers the candidate best
// aligned with the old separation vector among those below the threshold.
inline LyapunovEstimate lyapunov_wolf(const Eigen::VectorXd& series, int m, int tau_lag, double dt,
                                      int evolve_steps, double replace_threshold,
                                      int theiler = -1) {
  require(evolve_steps >= 1, "lyapunov_wolf: evolve_steps must be >= 1");
  require(replace_threshold > 0, "lyapunov_wolf: replace_threshold must be > 0");
  const Eigen::MatrixXd e = delay_embed(series, m, tau_lag);
  if (theiler < 0) theiler = m * tau_lag;
  const Eigen::Index n = e.rows();
  require(n > 2 * evolve_steps, "lyapunov_wolf: series too short");

  auto find_neighbor = [&](Eigen::Index ref, const Eigen::RowVectorXd* old_sep) -> Eigen::Index {
    Eigen::Index bound = n - evolve_steps;
    double best_angle = std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < bound; ++j) {
      if (std::abs(static_cast<long>(ref - j)) <= theiler) continue;
      const Eigen::RowVectorXd sep = e.row(j) - e.row(ref);
      const double d = sep.norm();
      if (d <= 0) continue;
      if (old_sep) {
        if (d >= replace_threshold) continue;
        const double cosang = sep.dot(*old_sep) / (d * old_sep->norm());
        const double ang = std::acos(std::clamp(std::abs(cosang), 0.0, 1.0));
        if (ang < best_angle - 1e-12 || (std::abs(ang - best_angle) <= 1e-12 && d < best_dist)) {
          best_angle = ang;
          best_dist = d;
          arg = j;
        }
      } else if (d < best_dist) {
        best_dist = d;
        arg = j;
      }
    }
    return arg;
  };

  Eigen::Index ref = 0;
  Eigen::Index nb = find_neighbor(ref, nullptr);
  if (nb < 0) throw ComputeError("lyapunov_wolf: no admissible neighbor at nonzero distance");

  double log_growth = 0.0;
  long total_steps = 0;
  int segments = 0;
  while (ref + evolve_steps < n && nb + evolve_steps < n) {
    const double d0 = (e.row(nb) - e.row(ref)).norm();
    if (d0 <= 0) break;
    const Eigen::Index ref2 = ref + evolve_steps;
    const Eigen::Index nb2 = nb + evolve_steps;
    const double d1 = (e.row(nb2) - e.row(ref2)).norm();
    if (d1 <= 0) break;
    log_growth += std::log(d1 / d0);
    total_steps += evolve_steps;
    ++segments;
    ref = ref2;
    if (ref + evolve_steps >= n) break;
    if (d1 > replace_threshold) {
      Eigen::RowVectorXd old_sep = e.row(nb2) - e.row(ref);
      Eigen::Index fresh = find_neighbor(ref, &old_sep);
      if (fresh < 0) fresh = find_neighbor(ref, nullptr);  // nothing under threshold
      if (fresh < 0) break;
      nb = fresh;
    } else {
      nb = nb2;
    }
  }
  if (segments < 3) throw ComputeError("lyapunov_wolf: fewer than 3 renormalization segments");

  LyapunovEstimate est;
  est.method = LyapunovMethod::Wolf;
  est.fit_lo = 0;
  est.fit_hi = static_cast<int>(total_steps);
  est.lambda_max = log_growth / (static_cast<double>(total_steps) * dt);
  return est;
}

// Analytic logistic-map exponent: mean of ln|f'(x)| = ln|r - 2 r x| along the
// orbit. |.| is clamped at 1e-300 so an orbit touching x = 0.5 stays finite.
inline double logistic_lyapunov(double r, double x0, std::size_t n, std::size_t transient) {
  require(r >= 0.0 && r <= 4.0, "logistic_lyapunov: r must be in [0,4]");
  require(n >= 1, "logistic_lyapunov: n must be >= 1");
  double x = x0;
  for (std::size_t i = 0; i < transient; ++i) x = r * x * (1.0 - x);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::log(std::max(std::abs(r - 2.0 * r * x), 1e-300));
    x = r * x * (1.0 - x);
  }
  return acc / static_cast<double>(n);
}

struct FtleField {
  Eigen::MatrixXd grid;          // (nx, nz); NaN marks failed cells
  std::vector<double> x_axis;
  std::vector<double> z_axis;
  double horizon = 0.0;
  double delta = 0.0;
};

// Finite-time Lyapunov exponent over the (x, 0, z) slice: perturb along x,
// integrate both for the horizon, log of the separation ratio divided by T.
template <typename Field>
FtleField ftle_field_of(const Field& flow, std::pair<double, double> x_range,
                        std::pair<double, double> z_range, int nx, int nz, double horizon,
                        double delta, double dt) {
  require(nx >= 2 && nz >= 2, "ftle_field: resolution must be >= 2 per axis");
  require(horizon > 0 && delta > 0 && dt > 0, "ftle_field: horizon, delta, dt must be > 0");
  FtleField field;
  field.horizon = horizon;
  field.delta = delta;
  field.grid.resize(nx, nz);
  field.x_axis.resize(static_cast<std::size_t>(nx));
  field.z_axis.resize(static_cast<std::size_t>(nz));
  for (int i = 0; i < nx; ++i)
    field.x_axis[static_cast<std::size_t>(i)] =
        x_range.first + (x_range.second - x_range.first) * i / (nx - 1);
  for (int j = 0; j < nz; ++j)
    field.z_axis[static_cast<std::size_t>(j)] =
        z_range.first + (z_range.second - z_range.first) * j / (nz - 1);

  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nz; ++j) {
      Vec3 a(field.x_axis[static_cast<std::size_t>(i)], 0.0, field.z_axis[static_cast<std::size_t>(j)]);
      Vec3 b = a + Vec3(delta, 0.0, 0.0);
      bool failed = false;
      for (std::size_t k = 0; k < steps; ++k) {
        a = rk4_step(flow, a, dt);
        b = rk4_step(flow, b, dt);
        if (!a.allFinite() || !b.allFinite() || a.cwiseAbs().maxCoeff() > kBlowupLimit ||
            b.cwiseAbs().maxCoeff() > kBlowupLimit) {
          failed = true;
          break;
        }
      }
      field.grid(i, j) = failed ? std::numeric_limits<double>::quiet_NaN()
                                : std::log((a - b).norm() / delta) / horizon;
    }
  }
  return field;
}

inline FtleField ftle_field(const SystemSpec& spec, std::pair<double, double> x_range,
                            std::pair<double, double> z_range, int nx, int nz, double horizon,
                            double delta, double dt = 0.02) {
  require(state_dim(spec) == 3, "ftle_field: spec must be a 3-D flow");
  return ftle_field_of([&](const Vec3& s) { return flow_field(spec, s); }, x_range, z_range, nx,
                       nz, horizon, delta, dt);
}

struct BifurcationScan {
  std::vector<double> r_values;
  Eigen::MatrixXd orbits;  // n_r rows x n_keep columns, post-transient iterates
};

inline BifurcationScan bifurcation_scan(double r_min, double r_max, int n_r,
                                        std::size_t transient, std::size_t n_keep,
                                        double x0 = 0.5123) {
  require(0.0 <= r_min && r_min < r_max && r_max <= 4.0, "bifurcation_scan: need 0 <= r_min < r_max <= 4");
  require(n_r >= 1, "bifurcation_scan: n_r must be >= 1");
  BifurcationScan scan;
  scan.r_values.resize(static_cast<std::size_t>(n_r));
  scan.orbits.resize(n_r, static_cast<Eigen::Index>(n_keep));
  for (int i = 0; i < n_r; ++i) {
    const double r = n_r == 1 ? r_min : r_min + (r_max - r_min) * i / (n_r - 1);
    scan.r_values[static_cast<std::size_t>(i)] = r;
    double x = x0;
    for (std::size_t k = 0; k < transient; ++k) x = r * x * (1.0 - x);
    for (std::size_t k = 0; k < n_keep; ++k) {
      scan.orbits(i, static_cast<Eigen::Index>(k)) = x;
      x = r * x * (1.0 - x);
    }
  }
  return scan;
}

namespace detail {

// Ordinal pattern index of a window, ties broken by earlier index. Encodes the
// argsort permutation in factorial base.
inline std::size_t ordinal_pattern(const double* w, int d) {
  int order[8];
  for (int i = 0; i < d; ++i) order[i] = i;
  std::stable_sort(order, order + d, [&](int a, int b) { return w[a] < w[b]; });
  std::size_t code = 0;
  for (int i = 0; i < d; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < d; ++j)
      if (order[j] < order[i]) ++smaller;
    code = code * static_cast<std::size_t>(d - i) + static_cast<std::size_t>(smaller);
  }
  return code;
}

inline double shannon_entropy(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace detail

// Shannon entropy (nats) of the empirical ordinal-pattern distribution over
// all length-d windows of the series.
inline double permutation_entropy(const Eigen::VectorXd& series, int d) {
  require(d >= 2 && d <= 7, "permutation_entropy: d must be in {2..7}");
  require(series.size() >= d, "permutation_entropy: series shorter than pattern length");
  std::size_t n_pat = 1;
  for (int i = 2; i <= d; ++i) n_pat *= static_cast<std::size_t>(i);
  std::vector<double> counts(n_pat, 0.0);
  const Eigen::Index n = series.size() - d + 1;
  for (Eigen::Index i = 0; i < n; ++i) counts[detail::ordinal_pattern(series.data() + i, d)] += 1.0;
  return detail::shannon_entropy(counts, static_cast<double>(n));
}

// Sliding variant: entropy of each length-`window` segment.
inline std::vector<double> permutation_entropy_sliding(const Eigen::VectorXd& series, int d,
                                                       std::size_t window) {
  require(window >= static_cast<std::size_t>(d), "permutation_entropy: window shorter than d");
  require(static_cast<std::size_t>(series.size()) >= window,
          "permutation_entropy: series shorter than window");
  std::vector<double> out;
  for (std::size_t start = 0; start + window <= static_cast<std::size_t>(series.size()); ++start)
    out.push_back(permutation_entropy(series.segment(static_cast<Eigen::Index>(start),
                                                     static_cast<Eigen::Index>(window)),
                                      d));
  return out;
}

// Histogram Shannon entropy per sliding window; bins span the window's own
// min..max. A zero-width range puts all mass in one bin, entropy 0.
inline std::vector<double> sliding_entropy(const Eigen::VectorXd& series, std::size_t window,
                                           int bins) {
  require(bins >= 2, "sliding_entropy: bins must be >= 2");
  require(window >= static_cast<std::size_t>(bins), "sliding_entropy: window must be >= bins");
  require(static_cast<std::size_t>(series.size()) >= window, "sliding_entropy: series too short");
  std::vector<double> out;
  std::vector<double> counts(static_cast<std::size_t>(bins));
  for (std::size_t start = 0; start + window <= static_cast<std::size_t>(series.size()); ++start) {
    const auto seg = series.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(window));
    const double lo = seg.minCoeff(), hi = seg.maxCoeff();
    if (hi <= lo) {
      out.push_back(0.0);
      continue;
    }
    std::fill(counts.begin(), counts.end(), 0.0);
    for (Eigen::Index i = 0; i < seg.size(); ++i) {
      auto b = static_cast<int>((seg[i] - lo) / (hi - lo) * bins);
      b = std::clamp(b, 0, bins - 1);
      counts[static_cast<std::size_t>(b)] += 1.0;
    }
    out.push_back(detail::shannon_entropy(counts, static_cast<double>(window)));
  }
  return out;
}

// RD(t): fraction of all states within epsilon of x(t). Always >= 1/T from the
// self-match.
inline std::vector<double> recurrence_density(const Eigen::MatrixXd& states, double epsilon) {
  require(epsilon > 0, "recurrence_density: epsilon must be > 0");
  const Eigen::Index t_len = states.rows();
  std::vector<double> rd(static_cast<std::size_t>(t_len), 0.0);
  const double eps2 = epsilon * epsilon;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    std::size_t cnt = 0;
    for (Eigen::Index s = 0; s < t_len; ++s)
      if ((states.row(s) - states.row(t)).squaredNorm() < eps2) ++cnt;
    rd[static_cast<std::size_t>(t)] = static_cast<double>(cnt) / static_cast<double>(t_len);
  }
  return rd;
}

// Sign of the forward difference, thresholded at +-epsilon.
inline std::vector<int> symbolic_derivative(const Eigen::VectorXd& series, double epsilon) {
  require(epsilon >= 0, "symbolic_derivative: epsilon must be >= 0");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(series.size() - 1, 0)));
  for (Eigen::Index t = 0; t + 1 < series.size(); ++t) {
    const double diff = series[t + 1] - series[t];
    out.push_back(diff > epsilon ? 1 : (diff < -epsilon ? -1 : 0));
  }
  return out;
}

struct CrossCorrelation {
  Eigen::MatrixXd corr;  // N x (max_lag + 1); entry (i, tau) vs u(t - tau)
  bool had_zero_variance = false;
};

inline CrossCorrelation input_state_xcorr(const Eigen::MatrixXd& states,
                                          const Eigen::VectorXd& input, int max_lag) {
  const Eigen::Index t_len = states.rows();
  require(input.size() == t_len, "input_state_xcorr: length mismatch");
  require(max_lag >= 0 && max_lag < t_len, "input_state_xcorr: max_lag must be < T");
  CrossCorrelation result;
  result.corr.resize(states.cols(), max_lag + 1);
  for (int tau = 0; tau <= max_lag; ++tau) {
    const Eigen::Index n = t_len - tau;
    const auto u = input.segment(0, n);
    const double mu_u = u.mean();
    const double sd_u = std::sqrt((u.array() - mu_u).square().sum() / static_cast<double>(n));
    for (Eigen::Index i = 0; i < states.cols(); ++i) {
      const auto x = states.col(i).segment(tau, n);
      const double mu_x = x.mean();
      const double sd_x = std::sqrt((x.array() - mu_x).square().sum() / static_cast<double>(n));
      if (sd_u <= 0 || sd_x <= 0) {
        result.corr(i, tau) = 0.0;
        result.had_zero_variance = true;
        continue;
      }
      const double cov =
          ((x.array() - mu_x) * (u.array() - mu_u)).sum() / static_cast<double>(n);
      result.corr(i, tau) = cov / (sd_u * sd_x);
    }
  }
  return result;
}

}  // namespace rbench
