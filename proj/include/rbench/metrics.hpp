#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbench/chaos.hpp"
#include "rbench/common.hpp"

namespace rbench {

// Population (1/T) variance convention throughout.
inline double population_std(const Eigen::VectorXd& y) {
  const double mu = y.mean();
  return std::sqrt((y.array() - mu).square().sum() / static_cast<double>(y.size()));
}

inline double nrmse(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  require(y.size() == yhat.size(), "nrmse: length mismatch");
  require(y.size() >= 2, "nrmse: need at least 2 samples");
  const double sigma = population_std(y);
  if (sigma <= 0) throw ComputeError("nrmse: degenerate target (sigma = 0)");
  const double rmse = std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
  return rmse / sigma;
}

// Multivariate series: per-channel NRMSE averaged.
inline double nrmse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& yhat) {
  require(y.rows() == yhat.rows() && y.cols() == yhat.cols(), "nrmse: shape mismatch");
  double acc = 0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) acc += nrmse(Eigen::VectorXd(y.col(j)), Eigen::VectorXd(yhat.col(j)));
  return acc / static_cast<double>(y.cols());
}

struct VptResult {
  double time = 0.0;        // tau * dt
  double normalized = 0.0;  // tau * dt / lyapunov_time, when given
  std::size_t steps = 0;
};

// Valid prediction time: largest run of leading steps whose channel-normalized
// error norm stays below epsilon.
inline VptResult vpt(const Eigen::MatrixXd& y, const Eigen::MatrixXd& yhat, double epsilon,
                     double dt, std::optional<double> lyapunov_time = {}) {
  require(epsilon > 0, "vpt: epsilon must be > 0");
  require(y.rows() == yhat.rows() && y.cols() == yhat.cols(), "vpt: shape mismatch");
  Eigen::VectorXd sigma(y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    sigma[j] = population_std(Eigen::VectorXd(y.col(j)));
    if (sigma[j] <= 0) throw ComputeError("vpt: degenerate target channel");
  }
  std::size_t tau = 0;
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    const double err = ((y.row(t) - yhat.row(t)).array() / sigma.transpose().array()).matrix().norm();
    if (err >= epsilon) break;
    ++tau;
  }
  VptResult r;
  r.steps = tau;
  r.time = static_cast<double>(tau) * dt;
  if (lyapunov_time) r.normalized = r.time / *lyapunov_time;
  return r;
}

// Attractor deviation: cells of a shared occupancy grid visited by exactly one
// of the two 3-D trajectories.
inline long adev(const Eigen::MatrixXd& traj_true, const Eigen::MatrixXd& traj_pred,
                 int cells_per_axis) {
  require(traj_true.cols() == 3 && traj_pred.cols() == 3, "adev: expects 3-D trajectories");
  require(cells_per_axis >= 2, "adev: cells_per_axis must be >= 2");
  Eigen::Vector3d lo = traj_true.colwise().minCoeff().cwiseMin(traj_pred.colwise().minCoeff());
  Eigen::Vector3d hi = traj_true.colwise().maxCoeff().cwiseMax(traj_pred.colwise().maxCoeff());
  for (int k = 0; k < 3; ++k)
    if (hi[k] <= lo[k]) hi[k] = lo[k] + 1.0;  // flat axis: single-slab box

  const auto n = static_cast<std::size_t>(cells_per_axis);
  std::vector<unsigned char> occ(n * n * n, 0);
  auto mark = [&](const Eigen::MatrixXd& traj, unsigned char bit) {
    for (Eigen::Index i = 0; i < traj.rows(); ++i) {
      std::size_t idx = 0;
      for (int k = 0; k < 3; ++k) {
        auto c = static_cast<long>((traj(i, k) - lo[k]) / (hi[k] - lo[k]) * cells_per_axis);
        c = std::clamp<long>(c, 0, cells_per_axis - 1);
        idx = idx * n + static_cast<std::size_t>(c);
      }
      occ[idx] |= bit;
    }
  };
  mark(traj_true, 1);
  mark(traj_pred, 2);
  long count = 0;
  for (unsigned char v : occ)
    if (v == 1 || v == 2) ++count;
  return count;
}

namespace detail {

// Iterative radix-2 FFT, decimation in time.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

struct Psd {
  std::vector<double> freq;   // one-sided, cycles per time unit
  std::vector<double> power;  // density; sum(power * df) recovers windowed signal power
};

// Welch's averaged periodogram with a periodic Hann window, one-sided density
// normalization 1/(fs * sum(w^2)). Segments are not detrended so Parseval
// holds exactly for the windowed estimator.
inline Psd psd_welch(const Eigen::VectorXd& series, std::size_t segment_len,
                     double overlap_fraction, double dt) {
  require(dt > 0, "psd_welch: dt must be > 0");
  require(segment_len >= 8, "psd_welch: segment_len must be >= 8");
  require(static_cast<std::size_t>(series.size()) >= segment_len,
          "psd_welch: series shorter than one segment");
  require(overlap_fraction >= 0.0 && overlap_fraction <= 0.9,
          "psd_welch: overlap must be in [0, 0.9]");

  const double fs = 1.0 / dt;
  const std::size_t nfft = detail::next_pow2(segment_len);
  const std::size_t nfreq = nfft / 2 + 1;
  std::vector<double> window(segment_len);
  double u_norm = 0.0;
  for (std::size_t i = 0; i < segment_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(segment_len));
    u_norm += window[i] * window[i];
  }

  const auto noverlap = static_cast<std::size_t>(std::floor(static_cast<double>(segment_len) * overlap_fraction));
  const std::size_t hop = std::max<std::size_t>(segment_len - noverlap, 1);

  std::vector<double> acc(nfreq, 0.0);
  std::size_t segments = 0;
  std::vector<std::complex<double>> buf(nfft);
  for (std::size_t start = 0; start + segment_len <= static_cast<std::size_t>(series.size());
       start += hop) {
    for (std::size_t i = 0; i < segment_len; ++i)
      buf[i] = series[static_cast<Eigen::Index>(start + i)] * window[i];
    std::fill(buf.begin() + static_cast<long>(segment_len), buf.end(), std::complex<double>(0.0));
    detail::fft_inplace(buf);
    const double scale = 1.0 / (fs * u_norm);
    for (std::size_t k = 0; k < nfreq; ++k) {
      double p = std::norm(buf[k]) * scale;
      if (k != 0 && k != nfft / 2) p *= 2.0;
      acc[k] += p;
    }
    ++segments;
  }
  Psd out;
  out.freq.resize(nfreq);
  out.power.resize(nfreq);
  for (std::size_t k = 0; k < nfreq; ++k) {
    out.freq[k] = static_cast<double>(k) * fs / static_cast<double>(nfft);
    out.power[k] = acc[k] / static_cast<double>(segments);
  }
  return out;
}

// L2 distance between two spectra on the same frequency grid (trapezoid rule).
inline double psd_distance(const Psd& a, const Psd& b) {
  require(a.freq.size() == b.freq.size(), "psd_distance: frequency grid mismatch");
  for (std::size_t k = 0; k < a.freq.size(); ++k)
    require(std::abs(a.freq[k] - b.freq[k]) <= 1e-12 * std::max(1.0, std::abs(a.freq[k])),
            "psd_distance: frequency grid mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < a.freq.size(); ++k) {
    const double df = a.freq[k + 1] - a.freq[k];
    const double d0 = a.power[k] - b.power[k];
    const double d1 = a.power[k + 1] - b.power[k + 1];
    acc += 0.5 * (d0 * d0 + d1 * d1) * df;
  }
  return std::sqrt(acc);
}

struct LyapunovDeviation {
  double lambda_true = 0.0;
  double lambda_pred = 0.0;
  double delta = 0.0;
};

struct RosensteinSettings {
  int m = 3;
  int tau_lag = 5;
  int k_max = 100;
  int theiler = 15;
  std::optional<std::pair<int, int>> fit_range;
};

inline LyapunovDeviation lyapunov_deviation(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat,
                                            double dt, const RosensteinSettings& s = {}) {
  LyapunovDeviation out;
  try {
    out.lambda_true = lyapunov_rosenstein(y, s.m, s.tau_lag, dt, s.k_max, s.theiler, s.fit_range).lambda_max;
  } catch (const ComputeError& e) {
    throw ComputeError(std::string("lyapunov_deviation: true side failed: ") + e.what());
  }
  try {
    out.lambda_pred = lyapunov_rosenstein(yhat, s.m, s.tau_lag, dt, s.k_max, s.theiler, s.fit_range).lambda_max;
  } catch (const ComputeError& e) {
    throw ComputeError(std::string("lyapunov_deviation: predicted side failed: ") + e.what());
  }
  out.delta = std::abs(out.lambda_true - out.lambda_pred);
  return out;
}

struct BasicErrors {
  double mae = 0.0;
  double mape = 0.0;  // percent
  double r2 = 0.0;
  double pearson = 0.0;
  std::size_t mape_skipped = 0;  // exact-zero targets excluded from MAPE
  bool mape_defined = true;
};

inline BasicErrors basic_errors(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  require(y.size() == yhat.size(), "basic_errors: length mismatch");
  require(y.size() >= 2, "basic_errors: need at least 2 samples");
  const auto n = static_cast<double>(y.size());
  BasicErrors e;
  e.mae = (y - yhat).cwiseAbs().sum() / n;

  double mape_acc = 0.0;
  std::size_t mape_n = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      ++e.mape_skipped;
      continue;
    }
    mape_acc += std::abs((y[i] - yhat[i]) / y[i]);
    ++mape_n;
  }
  if (mape_n == 0) {
    e.mape_defined = false;
    e.mape = std::numeric_limits<double>::quiet_NaN();
  } else {
    e.mape = 100.0 * mape_acc / static_cast<double>(mape_n);
  }

  const double mu = y.mean();
  const double ss_res = (y - yhat).squaredNorm();
  const double ss_tot = (y.array() - mu).square().sum();
  e.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : std::numeric_limits<double>::quiet_NaN();

  const double mu_h = yhat.mean();
  const double num = ((y.array() - mu).cwiseProduct(yhat.array() - mu_h)).sum();
  const double den = std::sqrt(ss_tot * (yhat.array() - mu_h).square().sum());
  e.pearson = den > 0 ? num / den : 0.0;
  return e;
}

// Classic DTW with unit steps {(1,0),(0,1),(1,1)} and absolute-difference
// local cost.
inline double dtw_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() >= 1 && b.size() >= 1, "dtw_distance: empty series");
  const Eigen::Index n = a.size(), m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(static_cast<std::size_t>(m) + 1, inf), cur(static_cast<std::size_t>(m) + 1, inf);
  prev[0] = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[static_cast<std::size_t>(j)] =
          cost + std::min({prev[static_cast<std::size_t>(j)], cur[static_cast<std::size_t>(j - 1)],
                           prev[static_cast<std::size_t>(j - 1)]});
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(m)];
}

// Discrete KL over Laplace-smoothed histograms (+1 count per bin) spanning the
// union range of both samples.
inline double kl_divergence(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat, int bins) {
  require(bins >= 2, "kl_divergence: bins must be >= 2");
  require(y.size() >= 1 && yhat.size() >= 1, "kl_divergence: empty series");
  const double lo = std::min(y.minCoeff(), yhat.minCoeff());
  double hi = std::max(y.maxCoeff(), yhat.maxCoeff());
  if (hi <= lo) hi = lo + 1.0;
  std::vector<double> p(static_cast<std::size_t>(bins), 1.0), q(static_cast<std::size_t>(bins), 1.0);
  auto binof = [&](double v) {
    auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
    return static_cast<std::size_t>(std::clamp(b, 0, bins - 1));
  };
  for (Eigen::Index i = 0; i < y.size(); ++i) p[binof(y[i])] += 1.0;
  for (Eigen::Index i = 0; i < yhat.size(); ++i) q[binof(yhat[i])] += 1.0;
  const double pn = static_cast<double>(y.size()) + bins;
  const double qn = static_cast<double>(yhat.size()) + bins;
  double kl = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double pp = p[static_cast<std::size_t>(b)] / pn;
    const double qq = q[static_cast<std::size_t>(b)] / qn;
    kl += pp * std::log(pp / qq);
  }
  return kl;
}

}  // namespace rbench
