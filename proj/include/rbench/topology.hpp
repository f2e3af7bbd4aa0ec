#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rbench/common.hpp"
#include "rbench/rng.hpp"

namespace rbench {

struct ReservoirConfig;  // completed in reservoir.hpp

enum class WeightDist { Uniform, Normal };

struct DenseSparse {
  int n = 300;
  double connectivity = 0.05;
  WeightDist dist = WeightDist::Uniform;
};

struct SimpleCycle {
  int n = 300;
  double weight = 0.8;
};

struct CycleJumps {
  int n = 300;
  double cycle_weight = 0.8;
  double jump_weight = 0.8;
  int jump_size = 15;
};

struct SmallWorld {
  int n = 300;
  int degree = 6;          // ring-lattice degree E, even
  double rewire_prob = 0.1;
  double weight_scale = 0.8;
};

struct Mci {
  int n_sub = 300;
  double cycle_weight = 0.8;   // mu
  double inter_weight = 0.8;   // eta
  double input_balance = 0.5;  // theta: input scaling ratio of sub-reservoir 2
};

enum class DeepMode { Stacked, InputToAll, Grouped };

struct ParallelTopology {
  std::vector<ReservoirConfig> members;
  int group_size = 1;  // q; members * q must equal the input dimension
  int buffer = 1;      // b; adjacent context fed to each member
};

struct DeepTopology {
  std::vector<ReservoirConfig> layers;
  DeepMode mode = DeepMode::Stacked;
};

using TopologySpec =
    std::variant<DenseSparse, SimpleCycle, CycleJumps, SmallWorld, Mci, ParallelTopology, DeepTopology>;

inline bool is_composite(const TopologySpec& t) {
  return std::holds_alternative<ParallelTopology>(t) || std::holds_alternative<DeepTopology>(t);
}

struct BuiltTopology {
  Eigen::MatrixXd w;
  std::size_t nonzeros = 0;
};

namespace detail {

inline std::size_t count_nonzeros(const Eigen::MatrixXd& w) {
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w.data()[i] != 0.0) ++c;
  return c;
}

inline Eigen::MatrixXd ring_matrix(int n, double weight) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, (i + 1) % n) = weight;
  return w;
}

}  // namespace detail

// Recurrent matrix with exactly the nonzero pattern the variant prescribes.
// The rng only matters for the random variants; structured ones are
// deterministic.
inline BuiltTopology build_weights(const TopologySpec& topology, Rng rng) {
  struct Builder {
    Rng rng;

    BuiltTopology operator()(const DenseSparse& t) {
      require(t.n >= 2, "DenseSparse: n must be >= 2");
      require(t.connectivity > 0.0 && t.connectivity <= 1.0, "DenseSparse: connectivity in (0,1]");
      Eigen::MatrixXd w(t.n, t.n);
      for (int i = 0; i < t.n; ++i) {
        for (int j = 0; j < t.n; ++j) {
          const bool keep = rng.uniform01() < t.connectivity;
          const double v = t.dist == WeightDist::Uniform ? rng.uniform_sym() : rng.normal();
          w(i, j) = keep ? v : 0.0;
        }
      }
      const std::size_t nnz = detail::count_nonzeros(w);
      return {std::move(w), nnz};
    }

    BuiltTopology operator()(const SimpleCycle& t) {
      require(t.n >= 2, "SimpleCycle: n must be >= 2");
      Eigen::MatrixXd w = detail::ring_matrix(t.n, t.weight);
      return {std::move(w), static_cast<std::size_t>(t.n)};
    }

    BuiltTopology operator()(const CycleJumps& t) {
      require(t.n >= 2, "CycleJumps: n must be >= 2");
      require(t.jump_size >= 2 && t.jump_size <= t.n - 1, "CycleJumps: jump_size in [2, N-1]");
      Eigen::MatrixXd w = detail::ring_matrix(t.n, t.cycle_weight);
      // Bidirectional chords every jump_size nodes around the ring.
      const int chords = t.n / t.jump_size;
      for (int k = 0; k < chords; ++k) {
        const int i = k * t.jump_size;
        const int j = (i + t.jump_size) % t.n;
        w(i, j) = t.jump_weight;
        w(j, i) = t.jump_weight;
      }
      const std::size_t nnz = detail::count_nonzeros(w);
      return {std::move(w), nnz};
    }

    BuiltTopology operator()(const SmallWorld& t) {
      require(t.n >= 4, "SmallWorld: n must be >= 4");
      require(t.degree >= 2 && t.degree % 2 == 0 && t.degree < t.n,
              "SmallWorld: degree must be even, >= 2 and < N");
      require(t.rewire_prob >= 0.0 && t.rewire_prob <= 1.0, "SmallWorld: p in [0,1]");
      // Watts-Strogatz: ring lattice of degree E, each rightward edge rewired
      // with probability p to a uniformly random non-duplicate target.
      const int n = t.n;
      std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
      auto connected = [&](int a, int c) {
        const auto& row = adj[static_cast<std::size_t>(a)];
        return std::find(row.begin(), row.end(), c) != row.end();
      };
      auto link = [&](int a, int c) {
        adj[static_cast<std::size_t>(a)].push_back(c);
        adj[static_cast<std::size_t>(c)].push_back(a);
      };
      for (int d = 1; d <= t.degree / 2; ++d)
        for (int i = 0; i < n; ++i) link(i, (i + d) % n);
      for (int d = 1; d <= t.degree / 2; ++d) {
        for (int i = 0; i < n; ++i) {
          if (rng.uniform01() >= t.rewire_prob) continue;
          const int old = (i + d) % n;
          // Leave multi-edges and self-loops out; give up after a few draws
          // when the node is nearly saturated.
          for (int attempt = 0; attempt < 32; ++attempt) {
            const int fresh = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            if (fresh == i || connected(i, fresh)) continue;
            auto& ri = adj[static_cast<std::size_t>(i)];
            auto& ro = adj[static_cast<std::size_t>(old)];
            ri.erase(std::find(ri.begin(), ri.end(), old));
            ro.erase(std::find(ro.begin(), ro.end(), i));
            link(i, fresh);
            break;
          }
        }
      }
      Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j : adj[static_cast<std::size_t>(i)])
          if (w(i, j) == 0.0) w(i, j) = rng.uniform_sym() * t.weight_scale;
      const std::size_t nnz = detail::count_nonzeros(w);
      return {std::move(w), nnz};
    }

    BuiltTopology operator()(const Mci& t) {
      require(t.n_sub >= 2, "Mci: n_sub must be >= 2");
      const int n = 2 * t.n_sub;
      Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
      w.topLeftCorner(t.n_sub, t.n_sub) = detail::ring_matrix(t.n_sub, t.cycle_weight);
      w.bottomRightCorner(t.n_sub, t.n_sub) = detail::ring_matrix(t.n_sub, t.cycle_weight);
      // One cross edge each way between neuron 0 of the two rings: 2N+2
      // nonzeros total.
      w(0, t.n_sub) = t.inter_weight;
      w(t.n_sub, 0) = t.inter_weight;
      return {std::move(w), static_cast<std::size_t>(n) + 2};
    }

    BuiltTopology operator()(const ParallelTopology&) {
      throw ValidationError("build_weights: parallel topology is built per member");
    }
    BuiltTopology operator()(const DeepTopology&) {
      throw ValidationError("build_weights: deep topology is built per layer");
    }
  };
  return std::visit(Builder{rng}, topology);
}

// Upper bound on the spectral radius from Gershgorin discs.
inline double gershgorin_bound(const Eigen::MatrixXd& w) {
  require(w.rows() == w.cols(), "gershgorin_bound: matrix must be square");
  double bound = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const double radius = w.row(i).cwiseAbs().sum() - std::abs(w(i, i));
    bound = std::max(bound, std::abs(w(i, i)) + radius);
  }
  return bound;
}

struct SpectralEstimate {
  double rho = 0.0;
  bool converged = false;
  bool norm_fallback = false;  // ||W||_2 used instead (over-estimate of rho)
  int iterations = 0;
};

// Dominant eigenvalue magnitude by power iteration with a two-step Ritz
// extraction, which also converges for complex-conjugate dominant pairs where
// the plain Rayleigh quotient oscillates. Falls back to the 2-norm (power
// iteration on W^T W), a safe over-estimate, when the iteration stalls.
inline SpectralEstimate estimate_spectral_radius(const Eigen::MatrixXd& w, double tol = 1e-8,
                                                 int max_iter = 10000) {
  require(w.rows() == w.cols(), "estimate_spectral_radius: matrix must be square");
  const Eigen::Index n = w.rows();
  SpectralEstimate out;

  Rng rng(0x5eed5eedull);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform_sym();
  v.normalize();

  double prev = -1.0;
  int stable = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd w1 = w * v;
    const double n1 = w1.norm();
    if (n1 == 0.0) {
      // v landed in the kernel; one reseed, then accept zero growth.
      if (it == 1) {
        for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform_sym();
        v.normalize();
        continue;
      }
      out.rho = 0.0;
      out.converged = true;
      out.iterations = it;
      return out;
    }
    const Eigen::VectorXd w2 = w * w1;
    // Fit w2 ~ a*w1 + b*v; the roots of x^2 - a x - b track the dominant pair.
    Eigen::Matrix2d gram;
    gram << w1.dot(w1), w1.dot(v), v.dot(w1), v.dot(v);
    Eigen::Vector2d rhs(w1.dot(w2), v.dot(w2));
    double est;
    const double det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0);
    if (std::abs(det) > 1e-14 * gram(0, 0) * gram(1, 1)) {
      const Eigen::Vector2d ab = gram.inverse() * rhs;
      const std::complex<double> disc = std::sqrt(std::complex<double>(ab[0] * ab[0] + 4.0 * ab[1], 0.0));
      const std::complex<double> r1 = 0.5 * (ab[0] + disc);
      const std::complex<double> r2 = 0.5 * (ab[0] - disc);
      est = std::max(std::abs(r1), std::abs(r2));
    } else {
      est = n1;  // v is (numerically) an eigenvector already
    }
    const double n2 = w2.norm();
    if (n2 == 0.0) {
      out.rho = 0.0;
      out.converged = true;
      out.iterations = it;
      return out;
    }
    v = w2 / n2;
    if (prev >= 0 && std::abs(est - prev) <= tol * std::max(1.0, est)) {
      if (++stable >= 2) {
        out.rho = est;
        out.converged = true;
        out.iterations = it;
        return out;
      }
    } else {
      stable = 0;
    }
    prev = est;
  }

  // Stalled: report the 2-norm instead.
  Eigen::VectorXd u(n);
  Rng rng2(0xfa11bacull);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = rng2.uniform_sym();
  u.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd t = w.transpose() * (w * u);
    const double nt = t.norm();
    if (nt == 0.0) break;
    t /= nt;
    if (std::abs(nt - sigma2) <= tol * std::max(1.0, nt)) {
      sigma2 = nt;
      break;
    }
    sigma2 = nt;
    u = t;
  }
  out.rho = std::sqrt(sigma2);
  out.norm_fallback = true;
  out.converged = false;
  out.iterations = max_iter;
  return out;
}

// Largest singular value via power iteration on W^T W.
inline double spectral_norm(const Eigen::MatrixXd& w, double tol = 1e-10, int max_iter = 20000) {
  Rng rng(0x51605eedull);
  Eigen::VectorXd u(w.cols());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.uniform_sym();
  u.normalize();
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd t = w.transpose() * (w * u);
    const double nt = t.norm();
    if (nt == 0.0) return 0.0;
    t /= nt;
    if (std::abs(nt - prev) <= tol * std::max(1.0, nt)) return std::sqrt(nt);
    prev = nt;
    u = t;
  }
  return std::sqrt(prev);
}

// Rescales W so its spectral radius matches rho_target within tol.
inline Eigen::MatrixXd scale_spectral_radius(const Eigen::MatrixXd& w, double rho_target,
                                             double tol = 1e-8) {
  require(rho_target > 0, "scale_spectral_radius: target must be > 0");
  const SpectralEstimate est = estimate_spectral_radius(w, std::min(tol, 1e-8));
  if (!est.converged && !est.norm_fallback)
    throw ComputeError("scale_spectral_radius: power iteration failed, last estimate " +
                       std::to_string(est.rho));
  if (est.rho <= 0)
    throw ComputeError("scale_spectral_radius: spectral radius is zero, cannot reach target");
  return w * (rho_target / est.rho);
}

}  // namespace rbench
