#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "rbench/common.hpp"
#include "rbench/timeseries.hpp"

namespace rbench {

using Vec3 = Eigen::Vector3d;

struct Lorenz {
  double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
};

struct Rossler {
  double a = 0.2, b = 0.2, c = 5.7;
};

struct Chen {
  double a = 35.0, b = 3.0, c = 28.0;
};

struct Chua {
  double alpha = 9.0, beta = 14.0, m0 = -1.143, m1 = -0.714;
};

struct MackeyGlass {
  double beta = 0.2, gamma = 0.1, n = 10.0, tau_delay = 17.0;
};

struct Logistic {
  double r = 3.9;
};

using SystemSpec = std::variant<Lorenz, Rossler, Chen, Chua, MackeyGlass, Logistic>;

inline std::string system_name(const SystemSpec& spec) {
  struct V {
    std::string operator()(const Lorenz&) const { return "lorenz"; }
    std::string operator()(const Rossler&) const { return "rossler"; }
    std::string operator()(const Chen&) const { return "chen"; }
    std::string operator()(const Chua&) const { return "chua"; }
    std::string operator()(const MackeyGlass&) const { return "mackey_glass"; }
    std::string operator()(const Logistic&) const { return "logistic"; }
  };
  return std::visit(V{}, spec);
}

inline int state_dim(const SystemSpec& spec) {
  if (std::holds_alternative<MackeyGlass>(spec) || std::holds_alternative<Logistic>(spec)) return 1;
  return 3;
}

// Piecewise-linear Chua diode characteristic: slope m0 inside |x|<1, m1 outside.
inline double chua_nonlinearity(double x, double m0, double m1) {
  return m1 * x + 0.5 * (m0 - m1) * (std::abs(x + 1.0) - std::abs(x - 1.0));
}

inline Vec3 vector_field(const Lorenz& p, const Vec3& s) {
  return {p.sigma * (s.y() - s.x()), s.x() * (p.rho - s.z()) - s.y(), s.x() * s.y() - p.beta * s.z()};
}

inline Vec3 vector_field(const Rossler& p, const Vec3& s) {
  return {-(s.y() + s.z()), s.x() + p.a * s.y(), p.b + s.z() * (s.x() - p.c)};
}

inline Vec3 vector_field(const Chen& p, const Vec3& s) {
  return {p.a * (s.y() - s.x()), (p.c - p.a) * s.x() - s.x() * s.z() + p.c * s.y(),
          s.x() * s.y() - p.b * s.z()};
}

inline Vec3 vector_field(const Chua& p, const Vec3& s) {
  const double f = chua_nonlinearity(s.x(), p.m0, p.m1);
  return {p.alpha * (s.y() - s.x() - f), s.x() - s.y() + s.z(), -p.beta * s.y()};
}

inline Vec3 flow_field(const SystemSpec& spec, const Vec3& s) {
  if (const auto* p = std::get_if<Lorenz>(&spec)) return vector_field(*p, s);
  if (const auto* p = std::get_if<Rossler>(&spec)) return vector_field(*p, s);
  if (const auto* p = std::get_if<Chen>(&spec)) return vector_field(*p, s);
  if (const auto* p = std::get_if<Chua>(&spec)) return vector_field(*p, s);
  throw ValidationError("flow_field: not a 3-D flow: " + system_name(spec));
}

inline constexpr double kBlowupLimit = 1e6;

// One classical RK4 step of a 3-D flow.
template <typename Field>
Vec3 rk4_step(const Field& f, const Vec3& x, double dt) {
  const Vec3 k1 = f(x);
  const Vec3 k2 = f(x + (0.5 * dt) * k1);
  const Vec3 k3 = f(x + (0.5 * dt) * k2);
  const Vec3 k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Vec3 rk4_step(const SystemSpec& spec, const Vec3& x, double dt) {
  require(!std::holds_alternative<Logistic>(spec), "rk4_step: logistic map is discrete");
  require(!std::holds_alternative<MackeyGlass>(spec),
          "rk4_step: Mackey-Glass needs a delay history; use simulate");
  Vec3 next = rk4_step([&](const Vec3& s) { return flow_field(spec, s); }, x, dt);
  if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kBlowupLimit)
    throw IntegrationError("rk4_step: state blow-up", 0);
  return next;
}

struct SamplingPlan {
  double dt = 0.02;
  std::size_t n_total = 8000;   // samples kept after washout
  std::size_t washout = 2000;   // leading steps discarded
  std::vector<double> x0 = {1.0, 1.0, 1.0};
};

namespace detail {

// Delay line for Mackey-Glass: stores samples at step resolution and reads
// x(t - tau) by linear interpolation. History before t=0 is the constant x0.
class DelayBuffer {
 public:
  DelayBuffer(double x0, double tau, double dt) : dt_(dt), tau_(tau) {
    const auto cap = static_cast<std::size_t>(std::ceil(tau / dt)) + 2;
    buf_.assign(cap, x0);
  }

  void push(double v) {
    buf_[head_] = v;
    head_ = (head_ + 1) % buf_.size();
    ++count_;
  }

  // Value tau back from the most recent pushed sample time.
  double delayed() const {
    const double steps_back = tau_ / dt_;
    const auto k = static_cast<std::size_t>(std::floor(steps_back));
    const double frac = steps_back - static_cast<double>(k);
    const double a = at_back(k);
    const double b = at_back(k + 1);
    return a + frac * (b - a);
  }

 private:
  double at_back(std::size_t k) const {
    // k steps behind the newest entry; clamp into the constant history.
    if (k >= count_) k = count_ - 1;
    const std::size_t idx = (head_ + buf_.size() - 1 - k) % buf_.size();
    return buf_[idx];
  }

  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  double dt_, tau_;
};

}  // namespace detail

// Fixed-step trajectory sampler. Flows report the state before stepping, so a
// single-sample plan returns x0. Mackey-Glass freezes the interpolated delayed
// value within each RK4 step; Logistic is the dt=1 discrete case.
inline TimeSeries simulate(const SystemSpec& spec, const SamplingPlan& plan) {
  require(plan.n_total > 0, "simulate: n_total must be > 0");
  require(plan.dt > 0, "simulate: dt must be > 0");
  const std::string label = system_name(spec);

  if (const auto* lg = std::get_if<Logistic>(&spec)) {
    require(lg->r >= 0.0 && lg->r <= 4.0, "simulate: logistic r must be in [0,4]");
    require(!plan.x0.empty(), "simulate: x0 required");
    double x = plan.x0.front();
    for (std::size_t i = 0; i < plan.washout; ++i) x = lg->r * x * (1.0 - x);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(plan.n_total), 1);
    for (std::size_t i = 0; i < plan.n_total; ++i) {
      out(static_cast<Eigen::Index>(i), 0) = x;
      x = lg->r * x * (1.0 - x);
    }
    return TimeSeries(std::move(out), 1.0, label);
  }

  if (const auto* mg = std::get_if<MackeyGlass>(&spec)) {
    require(mg->tau_delay > 0, "simulate: Mackey-Glass tau must be > 0");
    require(!plan.x0.empty(), "simulate: x0 required");
    double x = plan.x0.front();
    detail::DelayBuffer hist(x, mg->tau_delay, plan.dt);
    hist.push(x);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(plan.n_total), 1);
    const std::size_t total = plan.washout + plan.n_total;
    for (std::size_t i = 0; i < total; ++i) {
      if (i >= plan.washout) out(static_cast<Eigen::Index>(i - plan.washout), 0) = x;
      const double xd = hist.delayed();
      auto rhs = [&](double v) { return mg->beta * xd / (1.0 + std::pow(xd, mg->n)) - mg->gamma * v; };
      const double k1 = rhs(x);
      const double k2 = rhs(x + 0.5 * plan.dt * k1);
      const double k3 = rhs(x + 0.5 * plan.dt * k2);
      const double k4 = rhs(x + plan.dt * k3);
      x += (plan.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(x) || std::abs(x) > kBlowupLimit)
        throw IntegrationError("simulate: Mackey-Glass blow-up", i);
      hist.push(x);
    }
    return TimeSeries(std::move(out), plan.dt, label);
  }

  require(plan.x0.size() == 3, "simulate: 3-D flow needs a 3-vector x0");
  Vec3 s(plan.x0[0], plan.x0[1], plan.x0[2]);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(plan.n_total), 3);
  const std::size_t total = plan.washout + plan.n_total;
  for (std::size_t i = 0; i < total; ++i) {
    if (i >= plan.washout) out.row(static_cast<Eigen::Index>(i - plan.washout)) = s.transpose();
    if (i + 1 == total) break;  // state before stepping is the sample
    s = rk4_step([&](const Vec3& v) { return flow_field(spec, v); }, s, plan.dt);
    if (!s.allFinite() || s.cwiseAbs().maxCoeff() > kBlowupLimit)
      throw IntegrationError("simulate: " + label + " blow-up", i);
  }
  return TimeSeries(std::move(out), plan.dt, label);
}

// Logistic-map orbit after discarding a transient; values stay in [0,1].
inline TimeSeries logistic_orbit(double r, double x0, std::size_t n, std::size_t transient) {
  require(r >= 0.0 && r <= 4.0, "logistic_orbit: r must be in [0,4]");
  require(x0 > 0.0 && x0 < 1.0, "logistic_orbit: x0 must be in (0,1)");
  SamplingPlan plan;
  plan.dt = 1.0;
  plan.n_total = n;
  plan.washout = transient;
  plan.x0 = {x0};
  return simulate(Logistic{r}, plan);
}

// Takens delay embedding: row n is (x(n), x(n+tau), ..., x(n+(m-1)tau)).
inline Eigen::MatrixXd delay_embed(const Eigen::VectorXd& series, int m, int tau_lag) {
  require(m >= 1, "delay_embed: m must be >= 1");
  require(tau_lag >= 1, "delay_embed: tau_lag must be >= 1");
  const Eigen::Index t = series.size();
  const Eigen::Index span = static_cast<Eigen::Index>(m - 1) * tau_lag;
  require(t > span, "delay_embed: series too short; need more than " + std::to_string(span) +
                        " samples, got " + std::to_string(t));
  const Eigen::Index rows = t - span;
  Eigen::MatrixXd e(rows, m);
  for (int j = 0; j < m; ++j) e.col(j) = series.segment(static_cast<Eigen::Index>(j) * tau_lag, rows);
  return e;
}

inline Eigen::MatrixXd delay_embed(const TimeSeries& ts, int m, int tau_lag) {
  require(ts.dims() == 1, "delay_embed: expects a scalar series");
  return delay_embed(Eigen::VectorXd(ts.data.col(0)), m, tau_lag);
}

}  // namespace rbench
