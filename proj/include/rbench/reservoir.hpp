#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rbench/common.hpp"
#include "rbench/rng.hpp"
#include "rbench/timeseries.hpp"
#include "rbench/topology.hpp"

#include <json.hpp>

namespace rbench {

// Declarative description of one reservoir; the seed fully determines every
// weight matrix. spectral_radius empty means the construction weights are kept
// as built.
struct ReservoirConfig {
  TopologySpec topology = DenseSparse{};
  std::optional<double> spectral_radius = 0.95;
  double input_scaling = 0.2;
  double bias_scale = 0.1;
  double leak = 0.8;  // alpha in (0, 1]
  bool feedback = false;
  std::optional<Eigen::VectorXd> param_channel;
  std::uint64_t seed = 1;
};

inline void validate(const ReservoirConfig& cfg) {
  require(cfg.leak > 0.0 && cfg.leak <= 1.0, "ReservoirConfig: leak must be in (0,1]");
  if (cfg.spectral_radius) require(*cfg.spectral_radius > 0, "ReservoirConfig: spectral_radius must be > 0");
  if (const auto* p = std::get_if<ParallelTopology>(&cfg.topology)) {
    require(!p->members.empty(), "ParallelTopology: needs at least one member");
    require(p->group_size >= 1, "ParallelTopology: group_size must be >= 1");
    require(p->buffer >= 0, "ParallelTopology: buffer must be >= 0");
  }
  if (const auto* d = std::get_if<DeepTopology>(&cfg.topology))
    require(!d->layers.empty(), "DeepTopology: needs at least one layer");
}

struct ReservoirRun {
  Eigen::MatrixXd states;  // (T - warmup) x N_total, aligned with inputs[warmup..]
  std::size_t washout_used = 0;
  std::string config_fingerprint;
};

enum class Activation { Tanh, Identity };

nlohmann::json to_json(const ReservoirConfig& cfg);
ReservoirConfig reservoir_config_from_json(const nlohmann::json& j);
std::string fingerprint(const ReservoirConfig& cfg);

// Runtime reservoir built from a config: flat single matrix, parallel members
// on buffered input slices, or a deep stack.
class ReservoirModel {
 public:
  struct Member {
    Eigen::MatrixXd w;
    Eigen::MatrixXd w_in;
    Eigen::VectorXd bias;
    Eigen::MatrixXd w_back;   // 0 x 0 when feedback is off
    Eigen::MatrixXd w_param;  // 0 x 0 when no parameter channel
    double leak = 1.0;
    Eigen::VectorXd gain;     // intrinsic-plasticity gain, 1 by default
    Eigen::VectorXd ip_bias;  // intrinsic-plasticity bias, 0 by default
  };

  enum class Mode { Single, Parallel, DeepStacked, DeepInputToAll, DeepGrouped };

  static ReservoirModel build(const ReservoirConfig& cfg, int input_dim, int output_dim = -1,
                              Activation activation = Activation::Tanh) {
    validate(cfg);
    require(input_dim >= 1, "ReservoirModel: input_dim must be >= 1");
    if (output_dim < 0) output_dim = input_dim;

    ReservoirModel model;
    model.input_dim_ = input_dim;
    model.output_dim_ = output_dim;
    model.activation_ = activation;
    model.fingerprint_ = fingerprint(cfg);
    model.param_ = cfg.param_channel;

    if (const auto* par = std::get_if<ParallelTopology>(&cfg.topology)) {
      require(static_cast<int>(par->members.size()) * par->group_size == input_dim,
              "ParallelTopology: members * group_size must equal the input dimension");
      model.mode_ = Mode::Parallel;
      model.group_size_ = par->group_size;
      model.buffer_ = par->buffer;
      const int member_in = par->group_size + 2 * par->buffer;
      for (const auto& mc : par->members) {
        require(!is_composite(mc.topology), "ParallelTopology: members must be flat reservoirs");
        model.members_.push_back(build_member(mc, member_in, output_dim, cfg.feedback));
      }
    } else if (const auto* deep = std::get_if<DeepTopology>(&cfg.topology)) {
      model.mode_ = deep->mode == DeepMode::Stacked
                        ? Mode::DeepStacked
                        : (deep->mode == DeepMode::InputToAll ? Mode::DeepInputToAll : Mode::DeepGrouped);
      int prev_n = 0;
      for (std::size_t l = 0; l < deep->layers.size(); ++l) {
        const auto& lc = deep->layers[l];
        require(!is_composite(lc.topology), "DeepTopology: layers must be flat reservoirs");
        int in_l = input_dim;
        if (l > 0) {
          if (deep->mode == DeepMode::Stacked) in_l = prev_n;
          else if (deep->mode == DeepMode::InputToAll) in_l = input_dim + prev_n;
        }
        model.members_.push_back(build_member(lc, in_l, output_dim, cfg.feedback));
        prev_n = static_cast<int>(model.members_.back().w.rows());
      }
    } else {
      model.mode_ = Mode::Single;
      model.members_.push_back(build_member(cfg, input_dim, output_dim, cfg.feedback));
    }

    model.offsets_.clear();
    int total = 0;
    for (const auto& m : model.members_) {
      model.offsets_.push_back(total);
      total += static_cast<int>(m.w.rows());
    }
    model.total_dim_ = total;
    model.state_ = Eigen::VectorXd::Zero(total);
    return model;
  }

  int state_dim() const { return total_dim_; }
  int input_dim() const { return input_dim_; }
  Mode mode() const { return mode_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const std::vector<Member>& members() const { return members_; }
  std::vector<Member>& members() { return members_; }

  const Eigen::VectorXd& state() const { return state_; }

  void reset(const Eigen::VectorXd& x0) {
    require(x0.size() == total_dim_, "ReservoirModel::reset: dimension mismatch");
    state_ = x0;
  }
  void reset() { state_.setZero(); }

  // One leaky update. y_prev must be supplied exactly when feedback is on.
  const Eigen::VectorXd& step(const Eigen::VectorXd& u, const Eigen::VectorXd* y_prev = nullptr) {
    require(u.size() == input_dim_, "ReservoirModel::step: input dimension mismatch");
    const bool has_back = members_.front().w_back.size() > 0;
    require(has_back == (y_prev != nullptr),
            "ReservoirModel::step: y_prev must be supplied iff feedback is enabled");

    switch (mode_) {
      case Mode::Single:
        member_step(0, u, y_prev);
        break;
      case Mode::Parallel: {
        const int k = input_dim_;
        const int width = group_size_ + 2 * buffer_;
        Eigen::VectorXd slice(width);
        for (std::size_t i = 0; i < members_.size(); ++i) {
          const int start = static_cast<int>(i) * group_size_ - buffer_;
          for (int j = 0; j < width; ++j) slice[j] = u[((start + j) % k + k) % k];
          member_step(i, slice, y_prev);
        }
        break;
      }
      case Mode::DeepStacked:
      case Mode::DeepInputToAll:
      case Mode::DeepGrouped: {
        Eigen::VectorXd carry;  // fresh state of the previous layer
        for (std::size_t l = 0; l < members_.size(); ++l) {
          if (l == 0 || mode_ == Mode::DeepGrouped) {
            member_step(l, u, y_prev);
          } else if (mode_ == Mode::DeepStacked) {
            member_step(l, carry, y_prev);
          } else {
            Eigen::VectorXd both(input_dim_ + carry.size());
            both << u, carry;
            member_step(l, both, y_prev);
          }
          carry = segment(l);
        }
        break;
      }
    }
    if (!state_.allFinite())
      throw IntegrationError("ReservoirModel::step: non-finite state", step_count_);
    ++step_count_;
    return state_;
  }

  // Iterates over all inputs and returns the states aligned with
  // inputs[warmup..]; the first `warmup` states are discarded.
  ReservoirRun run(const TimeSeries& inputs, std::size_t warmup,
                   const Eigen::VectorXd* x0 = nullptr,
                   const Eigen::MatrixXd* teacher_outputs = nullptr) {
    const auto t_len = static_cast<std::size_t>(inputs.rows());
    require(warmup < t_len, "ReservoirModel::run: warmup must be < T");
    const bool has_back = members_.front().w_back.size() > 0;
    require(!has_back || teacher_outputs != nullptr,
            "ReservoirModel::run: feedback reservoirs need teacher outputs");
    if (x0)
      reset(*x0);
    else
      reset();
    step_count_ = 0;

    ReservoirRun out;
    out.washout_used = warmup;
    out.config_fingerprint = fingerprint_;
    out.states.resize(static_cast<Eigen::Index>(t_len - warmup), total_dim_);
    Eigen::VectorXd y_prev = Eigen::VectorXd::Zero(output_dim_);
    for (std::size_t t = 0; t < t_len; ++t) {
      const Eigen::VectorXd u = inputs.data.row(static_cast<Eigen::Index>(t)).transpose();
      step(u, has_back ? &y_prev : nullptr);
      if (has_back && teacher_outputs) y_prev = teacher_outputs->row(static_cast<Eigen::Index>(t)).transpose();
      if (t >= warmup) out.states.row(static_cast<Eigen::Index>(t - warmup)) = state_.transpose();
    }
    return out;
  }

  Eigen::VectorXd segment(std::size_t member) const {
    return state_.segment(offsets_[member], members_[member].w.rows());
  }

 private:
  static Eigen::MatrixXd built_scaled(const ReservoirConfig& cfg) {
    BuiltTopology built = build_weights(cfg.topology, Rng(cfg.seed).substream(stream::w_res));
    if (!cfg.spectral_radius) return std::move(built.w);
    // Ring spectra are |w| exactly; skip the iteration there.
    if (const auto* sc = std::get_if<SimpleCycle>(&cfg.topology)) {
      require(sc->weight != 0.0, "SimpleCycle: zero weight cannot reach a positive target");
      return built.w * (*cfg.spectral_radius / std::abs(sc->weight));
    }
    return scale_spectral_radius(built.w, *cfg.spectral_radius);
  }

  static Member build_member(const ReservoirConfig& cfg, int input_dim, int output_dim,
                             bool feedback) {
    validate(cfg);
    Member m;
    m.w = built_scaled(cfg);
    const auto n = static_cast<int>(m.w.rows());
    Rng base(cfg.seed);

    Rng rin = base.substream(stream::w_in);
    m.w_in.resize(n, input_dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < input_dim; ++j) m.w_in(i, j) = rin.uniform_sym() * cfg.input_scaling;
    // MCI splits the input between the two rings; the second gets theta times
    // the first ring's weights.
    if (const auto* mci = std::get_if<Mci>(&cfg.topology)) {
      m.w_in.bottomRows(mci->n_sub) = mci->input_balance * m.w_in.topRows(mci->n_sub);
    }

    Rng rb = base.substream(stream::bias);
    m.bias.resize(n);
    for (int i = 0; i < n; ++i) m.bias[i] = rb.uniform_sym() * cfg.bias_scale;

    if (feedback) {
      Rng rback = base.substream(stream::w_back);
      m.w_back.resize(n, output_dim);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < output_dim; ++j) m.w_back(i, j) = rback.uniform_sym();
    }
    if (cfg.param_channel) {
      Rng rpar = base.substream(stream::w_param);
      m.w_param.resize(n, cfg.param_channel->size());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < cfg.param_channel->size(); ++j) m.w_param(i, j) = rpar.uniform_sym();
    }
    m.leak = cfg.leak;
    m.gain = Eigen::VectorXd::Ones(n);
    m.ip_bias = Eigen::VectorXd::Zero(n);
    return m;
  }

  void member_step(std::size_t idx, const Eigen::VectorXd& u, const Eigen::VectorXd* y_prev) {
    Member& m = members_[idx];
    auto x = state_.segment(offsets_[idx], m.w.rows());
    Eigen::VectorXd pre = m.w_in * u + m.w * x + m.bias;
    if (m.w_back.size() > 0 && y_prev) pre += m.w_back * (*y_prev);
    if (m.w_param.size() > 0 && param_) pre += m.w_param * (*param_);
    pre = (m.gain.array() * pre.array() + m.ip_bias.array()).matrix();
    if (activation_ == Activation::Tanh) pre = pre.array().tanh().matrix();
    x = (1.0 - m.leak) * x + m.leak * pre;
  }

  std::vector<Member> members_;
  std::vector<int> offsets_;
  Mode mode_ = Mode::Single;
  Activation activation_ = Activation::Tanh;
  int input_dim_ = 0;
  int output_dim_ = 0;
  int total_dim_ = 0;
  int group_size_ = 0;
  int buffer_ = 0;
  std::optional<Eigen::VectorXd> param_;
  Eigen::VectorXd state_;
  std::size_t step_count_ = 0;
  std::string fingerprint_;
};

struct EspReport {
  bool converged = false;
  double decay_rate = 0.0;           // mean log-distance slope per step
  std::vector<double> pair_slopes;   // one per trial pair
};

// Echo-state check: pairs of runs from random initial states on shared input;
// the log of the pairwise state distance should shrink linearly.
inline EspReport verify_esp(const ReservoirConfig& cfg, const TimeSeries& inputs, int n_trials,
                            std::size_t horizon) {
  require(n_trials >= 2, "verify_esp: need at least 2 trials");
  require(horizon >= 8, "verify_esp: horizon too short to fit a slope");
  require(horizon <= static_cast<std::size_t>(inputs.rows()), "verify_esp: horizon exceeds input length");

  ReservoirModel a = ReservoirModel::build(cfg, static_cast<int>(inputs.dims()));
  ReservoirModel b = ReservoirModel::build(cfg, static_cast<int>(inputs.dims()));
  const int n = a.state_dim();

  EspReport report;
  Rng rng(cfg.seed ^ 0xe5b0e5b0ull);
  for (int trial = 0; trial < n_trials; ++trial) {
    Eigen::VectorXd xa(n), xb(n);
    for (int i = 0; i < n; ++i) xa[i] = rng.uniform_sym();
    for (int i = 0; i < n; ++i) xb[i] = rng.uniform_sym();
    a.reset(xa);
    b.reset(xb);
    std::vector<double> logdist;
    logdist.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const Eigen::VectorXd u = inputs.data.row(static_cast<Eigen::Index>(t)).transpose();
      a.step(u);
      b.step(u);
      const double d = std::max((a.state() - b.state()).norm(), 1e-300);
      logdist.push_back(std::log(d));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto cnt = static_cast<double>(logdist.size());
    for (std::size_t t = 0; t < logdist.size(); ++t) {
      sx += static_cast<double>(t);
      sy += logdist[t];
      sxx += static_cast<double>(t) * static_cast<double>(t);
      sxy += static_cast<double>(t) * logdist[t];
    }
    report.pair_slopes.push_back((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx));
  }
  double mean = 0;
  bool all_neg = true;
  for (double s : report.pair_slopes) {
    mean += s;
    all_neg = all_neg && s < 0;
  }
  report.decay_rate = mean / static_cast<double>(report.pair_slopes.size());
  report.converged = all_neg;
  return report;
}

// Distance trace between two runs from different initial states on shared
// input; used to check the per-step contraction bound.
inline std::vector<double> esp_distance_trace(const ReservoirConfig& cfg, const TimeSeries& inputs,
                                              const Eigen::VectorXd& x0a, const Eigen::VectorXd& x0b,
                                              std::size_t horizon) {
  ReservoirModel a = ReservoirModel::build(cfg, static_cast<int>(inputs.dims()));
  ReservoirModel b = ReservoirModel::build(cfg, static_cast<int>(inputs.dims()));
  a.reset(x0a);
  b.reset(x0b);
  std::vector<double> out;
  out.push_back((x0a - x0b).norm());
  for (std::size_t t = 0; t < horizon && t < static_cast<std::size_t>(inputs.rows()); ++t) {
    const Eigen::VectorXd u = inputs.data.row(static_cast<Eigen::Index>(t)).transpose();
    a.step(u);
    b.step(u);
    out.push_back((a.state() - b.state()).norm());
  }
  return out;
}

struct IpResult {
  Eigen::VectorXd gain;
  Eigen::VectorXd bias;
  Eigen::VectorXd activation_mean;  // final-epoch per-neuron output mean
  Eigen::VectorXd activation_std;
  bool gain_clamped = false;
};

// Intrinsic plasticity: per-neuron gradient steps pulling tanh outputs toward
// a Gaussian with the requested mean and std. Gains are floored at 1e-6.
inline IpResult intrinsic_plasticity(const ReservoirConfig& cfg, const TimeSeries& inputs,
                                     double eta, double mu, double sigma, int epochs) {
  require(eta >= 0, "intrinsic_plasticity: eta must be >= 0");
  require(sigma > 0, "intrinsic_plasticity: sigma must be > 0");
  require(epochs >= 1, "intrinsic_plasticity: epochs must be >= 1");
  require(!is_composite(cfg.topology), "intrinsic_plasticity: adapts a single flat reservoir");

  ReservoirModel model = ReservoirModel::build(cfg, static_cast<int>(inputs.dims()));
  auto& m = model.members().front();
  const auto n = static_cast<int>(m.w.rows());
  const double s2 = sigma * sigma;

  IpResult res;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n), sumsq = Eigen::VectorXd::Zero(n);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    sum.setZero();
    sumsq.setZero();
    for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
      const Eigen::VectorXd u = inputs.data.row(t).transpose();
      const Eigen::VectorXd net = m.w_in * u + m.w * x + m.bias;
      const Eigen::VectorXd out = ((m.gain.array() * net.array()) + m.ip_bias.array()).tanh();
      for (int i = 0; i < n; ++i) {
        const double xt = out[i];
        const double db = -eta * (-(mu / s2) + (xt / s2) * (2.0 * s2 + 1.0 - xt * xt + mu * xt));
        const double dg = eta / m.gain[i] + db * net[i];
        m.ip_bias[i] += db;
        m.gain[i] += dg;
        if (m.gain[i] < 1e-6) {
          m.gain[i] = 1e-6;
          res.gain_clamped = true;
        }
      }
      x = (1.0 - m.leak) * x + m.leak * out;
      sum += out;
      sumsq += out.cwiseProduct(out);
    }
  }
  const auto t_len = static_cast<double>(inputs.rows());
  res.gain = m.gain;
  res.bias = m.ip_bias;
  res.activation_mean = sum / t_len;
  res.activation_std =
      ((sumsq / t_len) - res.activation_mean.cwiseProduct(res.activation_mean)).cwiseMax(0.0).cwiseSqrt();
  return res;
}

// --- serialization -------------------------------------------------------

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& ctx) {
  require(j.is_object(), ctx + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    require(ok, ctx + ": unknown key '" + it.key() + "'");
  }
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

inline nlohmann::json to_json(const TopologySpec& t) {
  struct V {
    nlohmann::json operator()(const DenseSparse& s) const {
      return {{"kind", "dense"},
              {"n", s.n},
              {"connectivity", s.connectivity},
              {"dist", s.dist == WeightDist::Uniform ? "uniform" : "normal"}};
    }
    nlohmann::json operator()(const SimpleCycle& s) const {
      return {{"kind", "cycle"}, {"n", s.n}, {"weight", s.weight}};
    }
    nlohmann::json operator()(const CycleJumps& s) const {
      return {{"kind", "cycle_jumps"},
              {"n", s.n},
              {"cycle_weight", s.cycle_weight},
              {"jump_weight", s.jump_weight},
              {"jump_size", s.jump_size}};
    }
    nlohmann::json operator()(const SmallWorld& s) const {
      return {{"kind", "small_world"},
              {"n", s.n},
              {"degree", s.degree},
              {"rewire_prob", s.rewire_prob},
              {"weight_scale", s.weight_scale}};
    }
    nlohmann::json operator()(const Mci& s) const {
      return {{"kind", "mci"},
              {"n_sub", s.n_sub},
              {"cycle_weight", s.cycle_weight},
              {"inter_weight", s.inter_weight},
              {"input_balance", s.input_balance}};
    }
    nlohmann::json operator()(const ParallelTopology& s) const {
      nlohmann::json members = nlohmann::json::array();
      for (const auto& m : s.members) members.push_back(to_json(m));
      return {{"kind", "parallel"},
              {"members", std::move(members)},
              {"group_size", s.group_size},
              {"buffer", s.buffer}};
    }
    nlohmann::json operator()(const DeepTopology& s) const {
      nlohmann::json layers = nlohmann::json::array();
      for (const auto& l : s.layers) layers.push_back(to_json(l));
      const char* mode = s.mode == DeepMode::Stacked
                             ? "stacked"
                             : (s.mode == DeepMode::InputToAll ? "input_to_all" : "grouped");
      return {{"kind", "deep"}, {"layers", std::move(layers)}, {"mode", mode}};
    }
  };
  return std::visit(V{}, t);
}

inline TopologySpec topology_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind"), "topology: missing 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dense") {
    detail::check_keys(j, {"kind", "n", "connectivity", "dist"}, "topology(dense)");
    DenseSparse t;
    t.n = j.value("n", t.n);
    t.connectivity = j.value("connectivity", t.connectivity);
    const std::string d = j.value("dist", "uniform");
    require(d == "uniform" || d == "normal", "topology(dense): dist must be uniform or normal");
    t.dist = d == "uniform" ? WeightDist::Uniform : WeightDist::Normal;
    return t;
  }
  if (kind == "cycle") {
    detail::check_keys(j, {"kind", "n", "weight"}, "topology(cycle)");
    SimpleCycle t;
    t.n = j.value("n", t.n);
    t.weight = j.value("weight", t.weight);
    return t;
  }
  if (kind == "cycle_jumps") {
    detail::check_keys(j, {"kind", "n", "cycle_weight", "jump_weight", "jump_size"},
                       "topology(cycle_jumps)");
    CycleJumps t;
    t.n = j.value("n", t.n);
    t.cycle_weight = j.value("cycle_weight", t.cycle_weight);
    t.jump_weight = j.value("jump_weight", t.jump_weight);
    t.jump_size = j.value("jump_size", t.jump_size);
    return t;
  }
  if (kind == "small_world") {
    detail::check_keys(j, {"kind", "n", "degree", "rewire_prob", "weight_scale"},
                       "topology(small_world)");
    SmallWorld t;
    t.n = j.value("n", t.n);
    t.degree = j.value("degree", t.degree);
    t.rewire_prob = j.value("rewire_prob", t.rewire_prob);
    t.weight_scale = j.value("weight_scale", t.weight_scale);
    return t;
  }
  if (kind == "mci") {
    detail::check_keys(j, {"kind", "n_sub", "cycle_weight", "inter_weight", "input_balance"},
                       "topology(mci)");
    Mci t;
    t.n_sub = j.value("n_sub", t.n_sub);
    t.cycle_weight = j.value("cycle_weight", t.cycle_weight);
    t.inter_weight = j.value("inter_weight", t.inter_weight);
    t.input_balance = j.value("input_balance", t.input_balance);
    return t;
  }
  if (kind == "parallel") {
    detail::check_keys(j, {"kind", "members", "group_size", "buffer"}, "topology(parallel)");
    ParallelTopology t;
    for (const auto& m : j.at("members")) t.members.push_back(reservoir_config_from_json(m));
    t.group_size = j.value("group_size", 1);
    t.buffer = j.value("buffer", 0);
    return t;
  }
  if (kind == "deep") {
    detail::check_keys(j, {"kind", "layers", "mode"}, "topology(deep)");
    DeepTopology t;
    for (const auto& l : j.at("layers")) t.layers.push_back(reservoir_config_from_json(l));
    const std::string mode = j.value("mode", "stacked");
    if (mode == "stacked") t.mode = DeepMode::Stacked;
    else if (mode == "input_to_all") t.mode = DeepMode::InputToAll;
    else if (mode == "grouped") t.mode = DeepMode::Grouped;
    else throw ValidationError("topology(deep): unknown mode " + mode);
    return t;
  }
  throw ValidationError("topology: unknown kind '" + kind + "'");
}

inline nlohmann::json to_json(const ReservoirConfig& cfg) {
  nlohmann::json j{{"topology", to_json(cfg.topology)},
                   {"input_scaling", cfg.input_scaling},
                   {"bias_scale", cfg.bias_scale},
                   {"leak", cfg.leak},
                   {"feedback", cfg.feedback},
                   {"seed", cfg.seed}};
  j["spectral_radius"] = cfg.spectral_radius ? nlohmann::json(*cfg.spectral_radius) : nlohmann::json();
  if (cfg.param_channel) {
    nlohmann::json p = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cfg.param_channel->size(); ++i) p.push_back((*cfg.param_channel)[i]);
    j["param_channel"] = std::move(p);
  } else {
    j["param_channel"] = nlohmann::json();
  }
  return j;
}

inline ReservoirConfig reservoir_config_from_json(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"topology", "spectral_radius", "input_scaling", "bias_scale", "leak",
                      "feedback", "param_channel", "seed"},
                     "reservoir config");
  ReservoirConfig cfg;
  if (j.contains("topology")) cfg.topology = topology_from_json(j.at("topology"));
  if (j.contains("spectral_radius") && !j.at("spectral_radius").is_null())
    cfg.spectral_radius = j.at("spectral_radius").get<double>();
  else if (j.contains("spectral_radius"))
    cfg.spectral_radius.reset();
  cfg.input_scaling = j.value("input_scaling", cfg.input_scaling);
  cfg.bias_scale = j.value("bias_scale", cfg.bias_scale);
  cfg.leak = j.value("leak", cfg.leak);
  cfg.feedback = j.value("feedback", cfg.feedback);
  if (j.contains("param_channel") && !j.at("param_channel").is_null()) {
    const auto& arr = j.at("param_channel");
    Eigen::VectorXd p(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) p[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    cfg.param_channel = std::move(p);
  }
  cfg.seed = j.value("seed", cfg.seed);
  validate(cfg);
  return cfg;
}

inline std::string fingerprint(const ReservoirConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(to_json(cfg).dump())));
  return std::string(buf);
}

}  // namespace rbench
