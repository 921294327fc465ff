#include "ucdw/policy.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "ucdw/master.hpp"

namespace ucdw {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian");

namespace {

constexpr char kMagic[4] = {'U', 'C', 'D', 'W'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFeatureDemandReserve = 1;

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Tape {
  std::vector<Eigen::VectorXd> h;  // inputs to each layer (h[0] = normalized features)
  std::vector<Eigen::VectorXd> t;  // tanh outputs of hidden layers
  Eigen::VectorXd z;               // output pre-activation
};

Eigen::VectorXd run(const MlpPolicy& p, const Eigen::VectorXd& features, Tape* tape) {
  if (features.size() != p.n_inputs()) throw InputError("feature length does not match the policy");
  Eigen::VectorXd h = (features - p.input_mean).cwiseQuotient(p.input_scale);
  const auto& L = p.layers();
  if (tape) {
    tape->h.clear();
    tape->t.clear();
  }
  for (std::size_t i = 0; i + 1 < L.size(); ++i) {
    const auto& l = L[i];
    Eigen::Map<const Eigen::MatrixXd> W(p.theta.data() + l.w, l.out, l.in);
    Eigen::Map<const Eigen::VectorXd> b(p.theta.data() + l.b, l.out);
    Eigen::VectorXd t = (W * h + b).array().tanh().matrix();
    if (tape) {
      tape->h.push_back(h);
      tape->t.push_back(t);
    }
    if (l.r >= 0) {
      Eigen::Map<const Eigen::MatrixXd> R(p.theta.data() + l.r, l.out, l.in);
      t += R * h;
    }
    h = std::move(t);
  }
  const auto& o = L.back();
  Eigen::Map<const Eigen::MatrixXd> W(p.theta.data() + o.w, o.out, o.in);
  Eigen::Map<const Eigen::VectorXd> b(p.theta.data() + o.b, o.out);
  Eigen::VectorXd z = W * h + b;
  if (tape) {
    tape->h.push_back(h);
    tape->z = z;
  }
  Eigen::VectorXd y(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) y[k] = p.output_scale() * softplus(z[k]);
  return y;
}

// Gradient w.r.t. theta of g^T y, plus (optionally) w.r.t. the raw features.
Eigen::VectorXd backprop(const MlpPolicy& p, const Tape& tape, const Eigen::VectorXd& gy,
                         Eigen::VectorXd* g_features) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.theta.size());
  const auto& L = p.layers();
  Eigen::VectorXd gz(gy.size());
  for (Eigen::Index k = 0; k < gy.size(); ++k) gz[k] = gy[k] * p.output_scale() * sigmoid(tape.z[k]);
  const auto& o = L.back();
  const auto& hl = tape.h.back();
  Eigen::Map<Eigen::MatrixXd>(grad.data() + o.w, o.out, o.in) = gz * hl.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + o.b, o.out) = gz;
  Eigen::VectorXd gh = Eigen::Map<const Eigen::MatrixXd>(p.theta.data() + o.w, o.out, o.in).transpose() * gz;
  for (int i = static_cast<int>(L.size()) - 2; i >= 0; --i) {
    const auto& l = L[i];
    const auto& h = tape.h[i];
    const Eigen::VectorXd gu = gh.cwiseProduct((1.0 - tape.t[i].array().square()).matrix());
    Eigen::Map<Eigen::MatrixXd>(grad.data() + l.w, l.out, l.in) = gu * h.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + l.b, l.out) = gu;
    Eigen::VectorXd next = Eigen::Map<const Eigen::MatrixXd>(p.theta.data() + l.w, l.out, l.in).transpose() * gu;
    if (l.r >= 0) {
      Eigen::Map<Eigen::MatrixXd>(grad.data() + l.r, l.out, l.in) = gh * h.transpose();
      next += Eigen::Map<const Eigen::MatrixXd>(p.theta.data() + l.r, l.out, l.in).transpose() * gh;
    }
    gh = std::move(next);
  }
  if (g_features) *g_features = gh.cwiseQuotient(p.input_scale);
  return grad;
}

DualPoint to_dual(const Eigen::VectorXd& y, int n) {
  DualPoint d = DualPoint::zeros(n);
  for (int t = 0; t < n; ++t) {
    d.y_load[t] = y[t];
    d.y_reserve[t] = y[n + t];
  }
  return d;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("checkpoint truncated");
  return v;
}

}  // namespace

Eigen::VectorXd featurize(const UcInstance& inst) {
  const int n = inst.n_periods;
  const double cap = inst.total_capacity();
  if (!(cap > 0.0)) throw InputError("fleet capacity must be positive");
  Eigen::VectorXd f(2 * n);
  for (int t = 0; t < n; ++t) {
    f[t] = inst.profile.demand[t] / cap;
    f[n + t] = inst.profile.reserve[t] / cap;
  }
  return f;
}

void MlpPolicy::build_layout() {
  layers_.clear();
  std::ptrdiff_t off = 0;
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    Layer l;
    l.in = dims_[i];
    l.out = dims_[i + 1];
    l.w = off;
    off += static_cast<std::ptrdiff_t>(l.in) * l.out;
    l.b = off;
    off += l.out;
    const bool hidden = i + 2 < dims_.size();
    if (hidden && l.in == l.out && i > 0) {
      l.r = off;
      off += static_cast<std::ptrdiff_t>(l.in) * l.out;
    }
    layers_.push_back(l);
  }
  if (theta.size() != off) theta = Eigen::VectorXd::Zero(off);
}

MlpPolicy MlpPolicy::create(const std::vector<GeneratorSpec>& fleet, int n_periods,
                            const std::vector<int>& hidden, std::uint64_t seed) {
  if (fleet.empty() || n_periods <= 0) throw InputError("policy needs a fleet and a horizon");
  for (int w : hidden)
    if (w <= 0) throw InputError("hidden widths must be positive");
  MlpPolicy p;
  p.n_periods_ = n_periods;
  p.fingerprint_ = ucdw::fleet_fingerprint(fleet);
  p.out_scale_ = 0.0;
  for (const auto& g : fleet) p.out_scale_ = std::max(p.out_scale_, g.marginal_cost);
  p.dims_.push_back(2 * n_periods);
  p.dims_.insert(p.dims_.end(), hidden.begin(), hidden.end());
  p.dims_.push_back(2 * n_periods);
  p.build_layout();
  p.input_mean = Eigen::VectorXd::Zero(2 * n_periods);
  p.input_scale = Eigen::VectorXd::Ones(2 * n_periods);
  std::mt19937_64 rng(seed);
  for (const auto& l : p.layers_) {
    const double a = std::sqrt(6.0 / (l.in + l.out));
    std::uniform_real_distribution<double> u(-a, a);
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(l.in) * l.out; ++k) p.theta[l.w + k] = u(rng);
  }
  return p;
}

void MlpPolicy::fit_normalization(const std::vector<Eigen::VectorXd>& features) {
  if (features.empty()) return;
  const Eigen::Index d = n_inputs();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  for (const auto& f : features) {
    if (f.size() != d) throw InputError("feature length does not match the policy");
    mean += f;
  }
  mean /= static_cast<double>(features.size());
  for (const auto& f : features) sq += (f - mean).array().square().matrix();
  sq /= static_cast<double>(features.size());
  input_mean = mean;
  input_scale = sq.array().sqrt().max(1e-3).matrix();
}

void MlpPolicy::check_instance(const UcInstance& inst) const {
  if (inst.n_periods != n_periods_) throw InputError("instance horizon differs from the policy's");
  if (ucdw::fleet_fingerprint(inst.generators) != fingerprint_)
    throw InputError("instance fleet differs from the policy's fleet");
}

void MlpPolicy::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write checkpoint: " + path);
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, fingerprint_);
  put(os, kFeatureDemandReserve);
  put(os, static_cast<std::uint32_t>(n_periods_));
  put(os, static_cast<std::uint32_t>(dims_.size()));
  for (int d : dims_) put(os, static_cast<std::uint32_t>(d));
  put(os, out_scale_);
  auto blob = [&](const Eigen::VectorXd& v) {
    put(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  blob(input_mean);
  blob(input_scale);
  blob(theta);
  if (!os) throw InputError("checkpoint write failed: " + path);
}

MlpPolicy MlpPolicy::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw InputError("not a policy checkpoint: " + path);
  if (get<std::uint32_t>(is) != kVersion) throw InputError("unsupported checkpoint version");
  MlpPolicy p;
  p.fingerprint_ = get<std::uint64_t>(is);
  if (get<std::uint32_t>(is) != kFeatureDemandReserve) throw InputError("unknown feature spec");
  p.n_periods_ = static_cast<int>(get<std::uint32_t>(is));
  const auto nd = get<std::uint32_t>(is);
  if (nd < 2 || nd > 64) throw InputError("corrupt layer count");
  for (std::uint32_t i = 0; i < nd; ++i) {
    const auto d = get<std::uint32_t>(is);
    if (d == 0 || d > 100000) throw InputError("corrupt layer width");
    p.dims_.push_back(static_cast<int>(d));
  }
  if (p.dims_.front() != 2 * p.n_periods_ || p.dims_.back() != 2 * p.n_periods_)
    throw InputError("checkpoint dims do not match its horizon");
  p.out_scale_ = get<double>(is);
  auto blob = [&](Eigen::VectorXd& v, Eigen::Index expect) {
    const auto n = get<std::uint64_t>(is);
    if (static_cast<Eigen::Index>(n) != expect) throw InputError("corrupt parameter blob");
    v.resize(expect);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw InputError("checkpoint truncated");
    if (!v.allFinite()) throw InputError("non-finite parameters in checkpoint");
  };
  blob(p.input_mean, p.dims_.front());
  blob(p.input_scale, p.dims_.front());
  p.build_layout();
  const auto n_theta = p.theta.size();
  blob(p.theta, n_theta);
  if (is.peek() != std::char_traits<char>::eof()) throw InputError("trailing bytes in checkpoint");
  return p;
}

DualPoint forward(const MlpPolicy& p, const Eigen::VectorXd& features) {
  return to_dual(run(p, features, nullptr), p.n_periods());
}

Eigen::MatrixXd input_jacobian(const MlpPolicy& p, const Eigen::VectorXd& features) {
  Tape tape;
  const Eigen::VectorXd y = run(p, features, &tape);
  Eigen::MatrixXd J(y.size(), features.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(y.size(), k), gf;
    backprop(p, tape, e, &gf);
    J.row(k) = gf.transpose();
  }
  return J;
}

SampledBound sample_gradient(const MlpPolicy& p, const UcInstance& inst, int t) {
  p.check_instance(inst);
  const int S = inst.n_generators(), n = inst.n_periods;
  if (t < 0 || t >= S) throw InputError("generator index out of range");
  Tape tape;
  const Eigen::VectorXd yv = run(p, featurize(inst), &tape);
  SampledBound out;
  out.y = to_dual(yv, n);
  const auto pr = solve_pricing(inst.generators[t], out.y, n);
  out.value = linking_value(inst, out.y) + S * pr.reduced_objective;
  Eigen::VectorXd gy(2 * n);
  for (int k = 0; k < n; ++k) {
    gy[k] = inst.profile.demand[k] - S * pr.contribution.load[k];
    gy[n + k] = inst.profile.reserve[k] - S * pr.contribution.reserve[k];
  }
  out.grad = backprop(p, tape, gy, nullptr);
  return out;
}

double mean_lower_bound(const MlpPolicy& p, const std::vector<UcInstance>& instances) {
  if (instances.empty()) return 0.0;
  double s = 0.0;
  for (const auto& inst : instances) {
    p.check_instance(inst);
    const auto y = forward(p, featurize(inst));
    s += linking_value(inst, y) + solve_all_pricing(inst, y).total_reduced;
  }
  return s / static_cast<double>(instances.size());
}

AdamState::AdamState(Eigen::Index n, double lr_)
    : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)), lr(lr_) {}

void AdamState::ascend(Eigen::VectorXd& theta, const Eigen::VectorXd& g) {
  if (g.size() != theta.size() || m.size() != theta.size()) throw InputError("Adam shape mismatch");
  ++step;
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  theta.array() += lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

void TrainConfig::validate() const {
  if (max_steps <= 0 && max_seconds <= 0.0) throw InputError("training needs a step or time budget");
  if (eval_every <= 0 || plateau_patience <= 0 || batch <= 0) throw InputError("eval_every, patience and batch must be positive");
  if (!(lr > 0.0) || !(lr_decay_divisor > 1.0)) throw InputError("bad learning-rate settings");
  if (workers != 1) throw InputError("only single-worker training is supported");
}

TrainResult train(MlpPolicy policy, const std::vector<UcInstance>& training,
                  const std::vector<UcInstance>& held_out, const TrainConfig& cfg) {
  cfg.validate();
  if (training.empty()) throw InputError("no training instances");
  for (const auto& inst : training) policy.check_instance(inst);
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(cfg.seed);
  AdamState adam(policy.theta.size(), cfg.lr);
  TrainResult res;
  const auto& eval_set = held_out.empty() ? training : held_out;
  double best = mean_lower_bound(policy, eval_set);
  res.best = policy;
  res.curve.push_back({0, best, adam.lr});
  int stale = 0;
  const int S = training.front().n_generators();
  Eigen::VectorXd g(policy.theta.size());
  long step = 0;
  auto out_of_time = [&] {
    return cfg.max_seconds > 0.0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= cfg.max_seconds;
  };
  while ((cfg.max_steps <= 0 || step < cfg.max_steps) && !out_of_time()) {
    g.setZero();
    for (int k = 0; k < cfg.batch; ++k) {
      const auto& inst = training[rng() % training.size()];
      const int t = static_cast<int>(rng() % S);
      g += sample_gradient(policy, inst, t).grad;
    }
    g /= cfg.batch;
    adam.ascend(policy.theta, g);
    ++step;
    if (step % cfg.eval_every == 0) {
      const double metric = mean_lower_bound(policy, eval_set);
      res.curve.push_back({step, metric, adam.lr});
      if (metric > best) {
        best = metric;
        res.best = policy;
        stale = 0;
      } else if (++stale >= cfg.plateau_patience) {
        adam.lr /= cfg.lr_decay_divisor;
        stale = 0;
      }
    }
  }
  res.steps = step;
  return res;
}

}  // namespace ucdw
