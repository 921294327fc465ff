#include "ucdw/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>

#include "ucdw/extensive_uc.hpp"
#include "ucdw/policy.hpp"

namespace ucdw {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::ordered_json;

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> flatten(const DualPoint& y) {
  std::vector<double> out = y.y_load;
  out.insert(out.end(), y.y_reserve.begin(), y.y_reserve.end());
  return out;
}

DualPoint unflatten(const std::vector<double>& v, int n) {
  if (static_cast<int>(v.size()) != 2 * n) throw InputError("dual vector length mismatch");
  DualPoint y = DualPoint::zeros(n);
  for (int t = 0; t < n; ++t) {
    y.y_load[t] = std::max(0.0, v[t]);
    y.y_reserve[t] = std::max(0.0, v[n + t]);
  }
  return y;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("forest file truncated");
  return v;
}

constexpr char kForestMagic[4] = {'U', 'C', 'R', 'F'};
constexpr std::uint32_t kForestVersion = 1;

}  // namespace

DualPoint coldstart_dual(const UcInstance& inst) { return DualPoint::zeros(inst.n_periods); }

LprResult lpr_dual(const UcInstance& inst) {
  const auto t0 = Clock::now();
  const auto prog = build_uc_program(inst);
  const auto sol = lp::solve_lp(prog.problem);
  if (sol.status != lp::LpStatus::Optimal)
    throw std::runtime_error(std::string("LP relaxation failed: ") + lp::to_string(sol.status));
  LprResult r;
  const int n = inst.n_periods;
  r.y = DualPoint::zeros(n);
  for (int t = 0; t < n; ++t) {
    r.y.y_load[t] = std::max(0.0, sol.duals[prog.layout.load_row(t)]);
    r.y.y_reserve[t] = std::max(0.0, sol.duals[prog.layout.reserve_row(t)]);
  }
  r.objective = sol.objective;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

void DualDataset::save_jsonl(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot write dataset: " + path);
  ordered_json head;
  head["kind"] = "dual-dataset";
  head["version"] = 1;
  head["fleet_fingerprint"] = fleet_fingerprint;
  head["n_periods"] = n_periods;
  os << head.dump() << '\n';
  for (const auto& r : records) {
    ordered_json j;
    j["id"] = r.id;
    j["features"] = r.features;
    j["y_load"] = r.dual.y_load;
    j["y_reserve"] = r.dual.y_reserve;
    j["status"] = r.status;
    j["lb"] = r.lower_bound;
    j["ub"] = r.upper_bound;
    j["iterations"] = r.iterations;
    os << j.dump() << '\n';
  }
  if (!os) throw InputError("dataset write failed: " + path);
}

DualDataset DualDataset::load_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read dataset: " + path);
  DualDataset d;
  std::string line;
  try {
    if (!std::getline(is, line)) throw InputError("empty dataset file");
    const auto head = nlohmann::json::parse(line);
    if (head.at("kind") != "dual-dataset" || head.at("version") != 1)
      throw InputError("not a dual dataset (or unsupported version)");
    d.fleet_fingerprint = head.at("fleet_fingerprint").get<std::uint64_t>();
    d.n_periods = head.at("n_periods").get<int>();
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      DualRecord r;
      r.id = j.at("id").get<int>();
      r.features = j.at("features").get<std::vector<double>>();
      r.dual.y_load = j.at("y_load").get<std::vector<double>>();
      r.dual.y_reserve = j.at("y_reserve").get<std::vector<double>>();
      r.dual.validate(d.n_periods);
      if (static_cast<int>(r.features.size()) != 2 * d.n_periods) throw InputError("feature length mismatch");
      r.status = j.at("status").get<std::string>();
      r.lower_bound = j.at("lb").get<double>();
      r.upper_bound = j.at("ub").get<double>();
      r.iterations = j.at("iterations").get<int>();
      d.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed dataset: ") + e.what());
  }
  return d;
}

DualDataset build_dataset(const std::vector<UcInstance>& training, const DatasetBudget& budget,
                          std::ostream* log) {
  DualDataset d;
  if (training.empty()) return d;
  d.fleet_fingerprint = fleet_fingerprint(training.front().generators);
  d.n_periods = training.front().n_periods;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < training.size(); ++i) {
    if (static_cast<int>(i) >= budget.max_instances) break;
    if (budget.max_seconds > 0.0 &&
        std::chrono::duration<double>(Clock::now() - t0).count() >= budget.max_seconds)
      break;
    const auto& inst = training[i];
    if (fleet_fingerprint(inst.generators) != d.fleet_fingerprint || inst.n_periods != d.n_periods)
      throw InputError("training instances must share one fleet and horizon");
    const auto lpr = lpr_dual(inst);
    ColGenConfig cfg;
    cfg.gap_tolerance = budget.gap_tolerance;
    cfg.time_limit_seconds = budget.time_limit_per_instance;
    const auto res = run_column_generation(inst, lpr.y, cfg, {}, lpr.seconds);
    const bool keep = res.status == ColGenStatus::Solved || res.status == ColGenStatus::MpOptimal;
    if (log)
      *log << "instance " << i << ' ' << to_string(res.status) << " iters " << res.iterations
           << (keep ? "" : " skipped") << '\n';
    if (!keep) continue;
    DualRecord r;
    r.id = static_cast<int>(i);
    r.features = to_std(featurize(inst));
    r.dual = res.best_dual;
    r.dual.sigma.clear();
    r.status = to_string(res.status);
    r.lower_bound = res.best_lower_bound;
    r.upper_bound = res.best_solution ? res.best_solution->total_cost : 0.0;
    r.iterations = res.iterations;
    r.seconds = res.seconds + lpr.seconds;
    d.records.push_back(std::move(r));
  }
  return d;
}

DualPoint nearest_neighbour_dual(const DualDataset& d, const UcInstance& inst) {
  if (d.records.empty()) throw InputError("empty dual dataset");
  if (fleet_fingerprint(inst.generators) != d.fleet_fingerprint || inst.n_periods != d.n_periods)
    throw InputError("instance fleet differs from the dataset's");
  const auto f = featurize(inst);
  const DualRecord* best = nullptr;
  double best_d = 0.0;
  for (const auto& r : d.records) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) s += (r.features[k] - f[k]) * (r.features[k] - f[k]);
    if (!best || s < best_d || (s == best_d && r.id < best->id)) {
      best = &r;
      best_d = s;
    }
  }
  DualPoint y = best->dual;
  y.sigma.clear();
  return y;
}

RandomForest RandomForest::fit(const std::vector<std::vector<double>>& x,
                               const std::vector<std::vector<double>>& y, const ForestOptions& opt) {
  if (x.empty() || x.size() != y.size()) throw InputError("forest needs matching non-empty x and y");
  if (opt.n_trees <= 0 || opt.max_depth < 0 || opt.min_leaf <= 0) throw InputError("bad forest options");
  const int N = static_cast<int>(x.size());
  if (N < opt.min_leaf) throw InputError("fewer records than min_leaf");
  RandomForest f;
  f.n_features_ = static_cast<int>(x.front().size());
  f.n_outputs_ = static_cast<int>(y.front().size());
  for (int i = 0; i < N; ++i)
    if (static_cast<int>(x[i].size()) != f.n_features_ || static_cast<int>(y[i].size()) != f.n_outputs_)
      throw InputError("ragged forest data");
  const int D = f.n_features_, O = f.n_outputs_;
  const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(D)))));

  for (int k = 0; k < opt.n_trees; ++k) {
    std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k));
    std::vector<int> sample(N);
    if (opt.bootstrap) {
      for (int& s : sample) s = static_cast<int>(rng() % N);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    Tree tree;
    struct Work {
      int node, depth;
      std::vector<int> idx;
    };
    std::vector<Work> stack;
    tree.push_back({});
    stack.push_back({0, 0, sample});
    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      const int n = static_cast<int>(w.idx.size());
      std::vector<double> mean(O, 0.0);
      for (int i : w.idx)
        for (int o = 0; o < O; ++o) mean[o] += y[i][o];
      for (double& m : mean) m /= n;
      double best_gain = 1e-12;
      int best_f = -1;
      double best_thr = 0.0;
      if (w.depth < opt.max_depth && n >= 2 * opt.min_leaf) {
        double total_sse = 0.0;
        for (int i : w.idx)
          for (int o = 0; o < O; ++o) total_sse += (y[i][o] - mean[o]) * (y[i][o] - mean[o]);
        std::vector<int> feats(D);
        std::iota(feats.begin(), feats.end(), 0);
        for (int j = 0; j < mtry; ++j) std::swap(feats[j], feats[j + rng() % (D - j)]);
        std::vector<int> order = w.idx;
        std::vector<double> lsum(O), total(O);
        for (int i : w.idx)
          for (int o = 0; o < O; ++o) total[o] += y[i][o];
        for (int j = 0; j < mtry && total_sse > 0.0; ++j) {
          const int ft = feats[j];
          std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a][ft] < x[b][ft]; });
          std::fill(lsum.begin(), lsum.end(), 0.0);
          for (int cut = 1; cut < n; ++cut) {
            for (int o = 0; o < O; ++o) lsum[o] += y[order[cut - 1]][o];
            if (cut < opt.min_leaf || n - cut < opt.min_leaf) continue;
            const double lo = x[order[cut - 1]][ft], hi = x[order[cut]][ft];
            if (!(lo < hi)) continue;
            // SSE reduction = sum_o (L_o^2/nl + R_o^2/nr - T_o^2/n)
            double gain = 0.0;
            for (int o = 0; o < O; ++o) {
              const double r = total[o] - lsum[o];
              gain += lsum[o] * lsum[o] / cut + r * r / (n - cut) - total[o] * total[o] / n;
            }
            if (gain > best_gain) {
              best_gain = gain;
              best_f = ft;
              best_thr = 0.5 * (lo + hi);
            }
          }
        }
      }
      if (best_f < 0) {
        tree[w.node].value = std::move(mean);
        continue;
      }
      std::vector<int> left, right;
      for (int i : w.idx) (x[i][best_f] <= best_thr ? left : right).push_back(i);
      const int l = static_cast<int>(tree.size());
      tree.push_back({});
      tree.push_back({});
      tree[w.node].feature = best_f;
      tree[w.node].threshold = best_thr;
      tree[w.node].left = l;
      tree[w.node].right = l + 1;
      stack.push_back({l + 1, w.depth + 1, std::move(right)});
      stack.push_back({l, w.depth + 1, std::move(left)});
    }
    f.trees_.push_back(std::move(tree));
  }
  return f;
}

std::vector<double> RandomForest::predict(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_features_) throw InputError("feature length does not match the forest");
  std::vector<double> out(n_outputs_, 0.0);
  for (const auto& tree : trees_) {
    int k = 0;
    while (tree[k].feature >= 0) k = x[tree[k].feature] <= tree[k].threshold ? tree[k].left : tree[k].right;
    for (int o = 0; o < n_outputs_; ++o) out[o] += tree[k].value[o];
  }
  for (double& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

void RandomForest::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write forest: " + path);
  os.write(kForestMagic, 4);
  put(os, kForestVersion);
  put(os, fleet_fingerprint);
  put(os, static_cast<std::uint32_t>(n_periods));
  put(os, static_cast<std::uint32_t>(n_features_));
  put(os, static_cast<std::uint32_t>(n_outputs_));
  put(os, static_cast<std::uint32_t>(trees_.size()));
  for (const auto& tree : trees_) {
    put(os, static_cast<std::uint32_t>(tree.size()));
    for (const auto& nd : tree) {
      put(os, static_cast<std::int32_t>(nd.feature));
      put(os, nd.threshold);
      put(os, static_cast<std::int32_t>(nd.left));
      put(os, static_cast<std::int32_t>(nd.right));
      put(os, static_cast<std::uint32_t>(nd.value.size()));
      os.write(reinterpret_cast<const char*>(nd.value.data()),
               static_cast<std::streamsize>(nd.value.size() * sizeof(double)));
    }
  }
  if (!os) throw InputError("forest write failed: " + path);
}

RandomForest RandomForest::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read forest: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kForestMagic, 4) != 0) throw InputError("not a forest file: " + path);
  if (get<std::uint32_t>(is) != kForestVersion) throw InputError("unsupported forest version");
  RandomForest f;
  f.fleet_fingerprint = get<std::uint64_t>(is);
  f.n_periods = static_cast<int>(get<std::uint32_t>(is));
  f.n_features_ = static_cast<int>(get<std::uint32_t>(is));
  f.n_outputs_ = static_cast<int>(get<std::uint32_t>(is));
  const auto nt = get<std::uint32_t>(is);
  if (nt == 0 || nt > 100000 || f.n_outputs_ <= 0 || f.n_outputs_ > 1000000) throw InputError("corrupt forest header");
  for (std::uint32_t k = 0; k < nt; ++k) {
    const auto nn = get<std::uint32_t>(is);
    if (nn == 0 || nn > 50000000) throw InputError("corrupt tree size");
    Tree tree(nn);
    for (auto& nd : tree) {
      nd.feature = get<std::int32_t>(is);
      nd.threshold = get<double>(is);
      nd.left = get<std::int32_t>(is);
      nd.right = get<std::int32_t>(is);
      const auto nv = get<std::uint32_t>(is);
      const bool leaf = nd.feature < 0;
      if (leaf != (nv == static_cast<std::uint32_t>(f.n_outputs_)) || (!leaf && nv != 0))
        throw InputError("corrupt tree node");
      if (!leaf && (nd.feature >= f.n_features_ || nd.left <= 0 || nd.right <= 0 ||
                    nd.left >= static_cast<int>(nn) || nd.right >= static_cast<int>(nn)))
        throw InputError("corrupt tree node");
      nd.value.resize(nv);
      is.read(reinterpret_cast<char*>(nd.value.data()), static_cast<std::streamsize>(nv * sizeof(double)));
      if (!is) throw InputError("forest file truncated");
    }
    f.trees_.push_back(std::move(tree));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw InputError("trailing bytes in forest file");
  return f;
}

RandomForest train_random_forest(const DualDataset& d, const ForestOptions& opt) {
  if (d.records.empty()) throw InputError("empty dual dataset");
  std::vector<std::vector<double>> x, y;
  for (const auto& r : d.records) {
    x.push_back(r.features);
    y.push_back(flatten(r.dual));
  }
  auto f = RandomForest::fit(x, y, opt);
  f.fleet_fingerprint = d.fleet_fingerprint;
  f.n_periods = d.n_periods;
  return f;
}

DualPoint rf_predict(const RandomForest& f, const UcInstance& inst) {
  if (fleet_fingerprint(inst.generators) != f.fleet_fingerprint || inst.n_periods != f.n_periods)
    throw InputError("instance fleet differs from the forest's");
  return unflatten(f.predict(to_std(featurize(inst))), f.n_periods);
}

}  // namespace ucdw
