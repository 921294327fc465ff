#include "ucdw/uc_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace ucdw {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

void add_violation(std::vector<Violation>& out, const char* family, int generator, int period,
                   double residual) {
  out.push_back(Violation{family, generator, period, residual});
}

}  // namespace

std::vector<std::string> check_generator_invariants(const GeneratorSpec& g) {
  std::vector<std::string> bad;
  auto finite = [](double v) { return std::isfinite(v); };
  for (double v : {g.no_load_cost, g.marginal_cost, g.startup_cost, g.p_min, g.p_max, g.ramp_up,
                   g.ramp_down, g.startup_ramp, g.shutdown_ramp, g.initial_power}) {
    if (!finite(v)) bad.emplace_back("non-finite field");
  }
  if (!(g.p_min > 0.0)) bad.emplace_back("p_min must be positive");
  if (!(g.p_min <= g.p_max)) bad.emplace_back("p_min exceeds p_max");
  if (g.startup_ramp < g.p_min) bad.emplace_back("startup_ramp below p_min");
  if (g.shutdown_ramp < g.p_min) bad.emplace_back("shutdown_ramp below p_min");
  if (g.no_load_cost < 0 || g.marginal_cost < 0 || g.startup_cost < 0)
    bad.emplace_back("negative cost");
  if (g.ramp_up < 0 || g.ramp_down < 0) bad.emplace_back("negative ramp");
  if (g.min_up < 1 || g.min_down < 1) bad.emplace_back("min up/down below 1");
  if (!g.initial_on && g.initial_power != 0.0) bad.emplace_back("off generator with power");
  if (g.initial_on && (g.initial_power < g.p_min || g.initial_power > g.p_max))
    bad.emplace_back("initial power outside [p_min, p_max]");
  return bad;
}

double UcInstance::total_capacity() const {
  double cap = 0.0;
  for (const auto& g : generators) cap += g.p_max;
  return cap;
}

void UcInstance::validate() const {
  require(!generators.empty(), "instance has no generators");
  require(n_periods >= 1, "instance horizon must be positive");
  require(static_cast<int>(profile.demand.size()) == n_periods, "demand length != n_T");
  require(static_cast<int>(profile.reserve.size()) == n_periods, "reserve length != n_T");
  for (std::size_t s = 0; s < generators.size(); ++s) {
    auto bad = check_generator_invariants(generators[s]);
    require(bad.empty(), "generator " + std::to_string(s) + ": " + (bad.empty() ? "" : bad[0]));
  }
  for (int t = 0; t < n_periods; ++t) {
    require(profile.demand[t] >= 0 && profile.reserve[t] >= 0, "negative demand/reserve");
    require(std::isfinite(profile.demand[t]) && std::isfinite(profile.reserve[t]),
            "non-finite demand/reserve");
  }
}

Schedule Schedule::all_off(int n_periods) {
  Schedule s;
  s.on.assign(n_periods, 0);
  s.startup.assign(n_periods, 0);
  s.shutdown.assign(n_periods, 0);
  s.power.assign(n_periods, 0.0);
  return s;
}

int Schedule::on_count() const {
  return static_cast<int>(std::count(on.begin(), on.end(), std::uint8_t{1}));
}

Schedule schedule_from_commitment(const GeneratorSpec& gen, const std::vector<std::uint8_t>& on,
                                  std::vector<double> power) {
  const int n = static_cast<int>(on.size());
  require(static_cast<int>(power.size()) == n, "power/commitment length mismatch");
  Schedule s;
  s.on = on;
  s.startup.assign(n, 0);
  s.shutdown.assign(n, 0);
  s.power = std::move(power);
  int prev = gen.initial_on ? 1 : 0;
  for (int t = 0; t < n; ++t) {
    if (on[t] && !prev) s.startup[t] = 1;
    if (!on[t] && prev) s.shutdown[t] = 1;
    prev = on[t];
  }
  return s;
}

std::vector<Violation> validate_schedule(const GeneratorSpec& g, const Schedule& s, int n) {
  require(static_cast<int>(s.on.size()) == n && static_cast<int>(s.startup.size()) == n &&
              static_cast<int>(s.shutdown.size()) == n && static_cast<int>(s.power.size()) == n,
          "schedule arrays must have length n_T");
  std::vector<Violation> out;
  const double tol = kFeasTol;
  for (int t = 0; t < n; ++t) {
    const int period = t + 1;
    const double a = s.on[t], gm = s.startup[t], et = s.shutdown[t], p = s.power[t];
    if (s.on[t] > 1 || s.startup[t] > 1 || s.shutdown[t] > 1)
      add_violation(out, "binary", -1, period, 1.0);
    if (!std::isfinite(p)) {
      add_violation(out, "power_bounds", -1, period, INFINITY);
      continue;
    }
    if (g.p_min * a - p > tol) add_violation(out, "power_bounds", -1, period, g.p_min * a - p);
    if (p - g.p_max * a > tol) add_violation(out, "power_bounds", -1, period, p - g.p_max * a);

    const double a_prev = t == 0 ? (g.initial_on ? 1.0 : 0.0) : s.on[t - 1];
    const double p_prev = t == 0 ? (g.initial_on ? g.initial_power : 0.0) : s.power[t - 1];
    const double sw = (a - a_prev) - (gm - et);
    if (std::abs(sw) > tol) add_violation(out, "switching", -1, period, std::abs(sw));
    if (gm + et - 1.0 > tol) add_violation(out, "start_stop_exclusive", -1, period, gm + et - 1.0);

    const double up = (p - p_prev) - (g.ramp_up * a_prev + g.startup_ramp * gm);
    if (up > tol) add_violation(out, gm > 0 ? "startup_ramp" : "ramp_up", -1, period, up);
    const double down = (p_prev - p) - (g.ramp_down * a + g.shutdown_ramp * et);
    if (down > tol) add_violation(out, et > 0 ? "shutdown_ramp" : "ramp_down", -1, period, down);

    double starts = 0.0;
    for (int i = std::max(t - g.min_up + 1, 0); i <= t; ++i) starts += s.startup[i];
    if (starts - a > tol) add_violation(out, "min_up", -1, period, starts - a);
    double stops = 0.0;
    for (int i = std::max(t - g.min_down + 1, 0); i <= t; ++i) stops += s.shutdown[i];
    if (stops - (1.0 - a) > tol) add_violation(out, "min_down", -1, period, stops - (1.0 - a));
  }
  return out;
}

std::vector<Violation> check_system_feasibility(const UcInstance& inst, const UcSolution& sol) {
  const int n = inst.n_periods;
  require(sol.schedules.size() == inst.generators.size(), "one schedule per generator required");
  require(static_cast<int>(inst.profile.demand.size()) == n &&
              static_cast<int>(inst.profile.reserve.size()) == n,
          "profile length mismatch");
  std::vector<Violation> out;
  std::vector<double> load(n, 0.0), headroom(n, 0.0);
  for (std::size_t s = 0; s < inst.generators.size(); ++s) {
    const auto& g = inst.generators[s];
    const auto& sch = sol.schedules[s];
    for (auto v : validate_schedule(g, sch, n)) {
      v.generator = static_cast<int>(s);
      out.push_back(std::move(v));
    }
    for (int t = 0; t < n; ++t) {
      load[t] += sch.power[t];
      headroom[t] += g.p_max * sch.on[t] - sch.power[t];
    }
  }
  for (int t = 0; t < n; ++t) {
    const double short_load = inst.profile.demand[t] - load[t];
    if (short_load > kFeasTol) add_violation(out, "load_balance", -1, t + 1, short_load);
    const double short_res = inst.profile.reserve[t] - headroom[t];
    if (short_res > kFeasTol) add_violation(out, "reserve", -1, t + 1, short_res);
  }
  return out;
}

double schedule_cost(const GeneratorSpec& g, const Schedule& s) {
  double c = 0.0;
  for (std::size_t t = 0; t < s.on.size(); ++t)
    c += g.no_load_cost * s.on[t] + g.marginal_cost * s.power[t] + g.startup_cost * s.startup[t];
  return c;
}

double evaluate_cost(const UcInstance& inst, const UcSolution& sol) {
  require(sol.schedules.size() == inst.generators.size(), "one schedule per generator required");
  double c = 0.0;
  for (std::size_t s = 0; s < sol.schedules.size(); ++s) {
    require(sol.schedules[s].n_periods() == inst.n_periods &&
                static_cast<int>(sol.schedules[s].power.size()) == inst.n_periods,
            "schedule length mismatch");
    c += schedule_cost(inst.generators[s], sol.schedules[s]);
  }
  return c;
}

LinkingContribution linking_contribution(const GeneratorSpec& g, const Schedule& s) {
  LinkingContribution lc;
  const int n = s.n_periods();
  lc.load.resize(n);
  lc.reserve.resize(n);
  for (int t = 0; t < n; ++t) {
    lc.load[t] = s.power[t];
    lc.reserve[t] = g.p_max * s.on[t] - s.power[t];
  }
  return lc;
}

// ---------------------------------------------------------------------------

std::vector<GeneratorSpec> generate_fleet(int n, std::uint64_t seed, const FleetOptions& opt) {
  require(n >= 1, "fleet size must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<GeneratorSpec> fleet;
  fleet.reserve(n);
  for (int i = 0; i < n; ++i) {
    GeneratorSpec g;
    g.p_max = std::exp(uniform(std::log(50.0), std::log(600.0)));
    g.p_min = uniform(0.25, 0.5) * g.p_max;
    g.marginal_cost = uniform(10.0, 50.0);
    g.no_load_cost = uniform(0.1, 0.3) * g.marginal_cost * g.p_max;
    g.startup_cost = uniform(1.0, 10.0) * g.no_load_cost;
    g.ramp_up = g.ramp_down = uniform(0.2, 0.5) * g.p_max;
    g.startup_ramp = g.shutdown_ramp = g.p_min + unit(rng) * (g.p_max - g.p_min) * 0.5;
    g.min_up = 1 + static_cast<int>(rng() % 8);
    g.min_down = 1 + static_cast<int>(rng() % 8);
    g.initial_on = opt.initially_on;
    g.initial_power = opt.initially_on ? g.p_min : 0.0;
    fleet.push_back(g);
  }
  return fleet;
}

std::vector<double> daily_peaks(const std::vector<DemandProfile>& profiles) {
  std::vector<double> peaks;
  for (const auto& p : profiles) {
    const int n = static_cast<int>(p.demand.size());
    for (int d = 0; d * 24 < n; ++d) {
      const auto first = p.demand.begin() + d * 24;
      const auto last = p.demand.begin() + std::min(n, (d + 1) * 24);
      peaks.push_back(*std::max_element(first, last));
    }
  }
  return peaks;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

DemandPool generate_demand(const std::vector<GeneratorSpec>& fleet, int n_periods, int n_profiles,
                           std::uint64_t seed, const DemandOptions& opt) {
  require(!fleet.empty(), "fleet must be non-empty");
  require(n_periods >= 24 && n_periods % 24 == 0, "n_T must be a positive multiple of 24");
  require(n_profiles >= 1, "need at least one profile");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  DemandPool pool;
  pool.profiles.resize(n_profiles);
  for (auto& prof : pool.profiles) {
    // Season-like level plus day-to-day variation and autocorrelated noise.
    const double level = uniform(0.8, 1.2);
    const double evening_weight = uniform(0.25, 0.45);
    const double morning_weight = uniform(0.15, 0.3);
    const double evening_hour = uniform(17.0, 19.5);
    prof.demand.resize(n_periods);
    double noise = 0.0;
    for (int d = 0; d * 24 < n_periods; ++d) {
      const double day_factor = uniform(0.88, 1.08);
      for (int h = 0; h < 24; ++h) {
        const double x = h + 0.5;
        double shape = 0.55 + morning_weight * std::exp(-std::pow((x - 8.5) / 2.5, 2)) +
                       evening_weight * std::exp(-std::pow((x - evening_hour) / 3.0, 2)) -
                       0.08 * std::cos(2.0 * M_PI * (x - 4.0) / 24.0);
        noise = 0.7 * noise + 0.015 * normal(rng);
        prof.demand[d * 24 + h] = std::max(0.05, level * day_factor * shape * (1.0 + noise));
      }
    }
  }

  double cap = 0.0;
  for (const auto& g : fleet) cap += g.p_max;
  const double med = median(daily_peaks(pool.profiles));
  pool.scaling = opt.peak_fraction * cap / med;
  const double ceiling = cap / (1.0 + opt.reserve_fraction);
  for (auto& prof : pool.profiles) {
    prof.reserve.resize(n_periods);
    for (int t = 0; t < n_periods; ++t) {
      prof.demand[t] = std::min(prof.demand[t] * pool.scaling, ceiling);
      prof.reserve[t] = opt.reserve_fraction * prof.demand[t];
    }
  }
  return pool;
}

UcInstance make_instance(std::vector<GeneratorSpec> fleet, DemandProfile profile,
                         std::uint64_t seed, double scaling) {
  UcInstance inst;
  inst.n_periods = static_cast<int>(profile.demand.size());
  inst.generators = std::move(fleet);
  inst.profile = std::move(profile);
  inst.meta.seed = seed;
  inst.meta.scaling = scaling;
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------

namespace {

void put_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
  // Keep a decimal marker so readers see a float even for integral values.
  if (std::strpbrk(buf, ".eEn") == nullptr) out += ".0";
}

void put_array(std::string& out, const std::vector<double>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    put_double(out, v[i]);
  }
  out += ']';
}

}  // namespace

std::string instance_to_json(const UcInstance& inst) {
  std::string out;
  out += "{\"n_T\":" + std::to_string(inst.n_periods) + ",\"generators\":[";
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    if (i) out += ',';
    out += "{\"no_load_cost\":";
    put_double(out, g.no_load_cost);
    out += ",\"marginal_cost\":";
    put_double(out, g.marginal_cost);
    out += ",\"startup_cost\":";
    put_double(out, g.startup_cost);
    out += ",\"p_min\":";
    put_double(out, g.p_min);
    out += ",\"p_max\":";
    put_double(out, g.p_max);
    out += ",\"ramp_up\":";
    put_double(out, g.ramp_up);
    out += ",\"ramp_down\":";
    put_double(out, g.ramp_down);
    out += ",\"startup_ramp\":";
    put_double(out, g.startup_ramp);
    out += ",\"shutdown_ramp\":";
    put_double(out, g.shutdown_ramp);
    out += ",\"min_up\":" + std::to_string(g.min_up);
    out += ",\"min_down\":" + std::to_string(g.min_down);
    out += std::string(",\"initial_on\":") + (g.initial_on ? "true" : "false");
    out += ",\"initial_power\":";
    put_double(out, g.initial_power);
    out += '}';
  }
  out += "],\"demand\":";
  put_array(out, inst.profile.demand);
  out += ",\"reserve\":";
  put_array(out, inst.profile.reserve);
  out += ",\"meta\":{\"seed\":" + std::to_string(inst.meta.seed) + ",\"scaling\":";
  put_double(out, inst.meta.scaling);
  out += "}}\n";
  return out;
}

UcInstance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance JSON parse error: ") + e.what());
  }
  try {
    UcInstance inst;
    inst.n_periods = j.at("n_T").get<int>();
    for (const auto& jg : j.at("generators")) {
      GeneratorSpec g;
      g.no_load_cost = jg.at("no_load_cost").get<double>();
      g.marginal_cost = jg.at("marginal_cost").get<double>();
      g.startup_cost = jg.at("startup_cost").get<double>();
      g.p_min = jg.at("p_min").get<double>();
      g.p_max = jg.at("p_max").get<double>();
      g.ramp_up = jg.at("ramp_up").get<double>();
      g.ramp_down = jg.at("ramp_down").get<double>();
      g.startup_ramp = jg.at("startup_ramp").get<double>();
      g.shutdown_ramp = jg.at("shutdown_ramp").get<double>();
      g.min_up = jg.at("min_up").get<int>();
      g.min_down = jg.at("min_down").get<int>();
      g.initial_on = jg.at("initial_on").get<bool>();
      g.initial_power = jg.at("initial_power").get<double>();
      inst.generators.push_back(g);
    }
    inst.profile.demand = j.at("demand").get<std::vector<double>>();
    inst.profile.reserve = j.at("reserve").get<std::vector<double>>();
    if (j.contains("meta")) {
      inst.meta.seed = j["meta"].value("seed", std::uint64_t{0});
      inst.meta.scaling = j["meta"].value("scaling", 1.0);
    }
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance JSON schema error: ") + e.what());
  }
}

void write_instance(const UcInstance& inst, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << instance_to_json(inst);
}

UcInstance read_instance(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return instance_from_json(ss.str());
}

std::uint64_t fleet_fingerprint(const std::vector<GeneratorSpec>& fleet) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& g : fleet) {
    for (double v : {g.no_load_cost, g.marginal_cost, g.startup_cost, g.p_min, g.p_max, g.ramp_up,
                     g.ramp_down, g.startup_ramp, g.shutdown_ramp, g.initial_power})
      mix(&v, sizeof v);
    const std::int32_t ints[3] = {g.min_up, g.min_down, g.initial_on ? 1 : 0};
    mix(ints, sizeof ints);
  }
  return h;
}

}  // namespace ucdw
