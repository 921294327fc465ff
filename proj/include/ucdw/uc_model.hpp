#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucdw {

/// Raised when inputs have inconsistent shapes or violate documented preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Absolute feasibility tolerance (MW) used by every model check.
inline constexpr double kFeasTol = 1e-6;

struct GeneratorSpec {
  double no_load_cost = 0.0;   // cost per on-period
  double marginal_cost = 0.0;  // cost per MWh
  double startup_cost = 0.0;   // cost per start event
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double startup_ramp = 0.0;
  double shutdown_ramp = 0.0;
  int min_up = 1;
  int min_down = 1;
  bool initial_on = false;
  double initial_power = 0.0;

  bool operator==(const GeneratorSpec&) const = default;
};

/// Returns a human-readable list of invariant breaches (empty when valid).
std::vector<std::string> check_generator_invariants(const GeneratorSpec& gen);

struct DemandProfile {
  std::vector<double> demand;
  std::vector<double> reserve;

  bool operator==(const DemandProfile&) const = default;
};

struct InstanceMeta {
  std::uint64_t seed = 0;
  double scaling = 1.0;
};

struct UcInstance {
  std::vector<GeneratorSpec> generators;
  DemandProfile profile;
  int n_periods = 0;
  InstanceMeta meta;

  int n_generators() const { return static_cast<int>(generators.size()); }
  double total_capacity() const;
  /// Throws InputError if shapes or invariants are broken.
  void validate() const;
};

/// One generator's commitment and dispatch over the horizon (0-based arrays).
struct Schedule {
  std::vector<std::uint8_t> on;
  std::vector<std::uint8_t> startup;
  std::vector<std::uint8_t> shutdown;
  std::vector<double> power;

  static Schedule all_off(int n_periods);
  int n_periods() const { return static_cast<int>(on.size()); }
  int on_count() const;
  bool operator==(const Schedule&) const = default;
};

/// Derives startup/shutdown indicators from an on/off pattern and the initial state.
Schedule schedule_from_commitment(const GeneratorSpec& gen, const std::vector<std::uint8_t>& on,
                                  std::vector<double> power);

struct UcSolution {
  std::vector<Schedule> schedules;
  double total_cost = 0.0;
};

struct Violation {
  std::string family;
  int generator = -1;  // -1 for system-wide rows
  int period = 0;      // 1-based
  double residual = 0.0;
};

std::vector<Violation> validate_schedule(const GeneratorSpec& gen, const Schedule& sched,
                                         int n_periods);

std::vector<Violation> check_system_feasibility(const UcInstance& instance,
                                                const UcSolution& solution);

double schedule_cost(const GeneratorSpec& gen, const Schedule& sched);
double evaluate_cost(const UcInstance& instance, const UcSolution& solution);

/// Per-period linking contributions of one schedule: load row (p) and reserve row (Pmax*on - p).
struct LinkingContribution {
  std::vector<double> load;
  std::vector<double> reserve;
};
LinkingContribution linking_contribution(const GeneratorSpec& gen, const Schedule& sched);

// ---------------------------------------------------------------------------
// Synthetic data

struct FleetOptions {
  bool initially_on = true;
};

std::vector<GeneratorSpec> generate_fleet(int n_generators, std::uint64_t seed,
                                          const FleetOptions& options = {});

struct DemandOptions {
  double reserve_fraction = 0.10;
  double peak_fraction = 0.50;  // median daily peak relative to fleet capacity
};

struct DemandPool {
  std::vector<DemandProfile> profiles;
  double scaling = 1.0;  // factor applied to the raw diurnal shapes
};

/// Seeded diurnal profiles scaled so the median daily peak hits `peak_fraction` of capacity.
DemandPool generate_demand(const std::vector<GeneratorSpec>& fleet, int n_periods, int n_profiles,
                           std::uint64_t seed, const DemandOptions& options = {});

/// Peak demand of every 24-period day in every profile.
std::vector<double> daily_peaks(const std::vector<DemandProfile>& profiles);

UcInstance make_instance(std::vector<GeneratorSpec> fleet, DemandProfile profile,
                         std::uint64_t seed = 0, double scaling = 1.0);

// ---------------------------------------------------------------------------
// Instance files

std::string instance_to_json(const UcInstance& instance);
UcInstance instance_from_json(const std::string& text);
void write_instance(const UcInstance& instance, const std::string& path);
UcInstance read_instance(const std::string& path);

/// 64-bit FNV-1a hash over the canonical binary form of a fleet.
std::uint64_t fleet_fingerprint(const std::vector<GeneratorSpec>& fleet);

}  // namespace ucdw
