#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdma/result.hpp"
#include "mdma/scenario.hpp"

namespace mdma {

inline const std::vector<std::string> kAlgorithms = {"MODP", "VoS-SCA", "VoS-Fixed", "Random-SCA",
                                                     "Random-Fixed"};

class UnknownAlgorithm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sequential seeded placement: each user draws RBs uniformly until one has room.
/// Users left over when every RB is full stay unassigned.
Assignment random_assignment(const Scenario& s, std::uint64_t seed);

struct RunOptions {
  double eps = 0.05;    ///< MODP certificate
  int max_sweeps = 20;  ///< swap sweeps of VoS-SCA
  std::ostream* trace = nullptr;
  bool timing = false;  ///< fill wall_ms
};

/// Throws UnknownAlgorithm for a name outside kAlgorithms and StateBudgetExceeded when MODP
/// cannot run on the instance.
SolveResult run_algorithm(const std::string& name, const Scenario& s, std::uint64_t seed,
                          const RunOptions& opt = {});

struct ExperimentConfig {
  ScenarioConfig scenario;
  /// none, p_max_dbm, alpha_cap, beta_cap, num_users (split evenly), num_bands
  std::string sweep_var = "none";
  std::vector<double> values{0.0};
  std::vector<std::string> algorithms = kAlgorithms;
  int trials = 50;
  std::uint64_t base_seed = 1;
  RunOptions run;

  void validate() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

/// fig4 .. fig8 with the reference captions.
ExperimentConfig preset(const std::string& name);

/// Template with the sweep variable set to value.
ScenarioConfig apply_sweep(ScenarioConfig base, const std::string& var, double value);

struct CsvRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  int trial = 0;           ///< -1 on aggregate rows (written as "agg")
  std::string algo;
  double log_objective = 0.0;
  double product_vos = 0.0;
  double vos_comm_mean = 0.0, vos_pos_mean = 0.0, vos_sense_mean = 0.0;
  double wall_ms = 0.0;
  /// Data rows: 1 when the solver certified its result. Aggregate rows: standard error of
  /// log_objective.
  double certified = 0.0;

  bool aggregate() const { return trial < 0; }
  bool operator==(const CsvRow&) const = default;
};

inline const std::vector<std::string> kCsvColumns = {
    "sweep_var",    "sweep_value",   "trial",          "algo",    "log_objective", "product_vos",
    "vos_comm_mean", "vos_pos_mean", "vos_sense_mean", "wall_ms", "certified"};

/// One row per value x trial x algorithm, each value followed by its aggregate rows.
/// A failing run is recorded with NaN metrics and the sweep continues.
std::vector<CsvRow> sweep(const ExperimentConfig& c, std::ostream* progress = nullptr);

/// Aggregate rows for the data rows of one (value, algorithm) group, in first-seen order.
/// Mean log-objective, geometric-mean product VoS, mean per-type VoS and wall time, and the
/// standard error of the log-objective in the certified column.
std::vector<CsvRow> aggregate(const std::vector<CsvRow>& data);

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows);
/// Throws std::runtime_error naming the offending column or line.
std::vector<CsvRow> read_csv(std::istream& is);

}  // namespace mdma
