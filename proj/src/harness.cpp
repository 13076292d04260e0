#include "mdma/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mdma/modp.hpp"
#include "mdma/sca.hpp"

namespace mdma {

Assignment random_assignment(const Scenario& s, std::uint64_t seed) {
  const int K = s.num_users();
  const int M = s.grid().num_bands;
  const int R = s.grid().num_rbs();
  const int cap = s.params().a_max;
  std::mt19937_64 rng(seed);
  std::vector<int> order(K);
  for (int k = 0; k < K; ++k) order[k] = k;
  for (int i = K - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(uniform01(rng) * (i + 1)));
    std::swap(order[i], order[j]);
  }
  Assignment a(K, M, s.grid().num_frames);
  std::vector<int> count(R, 0);
  int free_slots = R * cap;
  for (int k : order) {
    if (free_slots == 0) break;
    for (;;) {
      const int r = std::min(R - 1, static_cast<int>(uniform01(rng) * R));
      if (count[r] >= cap) continue;
      ++count[r];
      --free_slots;
      a.assign(k, Rb{r % M, r / M});
      break;
    }
  }
  return a;
}

SolveResult run_algorithm(const std::string& name, const Scenario& s, std::uint64_t seed,
                          const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult r;
  if (name == "MODP") {
    ModpOptions mo;
    mo.polyblock.eps = opt.eps;
    mo.trace = opt.trace;
    r = modp_solve(s, mo);
  } else if (name == "VoS-SCA") {
    SwapOptions so;
    so.max_sweeps = opt.max_sweeps;
    so.seed = seed;
    r = swap_refine(vos_prioritized_assignment(s, seed), s, so);
  } else if (name == "VoS-Fixed") {
    const Assignment a = vos_prioritized_assignment(s, seed);
    r = make_result(s, a, fixed_power(a, s));
  } else if (name == "Random-SCA") {
    const Assignment a = random_assignment(s, seed);
    const ScaResult sr = sca_power(a, s);
    r = make_result(s, a, sr.p);
    r.diag.below_range = sr.below_range;
    r.diag.iterations = sr.iterations;
    r.diag.trace = sr.trace;
  } else if (name == "Random-Fixed") {
    const Assignment a = random_assignment(s, seed);
    r = make_result(s, a, fixed_power(a, s));
  } else {
    throw UnknownAlgorithm("unknown algorithm: " + name);
  }
  r.diag.algorithm = name;
  if (opt.timing)
    r.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace {

const std::vector<std::string> kSweepVars = {"none",     "p_max_dbm", "alpha_cap",
                                             "beta_cap", "num_users", "num_bands"};

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(std::find(kSweepVars.begin(), kSweepVars.end(), sweep_var) != kSweepVars.end(),
          "unknown sweep variable: " + sweep_var);
  require(!values.empty(), "sweep needs at least one value");
  for (size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), "sweep values must be finite");
    require(i == 0 || values[i - 1] < values[i], "sweep values must be strictly increasing");
  }
  require(trials >= 1, "trial count must be >= 1");
  require(!algorithms.empty(), "no algorithms listed");
  for (const auto& a : algorithms)
    if (std::find(kAlgorithms.begin(), kAlgorithms.end(), a) == kAlgorithms.end())
      throw UnknownAlgorithm("unknown algorithm: " + a);
  for (double v : values) apply_sweep(scenario, sweep_var, v).validate();
}

ScenarioConfig apply_sweep(ScenarioConfig base, const std::string& var, double value) {
  if (var == "p_max_dbm") {
    base.p_max_dbm = value;
  } else if (var == "alpha_cap") {
    base.alpha_cap = value;
  } else if (var == "beta_cap") {
    base.beta_cap = value;
  } else if (var == "num_users") {
    const int k = static_cast<int>(std::lround(value));
    require(k >= 1 && std::abs(value - k) < 1e-9, "num_users sweep needs integers");
    base.num_comm = k / 3 + (k % 3 > 0);
    base.num_pos = k / 3 + (k % 3 > 1);
    base.num_sense = k / 3;
  } else if (var == "num_bands") {
    const int m = static_cast<int>(std::lround(value));
    require(m >= 1 && std::abs(value - m) < 1e-9, "num_bands sweep needs integers");
    base.grid.num_bands = m;
  } else {
    require(var == "none", "unknown sweep variable: " + var);
  }
  return base;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  static const char* known[] = {"scenario", "sweep_var", "values",     "algorithms", "trials",
                                "base_seed", "eps",      "max_sweeps", "timing"};
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("unknown experiment key: " + key);
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = scenario_config_from_json(j["scenario"]);
  c.sweep_var = j.value("sweep_var", c.sweep_var);
  if (j.contains("values")) c.values = j["values"].get<std::vector<double>>();
  if (j.contains("algorithms")) c.algorithms = j["algorithms"].get<std::vector<std::string>>();
  c.trials = j.value("trials", c.trials);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.run.eps = j.value("eps", c.run.eps);
  c.run.max_sweeps = j.value("max_sweeps", c.run.max_sweeps);
  c.run.timing = j.value("timing", c.run.timing);
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"scenario", to_json(c.scenario)},
          {"sweep_var", c.sweep_var},
          {"values", c.values},
          {"algorithms", c.algorithms},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"eps", c.run.eps},
          {"max_sweeps", c.run.max_sweeps},
          {"timing", c.run.timing}};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  ScenarioConfig& s = c.scenario;
  const std::vector<std::string> heuristics = {"VoS-SCA", "VoS-Fixed", "Random-SCA",
                                               "Random-Fixed"};
  if (name == "fig4") {
    s.num_comm = 3, s.num_pos = 2, s.num_sense = 1;
    s.grid.num_bands = 1, s.grid.num_frames = 3;
    s.a_max = 2;
    s.alpha_cap = 0.3, s.beta_cap = 0.3;
    c.sweep_var = "p_max_dbm";
    c.values = {10, 16, 22, 28, 34, 40};
  } else if (name == "fig5" || name == "fig6") {
    s.num_comm = 6, s.num_pos = 5, s.num_sense = 4;
    s.grid.num_bands = 2, s.grid.num_frames = 3;
    s.a_max = 4;
    s.p_max_dbm = 30;
    c.algorithms = heuristics;
    if (name == "fig5") {
      s.beta_cap = 0.2;
      c.sweep_var = "alpha_cap";
      c.values = {0.1, 0.3, 0.5, 0.7, 0.9};
    } else {
      s.alpha_cap = 0.3;
      c.sweep_var = "beta_cap";
      c.values = {0.1, 0.2, 0.3, 0.4, 0.5};
    }
  } else if (name == "fig7") {
    s.grid.num_bands = 3, s.grid.num_frames = 3;
    s.a_max = 6;
    s.alpha_cap = 0.3, s.beta_cap = 0.3;
    c.algorithms = heuristics;
    c.sweep_var = "num_users";
    c.values = {3, 6, 9, 12};
  } else if (name == "fig8") {
    s.num_comm = 3, s.num_pos = 3, s.num_sense = 3;
    s.grid.num_frames = 2;
    s.a_max = 3;
    s.alpha_cap = 0.8, s.beta_cap = 0.1;
    c.algorithms = heuristics;
    c.sweep_var = "num_bands";
    c.values = {1, 2, 3, 4};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return c;
}

namespace {

CsvRow row_from(const ExperimentConfig& c, double value, int trial, const std::string& algo,
                const Scenario& s, const SolveResult& r) {
  CsvRow row;
  row.sweep_var = c.sweep_var;
  row.sweep_value = value;
  row.trial = trial;
  row.algo = algo;
  row.log_objective = r.log_objective;
  row.product_vos = r.product_vos;
  row.vos_comm_mean = r.mean_vos(s, ServiceType::Comm);
  row.vos_pos_mean = r.mean_vos(s, ServiceType::Pos);
  row.vos_sense_mean = r.mean_vos(s, ServiceType::Sense);
  row.wall_ms = r.wall_ms;
  row.certified = r.diag.certified ? 1.0 : 0.0;
  return row;
}

CsvRow failed_row(const ExperimentConfig& c, double value, int trial, const std::string& algo) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvRow row;
  row.sweep_var = c.sweep_var;
  row.sweep_value = value;
  row.trial = trial;
  row.algo = algo;
  row.log_objective = row.product_vos = nan;
  row.vos_comm_mean = row.vos_pos_mean = row.vos_sense_mean = nan;
  row.wall_ms = 0.0;
  row.certified = 0.0;
  return row;
}

}  // namespace

std::vector<CsvRow> sweep(const ExperimentConfig& c, std::ostream* progress) {
  c.validate();
  std::vector<CsvRow> out;
  for (double value : c.values) {
    const ScenarioConfig sc = apply_sweep(c.scenario, c.sweep_var, value);
    std::vector<CsvRow> data;
    for (int t = 0; t < c.trials; ++t) {
      const std::uint64_t seed = c.base_seed + static_cast<std::uint64_t>(t);
      std::optional<Scenario> s;
      try {
        s.emplace(generate(sc, seed));
      } catch (const std::exception& e) {
        if (progress) *progress << "value " << value << " trial " << t << ": " << e.what() << '\n';
      }
      for (const auto& algo : c.algorithms) {
        if (!s) {
          data.push_back(failed_row(c, value, t, algo));
          continue;
        }
        try {
          data.push_back(row_from(c, value, t, algo, *s, run_algorithm(algo, *s, seed, c.run)));
        } catch (const std::exception& e) {
          if (progress)
            *progress << "value " << value << " trial " << t << " " << algo << ": " << e.what()
                      << '\n';
          data.push_back(failed_row(c, value, t, algo));
        }
      }
    }
    if (progress) *progress << c.sweep_var << " = " << value << " done\n";
    const auto agg = aggregate(data);
    out.insert(out.end(), data.begin(), data.end());
    out.insert(out.end(), agg.begin(), agg.end());
  }
  return out;
}

std::vector<CsvRow> aggregate(const std::vector<CsvRow>& data) {
  std::vector<std::pair<double, std::string>> groups;
  for (const auto& r : data) {
    if (r.aggregate()) continue;
    const auto key = std::make_pair(r.sweep_value, r.algo);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  std::vector<CsvRow> out;
  for (const auto& [value, algo] : groups) {
    CsvRow a;
    a.sweep_value = value;
    a.algo = algo;
    a.trial = -1;
    int n = 0;
    double sum = 0.0, sum_log_vos = 0.0, comm = 0.0, pos = 0.0, sense = 0.0, wall = 0.0;
    bool zero_vos = false;
    std::vector<double> logs;
    for (const auto& r : data) {
      if (r.aggregate() || r.sweep_value != value || r.algo != algo) continue;
      a.sweep_var = r.sweep_var;
      if (!std::isfinite(r.log_objective)) continue;
      ++n;
      sum += r.log_objective;
      logs.push_back(r.log_objective);
      if (r.product_vos > 0.0)
        sum_log_vos += std::log(r.product_vos);
      else
        zero_vos = true;
      comm += r.vos_comm_mean;
      pos += r.vos_pos_mean;
      sense += r.vos_sense_mean;
      wall += r.wall_ms;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (n == 0) {
      a.log_objective = a.product_vos = a.vos_comm_mean = a.vos_pos_mean = a.vos_sense_mean = nan;
      a.wall_ms = 0.0;
      a.certified = nan;
      out.push_back(a);
      continue;
    }
    a.log_objective = sum / n;
    a.product_vos = zero_vos ? 0.0 : std::exp(sum_log_vos / n);
    a.vos_comm_mean = comm / n;
    a.vos_pos_mean = pos / n;
    a.vos_sense_mean = sense / n;
    a.wall_ms = wall / n;
    double ss = 0.0;
    for (double v : logs) ss += (v - a.log_objective) * (v - a.log_objective);
    a.certified = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    out.push_back(a);
  }
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& field, const std::string& column, int line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("csv line " + std::to_string(line) + ": column '" + column +
                           "' is not a number: '" + field + "'");
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  for (size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
  os << '\n';
  for (const auto& r : rows) {
    os << r.sweep_var << ',' << num(r.sweep_value) << ','
       << (r.aggregate() ? std::string("agg") : std::to_string(r.trial)) << ',' << r.algo << ','
       << num(r.log_objective) << ',' << num(r.product_vos) << ',' << num(r.vos_comm_mean) << ','
       << num(r.vos_pos_mean) << ',' << num(r.vos_sense_mean) << ',' << num(r.wall_ms) << ','
       << num(r.certified) << '\n';
  }
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  for (const auto& col : kCsvColumns)
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw std::runtime_error("csv: missing column '" + col + "'");
  if (header != kCsvColumns) throw std::runtime_error("csv: columns out of order");

  std::vector<CsvRow> rows;
  int ln = 1;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != kCsvColumns.size())
      throw std::runtime_error("csv line " + std::to_string(ln) + ": expected " +
                               std::to_string(kCsvColumns.size()) + " fields");
    CsvRow r;
    r.sweep_var = f[0];
    r.sweep_value = parse_num(f[1], "sweep_value", ln);
    r.trial = f[2] == "agg" ? -1 : static_cast<int>(parse_num(f[2], "trial", ln));
    r.algo = f[3];
    r.log_objective = parse_num(f[4], "log_objective", ln);
    r.product_vos = parse_num(f[5], "product_vos", ln);
    r.vos_comm_mean = parse_num(f[6], "vos_comm_mean", ln);
    r.vos_pos_mean = parse_num(f[7], "vos_pos_mean", ln);
    r.vos_sense_mean = parse_num(f[8], "vos_sense_mean", ln);
    r.wall_ms = parse_num(f[9], "wall_ms", ln);
    r.certified = parse_num(f[10], "certified", ln);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mdma
