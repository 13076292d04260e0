// mdma: scenario generation, single solves, sweeps and the self-test from the command line.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdma/harness.hpp"
#include "mdma/modp.hpp"
#include "mdma/scenario.hpp"
#include "mdma/selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void warn_capacity(const mdma::Scenario& s) {
  const long cap = static_cast<long>(s.grid().num_rbs()) * s.params().a_max;
  if (cap < s.num_users())
    std::cerr << "warning: " << s.num_users() << " services exceed grid capacity " << cap << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// NaN and inf are not JSON numbers
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json result_json(const mdma::Scenario& s, const mdma::SolveResult& r) {
  json users = json::array();
  for (int k = 0; k < s.num_users(); ++k) {
    json u{{"id", k}, {"type", mdma::to_string(s.user(k).type)}};
    const auto& rb = r.assignment.rb(k);
    u["rb"] = rb ? json{rb->m, rb->n} : json(nullptr);
    u["p"] = r.p(k);
    u["z"] = r.z(k);
    const auto& uv = r.users.at(k);
    u["vos"] = uv.vos;
    json q = json::array(), v = json::array();
    for (double x : uv.q) q.push_back(number(x));
    for (double x : uv.values) v.push_back(number(x));
    u["kpis"] = q;
    u["values"] = v;
    users.push_back(u);
  }
  json diag{{"algorithm", r.diag.algorithm},     {"certified", r.diag.certified},
            {"infeasible", r.diag.infeasible},   {"below_range", r.diag.below_range},
            {"iterations", r.diag.iterations}};
  if (r.diag.algorithm == "MODP") {
    diag["upper_bound"] = number(r.diag.upper_bound);
    diag["dp_value"] = number(r.diag.dp_value);
  }
  return {{"log_objective", number(r.log_objective)},
          {"product_vos", number(r.product_vos)},
          {"unassigned", r.unassigned},
          {"wall_ms", r.wall_ms},
          {"users", users},
          {"diagnostics", diag}};
}

mdma::ScenarioConfig scenario_template(const std::string& config, bool halved) {
  mdma::ScenarioConfig c;
  if (!config.empty()) c = mdma::scenario_config_from_json(read_json(config));
  if (halved) c.pos_snr_halved = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-dimensional multiple access resource allocation"};
  app.require_subcommand(1);

  std::string config, out_dir = ".", algo = "VoS-SCA", scenario_file, preset;
  std::uint64_t seed = 1;
  std::optional<double> eps;
  std::optional<int> trials;
  bool halved = false, trace = false;

  auto* gen = app.add_subcommand("generate", "Write a seeded scenario file");
  gen->add_option("--config", config, "scenario template (JSON)");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out_dir, "output directory");
  gen->add_flag("--pos-snr-halved", halved, "positioning SNR over 2 sigma_0");

  auto* solve = app.add_subcommand("solve", "Run one algorithm on one instance");
  solve->add_option("--config", config, "scenario template (JSON)");
  solve->add_option("--scenario", scenario_file, "saved scenario file instead of a template");
  solve->add_option("--seed", seed, "scenario and algorithm seed");
  solve->add_option("--algo", algo)->check(CLI::IsMember(mdma::kAlgorithms));
  solve->add_option("--eps", eps, "MODP certificate tolerance");
  solve->add_option("--out", out_dir, "output directory");
  solve->add_flag("--pos-snr-halved", halved, "positioning SNR over 2 sigma_0");
  solve->add_flag("--trace", trace, "write the solver trace");

  auto* sw = app.add_subcommand("sweep", "Run an experiment and write its CSV");
  sw->add_option("--config", config, "experiment file (JSON)");
  sw->add_option("--preset", preset, "fig4 .. fig8")
      ->check(CLI::IsMember({"fig4", "fig5", "fig6", "fig7", "fig8"}));
  sw->add_option("--seed", seed, "base seed");
  sw->add_option("--eps", eps, "MODP certificate tolerance");
  sw->add_option("--trials", trials)->check(CLI::PositiveNumber);
  sw->add_option("--out", out_dir, "output directory");
  sw->add_flag("--pos-snr-halved", halved, "positioning SNR over 2 sigma_0");
  sw->add_flag("--trace", trace, "print progress to stderr");

  auto* st = app.add_subcommand("selftest", "Property checks on random instances");
  st->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const mdma::Scenario s = mdma::generate(scenario_template(config, halved), seed);
      warn_capacity(s);
      const fs::path path = fs::path(out_dir) / ("scenario_" + std::to_string(seed) + ".json");
      fs::create_directories(out_dir);
      mdma::save_scenario(s, path);
      std::cout << path.string() << '\n';
      return 0;
    }

    if (solve->parsed()) {
      if (!scenario_file.empty() && (!config.empty() || halved))
        throw std::invalid_argument("--scenario excludes --config and --pos-snr-halved");
      const mdma::Scenario s = scenario_file.empty()
                                   ? mdma::generate(scenario_template(config, halved), seed)
                                   : mdma::load_scenario(scenario_file);
      warn_capacity(s);
      mdma::RunOptions opt;
      opt.timing = true;
      if (eps) opt.eps = *eps;
      std::ostringstream tr;
      if (trace) opt.trace = &tr;
      const mdma::SolveResult r = mdma::run_algorithm(algo, s, seed, opt);
      for (double v : r.diag.trace) tr << "sca " << v << '\n';
      write_text(fs::path(out_dir) / "result.json", result_json(s, r).dump(2) + "\n");
      if (trace) write_text(fs::path(out_dir) / "trace.txt", tr.str());
      std::cout << algo << " log_objective " << r.log_objective << " product_vos " << r.product_vos
                << " unassigned " << r.unassigned.size() << '\n';
      return 0;
    }

    if (sw->parsed()) {
      if (config.empty() == preset.empty())
        throw std::invalid_argument("sweep needs exactly one of --config and --preset");
      mdma::ExperimentConfig c =
          preset.empty() ? mdma::experiment_from_json(read_json(config)) : mdma::preset(preset);
      if (sw->count("--seed")) c.base_seed = seed;
      if (eps) c.run.eps = *eps;
      if (trials) c.trials = *trials;
      if (halved) c.scenario.pos_snr_halved = true;
      c.validate();
      const auto rows = mdma::sweep(c, trace ? &std::cerr : nullptr);
      std::ostringstream csv;
      mdma::write_csv(csv, rows);
      const fs::path path = fs::path(out_dir) / "sweep.csv";
      write_text(path, csv.str());
      std::cout << path.string() << '\n';
      return 0;
    }

    const mdma::SelftestReport rep = mdma::run_selftest(std::cout, seed);
    std::cout << rep.passed << " passed, " << rep.failed << " failed\n";
    return rep.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
