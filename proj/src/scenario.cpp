#include "mdma/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

namespace mdma {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

Mat gain_matrix(const std::vector<CVec>& rows, const std::vector<CVec>& cols) {
  const int k = static_cast<int>(rows.size());
  Mat g = Mat::Zero(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (cols[j].size() > 0) g(i, j) = std::norm(rows[i].dot(cols[j]));
  return g;
}

// c^2 delta / ((4 pi)^3 f^2 r^4)
double radar_power(double c, double rcs, double f, double r) {
  return c * c * rcs / (std::pow(4.0 * kPi, 3) * f * f * std::pow(r, 4));
}

}  // namespace

void RbGrid::validate() const {
  require(num_bands >= 1 && num_frames >= 1, "grid needs M >= 1 and N >= 1");
  require(subcarriers >= 1 && symbols >= 1, "grid needs B >= 1 and L >= 1");
  require(subcarrier_spacing > 0 && symbol_duration > 0 && carrier_frequency > 0,
          "grid spacing, symbol duration and carrier must be positive");
}

void SystemParams::validate() const {
  require(num_tx >= 1, "L_tx must be >= 1");
  require(p_max > 0, "P_max must be positive");
  require(a_max >= 1, "A_max must be >= 1");
  require(bs_noise > 0, "BS noise must be positive");
  require(rician_k >= 0, "Rician factor must be >= 0");
  require(speed_of_light > 0, "speed of light must be positive");
}

CVec steering_vector(double angle, int num_tx) {
  require(num_tx >= 1, "L_tx must be >= 1");
  CVec v(num_tx);
  const double s = std::sin(angle);
  // conjugated phasors: [1, e^{j pi sin}, ...]^H
  for (int l = 0; l < num_tx; ++l) v(l) = std::polar(1.0, -kPi * l * s);
  return v;
}

double path_loss_linear(double distance) {
  require(distance > 0, "distance must be positive");
  return std::pow(10.0, -(74.2 + 16.8 * std::log10(distance)) / 10.0);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller, one output per call so the stream position is easy to reason about
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Scenario::Scenario(std::vector<UserService> users, RbGrid grid, SystemParams params,
                   std::vector<std::vector<CVec>> channels,
                   std::vector<std::vector<CVec>> beamformers, std::uint64_t seed)
    : users_(std::move(users)), grid_(grid), params_(params), seed_(seed) {
  coeffs_.channel = std::move(channels);
  coeffs_.beamformer = std::move(beamformers);
  finalize();
}

int Scenario::num_of(ServiceType t) const {
  return static_cast<int>(
      std::count_if(users_.begin(), users_.end(), [t](const auto& u) { return u.type == t; }));
}

Scenario Scenario::with_users(std::vector<UserService> users) const {
  require(users.size() == users_.size(), "user count must not change");
  for (size_t k = 0; k < users.size(); ++k)
    require(users[k].type == users_[k].type, "service types must not change");
  return Scenario(std::move(users), grid_, params_, coeffs_.channel, coeffs_.beamformer, seed_);
}

void Scenario::finalize() {
  require(!users_.empty(), "scenario needs at least one user");
  grid_.validate();
  params_.validate();
  const int k_count = num_users();
  const int rbs = grid_.num_rbs();
  const int lt = params_.num_tx;
  require(static_cast<int>(coeffs_.channel.size()) == rbs &&
              static_cast<int>(coeffs_.beamformer.size()) == rbs,
          "channel/beamformer tables must cover every RB");

  const size_t expected[] = {2, 4, 2};
  int last_type = 0;
  for (int k = 0; k < k_count; ++k) {
    const auto& u = users_[k];
    const int t = static_cast<int>(u.type);
    require(t >= last_type, "users must be ordered comm, pos, sense");
    last_type = t;
    require(u.kpis.size() == expected[t], "wrong KPI count for user " + std::to_string(k));
    for (const auto& s : u.kpis) s.validate();
    require(u.distance > 0, "user distance must be positive");
    require(u.noise > 0, "user noise must be positive");
    if (u.type == ServiceType::Sense) {
      require(u.false_alarm > 0 && u.false_alarm < 1, "P_FA must be in (0, 1)");
      require(u.sense_range > 0 && u.sense_power >= 0, "sensing range/power invalid");
    }
  }
  std::vector<CVec> steer(k_count);
  for (int k = 0; k < k_count; ++k) steer[k] = steering_vector(users_[k].angle, lt);

  coeffs_.link_gain.assign(rbs, Mat());
  coeffs_.pos_gain.assign(rbs, Mat());
  for (int r = 0; r < rbs; ++r) {
    require(static_cast<int>(coeffs_.channel[r].size()) == k_count &&
                static_cast<int>(coeffs_.beamformer[r].size()) == k_count,
            "channel table has the wrong user count");
    for (int k = 0; k < k_count; ++k) {
      require(coeffs_.channel[r][k].size() == lt, "channel length must be L_tx");
      const auto bw = coeffs_.beamformer[r][k].size();
      require(users_[k].bs_powered() ? bw == lt : bw == 0, "beamformer shape mismatch");
    }
    coeffs_.link_gain[r] = gain_matrix(coeffs_.channel[r], coeffs_.beamformer[r]);
    Mat pg = gain_matrix(steer, coeffs_.beamformer[r]);
    for (int k = 0; k < k_count; ++k)
      if (users_[k].type != ServiceType::Pos) pg.row(k).setZero();
    coeffs_.pos_gain[r] = pg;
  }

  const int mb = grid_.num_bands;
  const double c = params_.speed_of_light;
  coeffs_.echo_covariance = Mat::Zero(k_count, mb);
  coeffs_.round_trip = Mat::Zero(k_count, mb);
  coeffs_.crb.assign(k_count, {});
  for (int k = 0; k < k_count; ++k) {
    const auto& u = users_[k];
    for (int m = 0; m < mb; ++m) {
      const double f = grid_.band_frequency(m);
      if (u.type == ServiceType::Sense)
        coeffs_.echo_covariance(k, m) = radar_power(c, u.rcs, f, u.sense_range);
      if (u.type == ServiceType::Pos) {
        const double rho = std::sqrt(radar_power(c, u.rcs, f, u.distance));
        coeffs_.round_trip(k, m) = rho;
        const Fim j = fim_matrix(lt, grid_.subcarriers, grid_.symbols, u.angle, rho);
        coeffs_.crb[k].push_back(
            crb_from_fim(j, grid_.subcarrier_spacing, grid_.symbol_duration, f, c));
      }
    }
  }
}

void ScenarioConfig::validate() const {
  require(num_comm >= 0 && num_pos >= 0 && num_sense >= 0, "user counts must be >= 0");
  require(num_users() >= 1, "scenario needs at least one user");
  grid.validate();
  require(num_tx >= 1 && a_max >= 1, "L_tx and A_max must be >= 1");
  require(alpha_cap > 0 && beta_cap > 0 && beta_cap < 1, "elasticity caps out of range");
  require(comm_dist_min > 0 && comm_dist_min <= comm_dist_max, "comm distance range invalid");
  require(pos_dist_min > 0 && pos_dist_min <= pos_dist_max, "pos distance range invalid");
  require(sense_dist_min > 0 && sense_dist_min <= sense_dist_max, "sense distance range invalid");
  require(velocity_min <= velocity_max, "velocity range invalid");
  require(false_alarm > 0 && false_alarm < 1, "P_FA must be in (0, 1)");
  require(detect_target > 0 && detect_target < 1, "detection target must be in (0, 1)");
  require(rate_target > 0 && crb_target_divisor > 0, "KPI targets must be positive");
  if (false_alarm < std::exp(-2.0))
    std::cerr << "warning: P_FA below e^-2, detection value is not concave in z\n";
}

Scenario generate(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const RbGrid& g = cfg.grid;
  const double latency_target = g.symbols * g.symbol_duration;
  const double noise = dbm_to_watt(cfg.noise_dbm);

  auto draw_kpi = [&](Direction dir, double target) {
    KpiSpec s;
    s.direction = dir;
    s.target = target;
    s.alpha = std::clamp(uniform(rng, 0.0, cfg.alpha_cap), 1e-3, cfg.alpha_cap);
    s.beta = std::clamp(uniform(rng, 0.0, cfg.beta_cap), 1e-3, cfg.beta_cap);
    s.weight = uniform01(rng);
    return s;
  };

  std::vector<UserService> users;
  auto add_block = [&](ServiceType type, int count, double dmin, double dmax) {
    for (int i = 0; i < count; ++i) {
      UserService u;
      u.type = type;
      u.angle = uniform(rng, -cfg.max_angle, cfg.max_angle);
      u.distance = uniform(rng, dmin, dmax);
      u.noise = noise;
      u.rcs = cfg.rcs;
      if (type == ServiceType::Comm) {
        u.kpis = {draw_kpi(Direction::High, cfg.rate_target),
                  draw_kpi(Direction::Low, latency_target)};
      } else if (type == ServiceType::Pos) {
        u.velocity = uniform(rng, cfg.velocity_min, cfg.velocity_max);
        // CRB targets depend on this user's own constants; filled in below
        u.kpis = {draw_kpi(Direction::Low, 1.0), draw_kpi(Direction::Low, 1.0),
                  draw_kpi(Direction::Low, 1.0), draw_kpi(Direction::Low, latency_target)};
      } else {
        u.sense_range = cfg.sense_range;
        u.false_alarm = cfg.false_alarm;
        u.sense_power = dbm_to_watt(cfg.sense_power_dbm);
        u.kpis = {draw_kpi(Direction::High, cfg.detect_target),
                  draw_kpi(Direction::Low, latency_target)};
      }
      users.push_back(u);
    }
  };
  add_block(ServiceType::Comm, cfg.num_comm, cfg.comm_dist_min, cfg.comm_dist_max);
  add_block(ServiceType::Pos, cfg.num_pos, cfg.pos_dist_min, cfg.pos_dist_max);
  add_block(ServiceType::Sense, cfg.num_sense, cfg.sense_dist_min, cfg.sense_dist_max);

  // near comm users first, so SIC decodes far users' signals
  std::stable_sort(users.begin(), users.begin() + cfg.num_comm,
                   [](const auto& a, const auto& b) { return a.distance < b.distance; });
  for (size_t k = 0; k < users.size(); ++k) users[k].id = static_cast<int>(k) + 1;

  SystemParams params;
  params.num_tx = cfg.num_tx;
  params.p_max = dbm_to_watt(cfg.p_max_dbm);
  params.a_max = cfg.a_max;
  params.bs_noise = noise;
  params.rician_k = cfg.rician_k;
  params.speed_of_light = cfg.speed_of_light;
  params.pos_snr_halved = cfg.pos_snr_halved;

  const int k_count = static_cast<int>(users.size());
  const bool los_only = std::isinf(cfg.rician_k);
  const double los = los_only ? 1.0 : std::sqrt(cfg.rician_k / (1.0 + cfg.rician_k));
  const double nlos = los_only ? 0.0 : std::sqrt(1.0 / (1.0 + cfg.rician_k));
  std::vector<std::vector<CVec>> channels(g.num_rbs()), beams(g.num_rbs());
  for (int r = 0; r < g.num_rbs(); ++r) {
    for (int k = 0; k < k_count; ++k) {
      const auto& u = users[k];
      const CVec v = steering_vector(u.angle, cfg.num_tx);
      CVec e(cfg.num_tx);
      for (int l = 0; l < cfg.num_tx; ++l) {
        const double re = standard_normal(rng), im = standard_normal(rng);
        e(l) = std::complex<double>(re, im) * std::sqrt(0.5);
      }
      CVec h = std::sqrt(path_loss_linear(u.distance)) * (los * v + nlos * e);
      if (u.type == ServiceType::Comm) beams[r].push_back(h / h.norm());
      else if (u.type == ServiceType::Pos) beams[r].push_back(v / v.norm());
      else beams[r].push_back(CVec());
      channels[r].push_back(std::move(h));
    }
  }

  Scenario draft(users, g, params, channels, beams, seed);
  for (int k = 0; k < k_count; ++k) {
    if (users[k].type != ServiceType::Pos) continue;
    const CrbConstants& c = draft.crb(k, 0);
    users[k].kpis[0].target = c.angle / cfg.crb_target_divisor;
    users[k].kpis[1].target = c.distance / cfg.crb_target_divisor;
    users[k].kpis[2].target = c.velocity / cfg.crb_target_divisor;
  }
  return draft.with_users(std::move(users));
}

// ---- serialization ----

namespace {

nlohmann::json real_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }
double real_or_inf(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

nlohmann::json cvec_json(const CVec& v) {
  auto arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

CVec cvec_from(const nlohmann::json& j) {
  CVec v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(i) = {j[i][0].get<double>(), j[i][1].get<double>()};
  return v;
}

nlohmann::json grid_json(const RbGrid& g) {
  return {{"num_bands", g.num_bands},
          {"num_frames", g.num_frames},
          {"subcarriers", g.subcarriers},
          {"symbols", g.symbols},
          {"subcarrier_spacing", g.subcarrier_spacing},
          {"symbol_duration", g.symbol_duration},
          {"carrier_frequency", g.carrier_frequency}};
}

RbGrid grid_from(const nlohmann::json& j, RbGrid g = {}) {
  g.num_bands = j.value("num_bands", g.num_bands);
  g.num_frames = j.value("num_frames", g.num_frames);
  g.subcarriers = j.value("subcarriers", g.subcarriers);
  g.symbols = j.value("symbols", g.symbols);
  g.subcarrier_spacing = j.value("subcarrier_spacing", g.subcarrier_spacing);
  g.symbol_duration = j.value("symbol_duration", g.symbol_duration);
  g.carrier_frequency = j.value("carrier_frequency", g.carrier_frequency);
  return g;
}

}  // namespace

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j;
  j["format"] = "mdma-scenario";
  j["version"] = 1;
  j["seed"] = s.seed();
  j["grid"] = grid_json(s.grid());
  const auto& p = s.params();
  j["params"] = {{"num_tx", p.num_tx},
                 {"p_max", p.p_max},
                 {"a_max", p.a_max},
                 {"bs_noise", p.bs_noise},
                 {"rician_k", real_or_null(p.rician_k)},
                 {"speed_of_light", p.speed_of_light},
                 {"pos_snr_halved", p.pos_snr_halved}};
  auto users = nlohmann::json::array();
  for (const auto& u : s.users()) {
    auto kpis = nlohmann::json::array();
    for (const auto& k : u.kpis)
      kpis.push_back({{"direction", k.direction == Direction::High ? "high" : "low"},
                      {"target", k.target},
                      {"alpha", k.alpha},
                      {"beta", k.beta},
                      {"weight", k.weight}});
    users.push_back({{"id", u.id},
                     {"type", to_string(u.type)},
                     {"angle", u.angle},
                     {"distance", u.distance},
                     {"velocity", u.velocity},
                     {"sense_range", u.sense_range},
                     {"rcs", u.rcs},
                     {"noise", u.noise},
                     {"false_alarm", u.false_alarm},
                     {"sense_power", u.sense_power},
                     {"kpis", kpis}});
  }
  j["users"] = users;
  auto ch = nlohmann::json::array(), bf = nlohmann::json::array();
  const auto& c = s.coefficients();
  for (int r = 0; r < s.grid().num_rbs(); ++r) {
    auto cr = nlohmann::json::array(), br = nlohmann::json::array();
    for (int k = 0; k < s.num_users(); ++k) {
      cr.push_back(cvec_json(c.channel[r][k]));
      br.push_back(cvec_json(c.beamformer[r][k]));
    }
    ch.push_back(cr);
    bf.push_back(br);
  }
  j["channels"] = ch;
  j["beamformers"] = bf;
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "mdma-scenario")
    throw std::invalid_argument("not a scenario file");
  RbGrid g = grid_from(j.at("grid"));
  const auto& jp = j.at("params");
  SystemParams p;
  p.num_tx = jp.at("num_tx").get<int>();
  p.p_max = jp.at("p_max").get<double>();
  p.a_max = jp.at("a_max").get<int>();
  p.bs_noise = jp.at("bs_noise").get<double>();
  p.rician_k = real_or_inf(jp.at("rician_k"));
  p.speed_of_light = jp.at("speed_of_light").get<double>();
  p.pos_snr_halved = jp.at("pos_snr_halved").get<bool>();
  std::vector<UserService> users;
  for (const auto& ju : j.at("users")) {
    UserService u;
    u.id = ju.at("id").get<int>();
    u.type = service_type_from_string(ju.at("type").get<std::string>());
    u.angle = ju.at("angle").get<double>();
    u.distance = ju.at("distance").get<double>();
    u.velocity = ju.at("velocity").get<double>();
    u.sense_range = ju.at("sense_range").get<double>();
    u.rcs = ju.at("rcs").get<double>();
    u.noise = ju.at("noise").get<double>();
    u.false_alarm = ju.at("false_alarm").get<double>();
    u.sense_power = ju.at("sense_power").get<double>();
    for (const auto& jk : ju.at("kpis")) {
      KpiSpec k;
      const auto dir = jk.at("direction").get<std::string>();
      if (dir != "high" && dir != "low") throw std::invalid_argument("bad KPI direction " + dir);
      k.direction = dir == "high" ? Direction::High : Direction::Low;
      k.target = jk.at("target").get<double>();
      k.alpha = jk.at("alpha").get<double>();
      k.beta = jk.at("beta").get<double>();
      k.weight = jk.at("weight").get<double>();
      u.kpis.push_back(k);
    }
    users.push_back(u);
  }
  std::vector<std::vector<CVec>> ch, bf;
  for (const auto& r : j.at("channels")) {
    ch.emplace_back();
    for (const auto& v : r) ch.back().push_back(cvec_from(v));
  }
  for (const auto& r : j.at("beamformers")) {
    bf.emplace_back();
    for (const auto& v : r) bf.back().push_back(cvec_from(v));
  }
  return Scenario(std::move(users), g, p, std::move(ch), std::move(bf),
                  j.at("seed").get<std::uint64_t>());
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return {{"num_comm", c.num_comm},
          {"num_pos", c.num_pos},
          {"num_sense", c.num_sense},
          {"grid", grid_json(c.grid)},
          {"num_tx", c.num_tx},
          {"p_max_dbm", c.p_max_dbm},
          {"a_max", c.a_max},
          {"noise_dbm", c.noise_dbm},
          {"sense_power_dbm", c.sense_power_dbm},
          {"rician_k", real_or_null(c.rician_k)},
          {"speed_of_light", c.speed_of_light},
          {"alpha_cap", c.alpha_cap},
          {"beta_cap", c.beta_cap},
          {"max_angle", c.max_angle},
          {"comm_distance", {c.comm_dist_min, c.comm_dist_max}},
          {"sense_distance", {c.sense_dist_min, c.sense_dist_max}},
          {"pos_distance", {c.pos_dist_min, c.pos_dist_max}},
          {"velocity", {c.velocity_min, c.velocity_max}},
          {"rcs", c.rcs},
          {"sense_range", c.sense_range},
          {"false_alarm", c.false_alarm},
          {"rate_target", c.rate_target},
          {"detect_target", c.detect_target},
          {"crb_target_divisor", c.crb_target_divisor},
          {"pos_snr_halved", c.pos_snr_halved}};
}

ScenarioConfig scenario_config_from_json(const nlohmann::json& j) {
  static const char* known[] = {
      "num_comm", "num_pos", "num_sense", "grid", "num_tx", "p_max_dbm", "a_max", "noise_dbm",
      "sense_power_dbm", "rician_k", "speed_of_light", "alpha_cap", "beta_cap", "max_angle",
      "comm_distance", "sense_distance", "pos_distance", "velocity", "rcs", "sense_range",
      "false_alarm", "rate_target", "detect_target", "crb_target_divisor", "pos_snr_halved"};
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("unknown scenario key: " + key);
  ScenarioConfig c;
  c.num_comm = j.value("num_comm", c.num_comm);
  c.num_pos = j.value("num_pos", c.num_pos);
  c.num_sense = j.value("num_sense", c.num_sense);
  if (j.contains("grid")) c.grid = grid_from(j["grid"], c.grid);
  c.num_tx = j.value("num_tx", c.num_tx);
  c.p_max_dbm = j.value("p_max_dbm", c.p_max_dbm);
  c.a_max = j.value("a_max", c.a_max);
  c.noise_dbm = j.value("noise_dbm", c.noise_dbm);
  c.sense_power_dbm = j.value("sense_power_dbm", c.sense_power_dbm);
  if (j.contains("rician_k")) c.rician_k = real_or_inf(j["rician_k"]);
  c.speed_of_light = j.value("speed_of_light", c.speed_of_light);
  c.alpha_cap = j.value("alpha_cap", c.alpha_cap);
  c.beta_cap = j.value("beta_cap", c.beta_cap);
  c.max_angle = j.value("max_angle", c.max_angle);
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    lo = j[key].at(0).get<double>();
    hi = j[key].at(1).get<double>();
  };
  range("comm_distance", c.comm_dist_min, c.comm_dist_max);
  range("sense_distance", c.sense_dist_min, c.sense_dist_max);
  range("pos_distance", c.pos_dist_min, c.pos_dist_max);
  range("velocity", c.velocity_min, c.velocity_max);
  c.rcs = j.value("rcs", c.rcs);
  c.sense_range = j.value("sense_range", c.sense_range);
  c.false_alarm = j.value("false_alarm", c.false_alarm);
  c.rate_target = j.value("rate_target", c.rate_target);
  c.detect_target = j.value("detect_target", c.detect_target);
  c.crb_target_divisor = j.value("crb_target_divisor", c.crb_target_divisor);
  c.pos_snr_halved = j.value("pos_snr_halved", c.pos_snr_halved);
  return c;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(s).dump(1) << "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return scenario_from_json(nlohmann::json::parse(in));
}

}  // namespace mdma
