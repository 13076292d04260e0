#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdma/fim.hpp"
#include "mdma/types.hpp"

namespace mdma {

/// Time-frequency resource grid. Sub-band and sub-frame indices are 0-based in code.
struct RbGrid {
  int num_bands = 1;    ///< M
  int num_frames = 1;   ///< N
  int subcarriers = 8;  ///< B per RB
  int symbols = 8;      ///< L per RB
  double subcarrier_spacing = 156.25e3;
  double symbol_duration = 8e-6;
  double carrier_frequency = 5.9e9;

  int num_rbs() const { return num_bands * num_frames; }
  int rb_index(Rb rb) const { return rb.n * num_bands + rb.m; }
  /// f_m = m B df + f_c with the sub-band counted from 1.
  double band_frequency(int m) const {
    return (m + 1) * subcarriers * subcarrier_spacing + carrier_frequency;
  }
  /// Completion latency n L T of a service carried on sub-frame n (counted from 1).
  double frame_latency(int n) const { return (n + 1) * symbols * symbol_duration; }

  void validate() const;
};

struct SystemParams {
  int num_tx = 4;  ///< L_tx
  double p_max = 1.0;  ///< W
  int a_max = 2;
  double bs_noise = 0.0;  ///< sigma_0, W
  double rician_k = 1.0;
  double speed_of_light = 299792458.0;
  /// Use 2 sigma_0 as the positioning SNR denominator everywhere.
  bool pos_snr_halved = false;

  void validate() const;
};

struct UserService {
  int id = 0;
  ServiceType type = ServiceType::Comm;
  double angle = 0.0;        ///< rad
  double distance = 100.0;   ///< m
  double velocity = 0.0;     ///< m/s, positioning only, enters no KPI
  double sense_range = 0.0;  ///< m, sensing only
  double rcs = 1.0;          ///< m^2
  double noise = 0.0;        ///< W
  double false_alarm = 0.3;  ///< sensing only
  double sense_power = 0.0;  ///< W, sensing only
  /// Comm: rate, latency. Pos: angle/distance/velocity CRB, latency. Sense: detection, latency.
  std::vector<KpiSpec> kpis;

  bool bs_powered() const { return type != ServiceType::Sense; }
};

/// Precomputed channel-gain coefficients, indexed per RB (r = n M + m).
struct CoefficientSet {
  std::vector<std::vector<CVec>> channel;     ///< h_{kmn}
  std::vector<std::vector<CVec>> beamformer;  ///< w^tx_{kmn}; empty for sensing users
  std::vector<Mat> link_gain;  ///< (k, k') -> |h_k^H w_k'|^2, zero column for sensing k'
  std::vector<Mat> pos_gain;   ///< (k, k') -> |v(theta_k)^H w_k'|^2, positioning rows only
  Mat echo_covariance;  ///< (k, m) -> lambda_{km}, sensing users
  Mat round_trip;       ///< (k, m) -> rho_{km}, positioning users
  std::vector<std::vector<CrbConstants>> crb;  ///< [k][m], positioning users
};

/// Frozen problem instance.
class Scenario {
 public:
  Scenario(std::vector<UserService> users, RbGrid grid, SystemParams params,
           std::vector<std::vector<CVec>> channels, std::vector<std::vector<CVec>> beamformers,
           std::uint64_t seed);

  int num_users() const { return static_cast<int>(users_.size()); }
  const std::vector<UserService>& users() const { return users_; }
  const UserService& user(int k) const { return users_.at(k); }
  const RbGrid& grid() const { return grid_; }
  const SystemParams& params() const { return params_; }
  const CoefficientSet& coefficients() const { return coeffs_; }
  std::uint64_t seed() const { return seed_; }

  int num_of(ServiceType t) const;

  /// chi^C_{qkmn} and chi^S_{kk'mn}: |h_q^H w_k|^2.
  double link_gain(int q, int k, Rb rb) const {
    return coeffs_.link_gain[grid_.rb_index(rb)](q, k);
  }
  /// chi^P_{kk'mn}: |v(theta_k)^H w_k'|^2.
  double pos_gain(int k, int kp, Rb rb) const {
    return coeffs_.pos_gain[grid_.rb_index(rb)](k, kp);
  }
  double echo_covariance(int k, int m) const { return coeffs_.echo_covariance(k, m); }
  double round_trip(int k, int m) const { return coeffs_.round_trip(k, m); }
  const CrbConstants& crb(int k, int m) const { return coeffs_.crb.at(k).at(m); }
  /// Denominator of the positioning SNR (sigma_0, or 2 sigma_0 when halved).
  double pos_noise() const { return params_.pos_snr_halved ? 2.0 * params_.bs_noise : params_.bs_noise; }

  /// Same instance with new KPI specs (used by experiment templates); coefficients are kept.
  Scenario with_users(std::vector<UserService> users) const;

 private:
  void finalize();

  std::vector<UserService> users_;
  RbGrid grid_;
  SystemParams params_;
  CoefficientSet coeffs_;
  std::uint64_t seed_ = 0;
};

/// Generation template; defaults are the reference system parameters.
struct ScenarioConfig {
  int num_comm = 3;
  int num_pos = 2;
  int num_sense = 1;
  RbGrid grid{.num_bands = 1, .num_frames = 3};
  int num_tx = 4;
  double p_max_dbm = 30.0;
  int a_max = 2;
  double noise_dbm = -114.0;
  double sense_power_dbm = -5.0;
  double rician_k = 1.0;
  double speed_of_light = 299792458.0;
  double alpha_cap = 0.3;
  double beta_cap = 0.3;
  double max_angle = 1.0471975511965976;  ///< pi/3
  double comm_dist_min = 30.0, comm_dist_max = 1000.0;
  double sense_dist_min = 30.0, sense_dist_max = 1000.0;
  double pos_dist_min = 30.0, pos_dist_max = 200.0;
  double velocity_min = -30.0, velocity_max = 30.0;
  double rcs = 1.0;
  double sense_range = 30.0;
  double false_alarm = 0.3;
  double rate_target = 4.0;         ///< bits/s/Hz
  double detect_target = 0.8;
  double crb_target_divisor = 20.0; ///< positioning targets are I / divisor
  bool pos_snr_halved = false;

  int num_users() const { return num_comm + num_pos + num_sense; }
  void validate() const;
};

CVec steering_vector(double angle, int num_tx);
/// 10^(-(74.2 + 16.8 log10 d) / 10); throws std::invalid_argument for d <= 0.
double path_loss_linear(double distance);
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

Scenario generate(const ScenarioConfig& config, std::uint64_t seed);

/// Portable uniform [0,1) from a 64-bit engine (independent of the standard library's distributions).
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
double standard_normal(std::mt19937_64& rng);

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);

void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace mdma
