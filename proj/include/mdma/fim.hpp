#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mdma {

/// Fisher information template summed over antennas, subcarriers and symbols.
/// Parameter order: (angle, scaled delay, scaled Doppler, amplitude, phase).
using Fim = Eigen::Matrix<double, 5, 5>;

/// z-independent numerators of the angle/distance/velocity CRBs.
struct CrbConstants {
  double angle = 0.0;
  double distance = 0.0;
  double velocity = 0.0;
};

class SingularFim : public std::runtime_error {
 public:
  SingularFim(const std::string& parameter, double condition)
      : std::runtime_error("singular FIM: " + parameter + " is unobservable (condition " +
                           std::to_string(condition) + ")"),
        parameter_(parameter) {}
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

inline constexpr double kFimConditionLimit = 1e12;

/// Closed-form accumulation of the 5x5 template using the analytic index sums.
Fim fim_matrix(int num_tx, int subcarriers, int symbols, double angle, double round_trip);

/// Invert J and apply the unit conversions:
///   I_angle = 1/2 [J^-1]_11,
///   I_dist  = c^2 / (32 (pi df)^2) [J^-1]_22,
///   I_vel   = c^2 / (32 (pi T f_m)^2) [J^-1]_33.
/// Throws SingularFim when the Jacobi-scaled condition number exceeds kFimConditionLimit.
CrbConstants crb_from_fim(const Fim& j, double subcarrier_spacing, double symbol_duration,
                          double band_frequency, double speed_of_light);

}  // namespace mdma
