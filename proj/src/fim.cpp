#include "mdma/fim.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mdma {

namespace {

// sum_{i<n} i and sum_{i<n} i^2
double s1(int n) { return 0.5 * n * (n - 1.0); }
double s2(int n) { return (n - 1.0) * n * (2.0 * n - 1.0) / 6.0; }

const char* kParamNames[5] = {"angle", "distance", "velocity", "amplitude", "phase"};

}  // namespace

Fim fim_matrix(int num_tx, int subcarriers, int symbols, double angle, double round_trip) {
  const double c = std::cos(angle);
  const double nt = num_tx, nb = subcarriers, nl = symbols;
  const double r2 = round_trip * round_trip;
  const double sl = s1(num_tx), sll = s2(num_tx);
  const double sb = s1(subcarriers), sbb = s2(subcarriers);
  const double sy = s1(symbols), syy = s2(symbols);

  Fim j = Fim::Zero();
  j(0, 0) = c * c * sll * nb * nl;
  j(0, 1) = c * sl * sb * nl;
  j(0, 2) = c * sl * sy * nb;
  j(0, 4) = c * sl * nb * nl;
  j(1, 1) = sbb * nt * nl;
  j(1, 2) = sb * sy * nt;
  j(1, 4) = sb * nt * nl;
  j(2, 2) = syy * nt * nb;
  j(2, 4) = sy * nt * nb;
  j(4, 4) = nt * nb * nl;
  j *= r2;
  // amplitude row: rho^2 * (1/rho^2) per term
  j(3, 3) = nt * nb * nl;
  return j.selfadjointView<Eigen::Upper>();
}

CrbConstants crb_from_fim(const Fim& j, double subcarrier_spacing, double symbol_duration,
                          double band_frequency, double speed_of_light) {
  const Eigen::Matrix<double, 5, 1> diag = j.diagonal();
  for (int i = 0; i < 5; ++i) {
    if (!(diag(i) > 0.0)) throw SingularFim(kParamNames[i], std::numeric_limits<double>::infinity());
  }
  const Eigen::Matrix<double, 5, 1> s = diag.cwiseSqrt().cwiseInverse();
  const Fim scaled = s.asDiagonal() * j * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Fim> eig(scaled);
  const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(4);
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (cond > kFimConditionLimit) {
    Eigen::Matrix<double, 5, 1> v = eig.eigenvectors().col(0).cwiseAbs();
    int worst = 0;
    v.head<3>().maxCoeff(&worst);
    throw SingularFim(kParamNames[worst], cond);
  }
  // invert the well-scaled matrix, then undo the scaling
  const Fim inv = s.asDiagonal() * scaled.ldlt().solve(Fim::Identity()) * s.asDiagonal();

  constexpr double pi = std::numbers::pi;
  const double c2 = speed_of_light * speed_of_light;
  CrbConstants out;
  out.angle = 0.5 * inv(0, 0);
  out.distance = c2 / (32.0 * std::pow(pi * subcarrier_spacing, 2)) * inv(1, 1);
  out.velocity = c2 / (32.0 * std::pow(pi * symbol_duration * band_frequency, 2)) * inv(2, 2);
  return out;
}

}  // namespace mdma
