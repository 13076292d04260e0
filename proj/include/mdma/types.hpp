#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdma {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

/// Per-term floor applied to below-range log values inside the solvers.
inline constexpr double kLogFloor = -1e6;

enum class ServiceType { Comm, Pos, Sense };

const char* to_string(ServiceType t);
ServiceType service_type_from_string(const std::string& s);

/// HKPI: larger is better. LKPI: smaller is better.
enum class Direction { High, Low };

struct KpiSpec {
  Direction direction = Direction::High;
  double target = 1.0;  ///< Q-tilde
  double alpha = 1.0;   ///< slope elasticity
  double beta = 0.5;    ///< range elasticity
  double weight = 1.0;  ///< fairness weight

  /// Throws std::invalid_argument when the elasticity preconditions fail.
  void validate() const;
};

/// Log of a value in [0, 1]; the empty state is the exact "value is zero" sentinel.
class LogValue {
 public:
  LogValue() = default;
  explicit LogValue(double v) : value_(v) {}
  static LogValue below_range() {
    LogValue out;
    out.value_.reset();
    return out;
  }

  bool is_below_range() const { return !value_.has_value(); }
  double value() const { return *value_; }
  /// -inf for the sentinel.
  double extended() const {
    return value_ ? *value_ : -std::numeric_limits<double>::infinity();
  }
  double floored() const { return value_ ? std::max(*value_, kLogFloor) : kLogFloor; }

  LogValue operator+(const LogValue& o) const {
    if (is_below_range() || o.is_below_range()) return below_range();
    return LogValue(*value_ + *o.value_);
  }

 private:
  std::optional<double> value_ = 0.0;
};

/// Resource block coordinate: 0-based sub-band and sub-frame.
struct Rb {
  int m = 0;
  int n = 0;
  bool operator==(const Rb&) const = default;
  auto operator<=>(const Rb&) const = default;
};

/// a_{kmn}: each service sits in at most one RB.
class Assignment {
 public:
  Assignment() = default;
  Assignment(int num_users, int num_bands, int num_frames)
      : bands_(num_bands), frames_(num_frames), rb_(num_users) {}

  int num_users() const { return static_cast<int>(rb_.size()); }
  int num_bands() const { return bands_; }
  int num_frames() const { return frames_; }

  void assign(int k, Rb rb) { rb_.at(k) = rb; }
  void unassign(int k) { rb_.at(k).reset(); }
  const std::optional<Rb>& rb(int k) const { return rb_.at(k); }
  bool is_assigned(int k) const { return rb_.at(k).has_value(); }
  bool a(int k, int m, int n) const {
    return rb_.at(k) && rb_[k]->m == m && rb_[k]->n == n;
  }

  /// Users in RB (m, n), ascending.
  std::vector<int> users_in(int m, int n) const;
  /// Users in sub-frame n, ascending.
  std::vector<int> users_in_frame(int n) const;
  int count_in(int m, int n) const;
  std::vector<int> unassigned() const;

  /// (P1-b) per-RB cap and (P1-c) single placement for the assigned users.
  bool respects_cap(int a_max) const;

  bool operator==(const Assignment&) const = default;

 private:
  int bands_ = 0;
  int frames_ = 0;
  std::vector<std::optional<Rb>> rb_;
};

/// The services placed on one sub-frame, with their sub-band (the a_n slice).
struct SubframeAssignment {
  int n = 0;
  std::vector<int> users;  ///< ascending global indices
  std::vector<int> bands;  ///< sub-band per entry of users

  bool empty() const { return users.empty(); }
  int band_of(int k) const;
  bool operator==(const SubframeAssignment&) const = default;
};

SubframeAssignment slice(const Assignment& a, int n);

/// Per-user BS transmit power; a user occupies a single RB so p_{kmn} = a_{kmn} p_k.
/// Sensing entries are ignored (they transmit their own fixed power).
using PowerAlloc = Vec;
/// Auxiliary SNR/SINR per user at its assigned RB, zero when unassigned.
using SinrVector = Vec;

class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdma
