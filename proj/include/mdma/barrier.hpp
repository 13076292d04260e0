#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mdma/types.hpp"

namespace mdma {

/// Concave constraint  g(y) = c + l'y - q (v'y + s)^2 >= 0  with q >= 0.
/// q = 0 gives an affine row.
struct ConcaveRow {
  double c = 0.0;
  Vec l;
  double q = 0.0;
  Vec v;
  double s = 0.0;

  double value(const Vec& y) const;
  Vec gradient(const Vec& y) const;
};

/// Concave objective: writes f and, when asked, the gradient and Hessian at y.
/// Returns false outside its domain.
using ConcaveObjective = std::function<bool(const Vec& y, double& f, Vec* g, Mat* h)>;

struct BarrierOptions {
  double gap_tol = 1e-9;  ///< stop when (rows / t) falls below this
  double t0 = 1.0;
  double mu = 20.0;
  int max_newton = 400;  ///< total Newton steps
  double newton_tol = 1e-12;
};

struct BarrierResult {
  Vec y;
  double objective = 0.0;
  double gap = 0.0;  ///< final duality-gap bound rows / t
  int newton_steps = 0;
  bool converged = false;
};

/// Log-barrier Newton maximization from a strictly feasible start.
/// Throws std::invalid_argument when y0 is not strictly feasible.
BarrierResult barrier_maximize(const ConcaveObjective& f, const std::vector<ConcaveRow>& rows,
                               const Vec& y0, const BarrierOptions& opt = {});

/// Find y with every g(y) >= margin by maximizing the common slack from y0.
std::optional<Vec> barrier_phase1(const std::vector<ConcaveRow>& rows, const Vec& y0,
                                  double margin, const BarrierOptions& opt = {});

}  // namespace mdma
