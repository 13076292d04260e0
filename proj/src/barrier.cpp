#include "mdma/barrier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdma {

double ConcaveRow::value(const Vec& y) const {
  double g = c + l.dot(y);
  if (q != 0.0) {
    const double u = v.dot(y) + s;
    g -= q * u * u;
  }
  return g;
}

Vec ConcaveRow::gradient(const Vec& y) const {
  if (q == 0.0) return l;
  return l - 2.0 * q * (v.dot(y) + s) * v;
}

namespace {

using StopRule = std::function<bool(const Vec&)>;

// barrier value t f + sum log g, or nullopt outside the domain
std::optional<double> barrier_value(const ConcaveObjective& f, const std::vector<ConcaveRow>& rows,
                                    const Vec& y, double t, double* fval) {
  double acc = 0.0;
  for (const auto& r : rows) {
    const double g = r.value(y);
    if (!(g > 0.0)) return std::nullopt;
    acc += std::log(g);
  }
  double fv = 0.0;
  if (!f(y, fv, nullptr, nullptr) || !std::isfinite(fv)) return std::nullopt;
  if (fval) *fval = fv;
  return t * fv + acc;
}

BarrierResult run(const ConcaveObjective& f, const std::vector<ConcaveRow>& rows, const Vec& y0,
                  const BarrierOptions& opt, const StopRule& stop) {
  const int d = static_cast<int>(y0.size());
  const double m = std::max<double>(1.0, rows.size());
  BarrierResult out;
  out.y = y0;
  double fval = 0.0;
  if (!barrier_value(f, rows, y0, 1.0, &fval))
    throw std::invalid_argument("barrier: start point is not strictly feasible");
  out.objective = fval;

  double t = opt.t0;
  Vec y = y0;
  for (;;) {
    // centering
    for (;;) {
      if (stop && stop(y)) {
        out.y = y;
        barrier_value(f, rows, y, t, &out.objective);
        out.gap = m / t;
        out.converged = true;
        return out;
      }
      double fv;
      Vec g;
      Mat h;
      f(y, fv, &g, &h);
      Vec grad = t * g;
      Mat hess = t * h;
      for (const auto& r : rows) {
        const double gi = r.value(y);
        const Vec dg = r.gradient(y);
        grad += dg / gi;
        hess -= dg * dg.transpose() / (gi * gi);
        if (r.q != 0.0) hess -= (2.0 * r.q / gi) * r.v * r.v.transpose();
      }
      // Newton on the concave barrier: solve (-H) dx = grad
      Mat neg = -hess;
      Eigen::LDLT<Mat> ldlt(neg);
      Vec dx;
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) dx = ldlt.solve(grad);
      if (dx.size() != d || !dx.allFinite()) {
        const double reg = 1e-12 * std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff());
        dx = (neg + reg * Mat::Identity(d, d)).ldlt().solve(grad);
      }
      const double decrement = grad.dot(dx);
      if (!(decrement > 2.0 * opt.newton_tol) || !dx.allFinite()) break;
      if (++out.newton_steps > opt.max_newton) {
        out.y = y;
        barrier_value(f, rows, y, t, &out.objective);
        out.gap = m / t;
        return out;
      }
      const double phi0 = *barrier_value(f, rows, y, t, nullptr);
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        const Vec cand = y + step * dx;
        const auto phi = barrier_value(f, rows, cand, t, nullptr);
        // strict gain: a step that rounding alone accepts is no progress
        if (phi && *phi >= phi0 + 0.25 * step * decrement && *phi > phi0) {
          y = cand;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (m / t <= opt.gap_tol) {
      out.converged = true;
      break;
    }
    t *= opt.mu;
  }
  out.y = y;
  barrier_value(f, rows, y, t, &out.objective);
  out.gap = m / t;
  return out;
}

}  // namespace

BarrierResult barrier_maximize(const ConcaveObjective& f, const std::vector<ConcaveRow>& rows,
                               const Vec& y0, const BarrierOptions& opt) {
  return run(f, rows, y0, opt, nullptr);
}

std::optional<Vec> barrier_phase1(const std::vector<ConcaveRow>& rows, const Vec& y0, double margin,
                                  const BarrierOptions& opt) {
  const int d = static_cast<int>(y0.size());
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) worst = std::min(worst, r.value(y0));
  if (worst >= margin) return y0;

  // rows g(y) - s >= 0 plus s <= margin + 1, maximize s
  std::vector<ConcaveRow> aug;
  for (const auto& r : rows) {
    ConcaveRow a;
    a.c = r.c;
    a.l = Vec::Zero(d + 1);
    a.l.head(d) = r.l;
    a.l(d) = -1.0;
    a.q = r.q;
    a.v = Vec::Zero(d + 1);
    if (r.q != 0.0) a.v.head(d) = r.v;
    a.s = r.s;
    aug.push_back(std::move(a));
  }
  ConcaveRow cap;
  cap.c = margin + 1.0;
  cap.l = Vec::Zero(d + 1);
  cap.l(d) = -1.0;
  aug.push_back(cap);

  Vec w0(d + 1);
  w0.head(d) = y0;
  w0(d) = worst - 1.0;
  ConcaveObjective slack = [d](const Vec& w, double& f, Vec* g, Mat* h) {
    f = w(d);
    if (g) {
      *g = Vec::Zero(d + 1);
      (*g)(d) = 1.0;
    }
    if (h) *h = Mat::Zero(d + 1, d + 1);
    return true;
  };
  BarrierOptions o = opt;
  o.gap_tol = 1e-12;
  const auto res = run(slack, aug, w0, o, [&](const Vec& w) {
    const Vec y = w.head(d);
    for (const auto& r : rows)
      if (!(r.value(y) >= margin)) return false;
    return true;
  });
  const Vec y = res.y.head(d);
  for (const auto& r : rows)
    if (!(r.value(y) >= margin)) return std::nullopt;
  return y;
}

}  // namespace mdma
