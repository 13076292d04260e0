#include "mdma/cvxcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mdma/dual.hpp"
#include "mdma/lp.hpp"
#include "mdma/vosmetric.hpp"

namespace mdma {

namespace {

struct SlackRow {
  Vec a;
  double b = 0.0;
};

void add_normalized(std::vector<SlackRow>& out, Vec a, double b) {
  const double scale = std::max(a.size() ? a.cwiseAbs().maxCoeff() : 0.0, std::abs(b));
  if (!(scale > 0.0)) return;
  out.push_back({a / scale, b / scale});
}

std::map<int, int> index_of(const std::vector<int>& users) {
  std::map<int, int> idx;
  for (size_t i = 0; i < users.size(); ++i) idx[users[i]] = static_cast<int>(i);
  return idx;
}

}  // namespace

FeasibilityResult feasible_power(const SubframeModel& model, const SinrVector& z, bool exact_slack) {
  const int nx = static_cast<int>(model.powered.size());
  const auto idx = index_of(model.powered);
  const double pm = model.p_max;

  std::vector<SlackRow> rows;
  for (const auto& r : model.rows) {
    const double zt = z(r.target);
    Vec a = Vec::Zero(nx);
    for (const auto& [j, g] : r.signal) a(idx.at(j)) += g * pm;
    for (const auto& [j, g] : r.interference) a(idx.at(j)) -= zt * g * pm;
    add_normalized(rows, std::move(a), r.signal_const - zt * r.noise);
  }
  for (const auto& f : model.fairness) {
    Vec a = Vec::Zero(nx);
    a(idx.at(f.hi)) += f.g_hi;
    a(idx.at(f.lo)) -= f.g_lo;
    add_normalized(rows, std::move(a), 0.0);
  }
  if (nx > 0) add_normalized(rows, -Vec::Ones(nx), 1.0);

  // a x + b >= t  ->  -a x + t' <= b + 1 with t' = t + 1 in [0, 2]
  const int m = static_cast<int>(rows.size()) + nx + 1;
  Mat lp = Mat::Zero(m, nx + 1);
  Vec rhs(m);
  int i = 0;
  for (const auto& r : rows) {
    lp.row(i).head(nx) = -r.a.transpose();
    lp(i, nx) = 1.0;
    rhs(i++) = std::max(0.0, r.b + 1.0);
  }
  for (int j = 0; j < nx; ++j) {
    lp(i, j) = 1.0;
    rhs(i++) = 1.0;
  }
  lp(i, nx) = 1.0;
  rhs(i) = 2.0;
  Vec c = Vec::Zero(nx + 1);
  c(nx) = 1.0;
  const LpResult sol = simplex_maximize(c, lp, rhs, exact_slack ? 3.0 : 1.0);

  FeasibilityResult out;
  out.slack = sol.x(nx) - 1.0;
  out.feasible = out.slack >= -kFeasibilityTol;
  if (out.feasible) {
    PowerAlloc p = PowerAlloc::Zero(model.num_users);
    for (int j = 0; j < nx; ++j) p(model.powered[j]) = std::clamp(sol.x(j), 0.0, 1.0) * pm;
    out.p = p;
  }
  return out;
}

FeasibilityResult feasible_power(const FeasibilityProblem& problem) {
  if (!problem.scenario) throw std::invalid_argument("feasible_power: missing scenario");
  return feasible_power(build_subframe_model(*problem.scenario, problem.a_n), problem.z);
}

Vec stack_zp(const SinrVector& z, const PowerAlloc& p) {
  Vec out(z.size() + p.size());
  out << z, p;
  return out;
}

DcTerms dc_eval(const SinrVector& z, const PowerAlloc& p, const Assignment& a, const Scenario& s) {
  const int k_count = s.num_users();
  DcTerms out;
  for (int n = 0; n < s.grid().num_frames; ++n) {
    const SubframeModel model = build_subframe_model(s, slice(a, n));
    for (const auto& r : model.rows) {
      if (s.user(r.target).type == ServiceType::Pos) continue;
      DcTerm t;
      t.target = r.target;
      t.observer = r.observer;
      t.sensing = s.user(r.target).type == ServiceType::Sense;
      t.interference = r.interference_at(p);
      t.noise = r.noise;
      // per unit of row noise: J = (I + sigma) / sigma keeps A - B free of cancellation
      const double zt = z(r.target);
      const double j_n = (t.interference + r.noise) / r.noise;
      const double up = zt + j_n;
      const double dn = zt - j_n;
      t.qa = up * up;
      t.qb = dn * dn;
      t.grad_a = Vec::Zero(2 * k_count);
      t.grad_b = Vec::Zero(2 * k_count);
      t.grad_a(r.target) = 2.0 * up;
      t.grad_b(r.target) = 2.0 * dn;
      for (const auto& [j, g] : r.interference) {
        t.grad_a(k_count + j) += 2.0 * up * g / r.noise;
        t.grad_b(k_count + j) -= 2.0 * dn * g / r.noise;
      }
      out.terms.push_back(std::move(t));
    }
  }
  return out;
}

double taylor_lower_bound(const DcTerm& at_anchor, const Vec& anchor, const Vec& query) {
  return at_anchor.qb + at_anchor.grad_b.dot(query - anchor);
}

double subframe_objective(const Scenario& s, const SubframeAssignment& a_n, const SinrVector& z) {
  double total = 0.0;
  for (size_t i = 0; i < a_n.users.size(); ++i) {
    const int k = a_n.users[i];
    total += log_value_z(s, k, a_n.bands[i], z(k)) + log_value_latency(s, k, a_n.n);
  }
  return total;
}

namespace {

// Scaled P4 for one sub-frame. Variables y = [z_u / sz_u for active u; p_j / P_max].
struct P4Frame {
  const Scenario& s;
  const SubframeModel& model;
  std::vector<int> active;
  Vec zscale;
  Vec zcap;  ///< saturation bound per active user, +inf when none
  std::map<int, int> zi, pi;
  int dim = 0;

  Vec to_y(const SinrVector& z, const PowerAlloc& p) const {
    Vec y(dim);
    for (size_t i = 0; i < active.size(); ++i) y(i) = z(active[i]) / zscale(i);
    for (const auto& [k, j] : pi) y(j) = p(k) / model.p_max;
    return y;
  }

  std::vector<ConcaveRow> rows(const Vec& ya) const {
    std::vector<ConcaveRow> out;
    const double pm = model.p_max;
    auto push = [&](ConcaveRow r, double scale) {
      if (!(scale > 0.0)) return;
      r.c /= scale;
      r.l /= scale;
      r.q /= scale;
      out.push_back(std::move(r));
    };
    auto linear = [&](double c, Vec l) {
      ConcaveRow r;
      const double scale = std::max(std::abs(c), l.cwiseAbs().maxCoeff());
      r.c = c;
      r.l = std::move(l);
      push(std::move(r), scale);
    };

    for (const auto& row : model.rows) {
      auto it = zi.find(row.target);
      if (it == zi.end()) continue;
      const int iz = it->second;
      const double sz = zscale(iz);
      // everything divided by the row noise: z (J) <= S + c with J = 1 + I / noise
      Vec sig = Vec::Zero(dim), inter = Vec::Zero(dim);
      for (const auto& [j, g] : row.signal) sig(pi.at(j)) += g * pm / row.noise;
      for (const auto& [j, g] : row.interference) inter(pi.at(j)) += g * pm / row.noise;
      const double c0 = row.signal_const / row.noise;
      if (row.interference.empty()) {
        Vec l = sig;
        l(iz) -= sz;
        linear(c0, std::move(l));
        continue;
      }
      // z J = ((g z + J/g)^2 - (g z - J/g)^2) / 4, balanced at the anchor
      const double za = sz * ya(iz);
      const double ja = 1.0 + inter.dot(ya);
      const double zref = std::max(za, 1e-3 * sz);
      const double gam = std::sqrt(ja / zref);
      Vec vp = inter / gam, vm = -inter / gam;
      vp(iz) += gam * sz;
      vm(iz) += gam * sz;
      const double um = vm.dot(ya) - 1.0 / gam;
      ConcaveRow r;
      r.c = c0 + 0.25 * um * um - 0.5 * um * vm.dot(ya);
      r.l = sig + 0.5 * um * vm;
      r.q = 0.25;
      r.v = vp;
      r.s = 1.0 / gam;
      push(std::move(r), std::max({zref * ja, c0 + sig.dot(ya), 1e-300}));
    }
    for (size_t i = 0; i < active.size(); ++i) {
      const int k = active[i];
      const double zm = z_min(s, k, Rb{model.a_n.band_of(k), model.n}, true);
      Vec l = Vec::Zero(dim);
      l(i) = 1.0;
      linear(-zm / zscale(i), l);
      // the objective is flat above saturation; bounding z there keeps it smooth
      if (std::isfinite(zcap(i))) linear(zcap(i) / zscale(i), -l);
    }
    Vec budget = Vec::Zero(dim);
    for (const auto& [k, j] : pi) {
      Vec lo = Vec::Zero(dim), hi = Vec::Zero(dim);
      lo(j) = 1.0;
      hi(j) = -1.0;
      linear(0.0, lo);
      linear(1.0, hi);
      budget(j) = -1.0;
    }
    if (!pi.empty()) linear(1.0, budget);
    for (const auto& f : model.fairness) {
      Vec l = Vec::Zero(dim);
      l(pi.at(f.hi)) += f.g_hi;
      l(pi.at(f.lo)) -= f.g_lo;
      if (l.cwiseAbs().maxCoeff() > 0.0) linear(0.0, std::move(l));
    }
    return out;
  }

  bool objective(const Vec& y, double& f, Vec* g, Mat* h) const {
    f = 0.0;
    if (g) *g = Vec::Zero(dim);
    if (h) *h = Mat::Zero(dim, dim);
    for (size_t i = 0; i < active.size(); ++i) {
      const int k = active[i];
      const int m = model.a_n.band_of(k);
      if (!g && !h) {
        f += log_value_z(s, k, m, zscale(i) * y(i));
        continue;
      }
      const Dual2 v = log_value_z(s, k, m, Dual2(zscale(i) * y(i), zscale(i), 0.0));
      f += v.v;
      if (g) (*g)(i) = v.d;
      if (h) (*h)(i, i) = v.dd;
    }
    return std::isfinite(f);
  }
};

void check_anchor(const SubframeModel& model, const SinrVector& z, const PowerAlloc& p) {
  constexpr double tol = 1e-7;
  if (model.power_violation(p) > tol)
    throw ConstraintViolation("solve_p4: anchor breaks a power constraint");
  for (const auto& r : model.rows) {
    const double zt = z(r.target);
    if (zt < 0.0) throw ConstraintViolation("solve_p4: negative anchor z");
    if (zt == 0.0) continue;
    const double achievable = r.signal_at(p) / (r.interference_at(p) + r.noise);
    if ((zt - achievable) / std::max(1.0, zt) > tol)
      throw ConstraintViolation("solve_p4: anchor z exceeds the SINR its powers support");
  }
}

}  // namespace

P4Result solve_p4(const Assignment& a, const SinrVector& z_anchor, const PowerAlloc& p_anchor,
                  const Scenario& s, const P4Options& opt) {
  const int k_count = s.num_users();
  if (z_anchor.size() != k_count || p_anchor.size() != k_count)
    throw std::invalid_argument("solve_p4: anchor has the wrong size");
  P4Result out;
  out.z = SinrVector::Zero(k_count);
  out.p = PowerAlloc::Zero(k_count);

  for (int n = 0; n < s.grid().num_frames; ++n) {
    const SubframeAssignment a_n = slice(a, n);
    if (a_n.empty()) continue;
    const SubframeModel model = build_subframe_model(s, a_n);
    check_anchor(model, z_anchor, p_anchor);

    const double anchor_obj = subframe_objective(s, a_n, z_anchor);
    auto keep_anchor = [&] {
      for (int k : a_n.users) {
        out.z(k) = z_anchor(k);
        out.p(k) = model.has_power(k) ? p_anchor(k) : 0.0;
      }
      out.objective += anchor_obj;
    };

    P4Frame fr{s, model, {}, {}, {}, {}, {}, 0};
    for (int k : a_n.users)
      if (z_anchor(k) > z_min(s, k, Rb{a_n.band_of(k), n}, true)) fr.active.push_back(k);
    if (model.powered.empty() || fr.active.empty()) {
      keep_anchor();
      out.anchor_returned = true;
      continue;
    }
    fr.zscale = Vec(fr.active.size());
    fr.zcap = Vec(fr.active.size());
    SinrVector z_start = z_anchor;
    for (size_t i = 0; i < fr.active.size(); ++i) {
      const int k = fr.active[i];
      const double zm = z_min(s, k, Rb{a_n.band_of(k), n}, true);
      const double zs = z_saturation(s, k, a_n.band_of(k));
      fr.zcap(i) = zs > zm * (1.0 + 1e-6) ? zs : std::numeric_limits<double>::infinity();
      if (std::isfinite(fr.zcap(i)))
        z_start(k) = std::max(std::min(z_start(k), fr.zcap(i) * (1.0 - 1e-7)), zm * (1.0 + 1e-7));
      fr.zscale(i) = std::max({z_start(k), zm, 1.0});
      fr.zi[k] = static_cast<int>(i);
    }
    fr.dim = static_cast<int>(fr.active.size());
    for (int k : model.powered) fr.pi[k] = fr.dim++;

    const Vec ya = fr.to_y(z_start, p_anchor);
    const auto rows = fr.rows(ya);
    BarrierOptions bo = opt.barrier;
    bo.gap_tol = std::min(bo.gap_tol, opt.tol);
    const auto y0 = barrier_phase1(rows, ya, 1e-10, bo);
    if (!y0) {
      keep_anchor();
      out.anchor_returned = true;
      out.warning = true;
      continue;
    }
    const BarrierResult br = barrier_maximize(
        [&fr](const Vec& y, double& f, Vec* g, Mat* h) { return fr.objective(y, f, g, h); }, rows,
        *y0, bo);
    out.newton_steps += br.newton_steps;
    out.residual = std::max(out.residual, br.gap);
    if (!br.converged) out.warning = true;

    SinrVector z = SinrVector::Zero(k_count);
    PowerAlloc p = PowerAlloc::Zero(k_count);
    for (size_t i = 0; i < fr.active.size(); ++i) z(fr.active[i]) = fr.zscale(i) * br.y(i);
    for (const auto& [k, j] : fr.pi) p(k) = std::clamp(br.y(j), 0.0, 1.0) * model.p_max;
    const double obj = subframe_objective(s, a_n, z);
    if (!(obj >= anchor_obj)) {
      keep_anchor();
      out.anchor_returned = true;
      continue;
    }
    for (int k : a_n.users) {
      out.z(k) = z(k);
      out.p(k) = p(k);
    }
    out.objective += obj;
  }
  return out;
}

}  // namespace mdma
