#include "mdma/lp.hpp"

#include <sstream>

namespace mdma {

LpResult simplex_maximize(const Vec& c, const Mat& a, const Vec& b, double good_enough) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (c.size() != n || b.size() != m) throw LpError("simplex: inconsistent dimensions");
  if (m > 0 && b.minCoeff() < 0) throw LpError("simplex: negative right-hand side");
  constexpr double kPivotTol = 1e-12;

  // tableau rows 0..m-1: [A | I | b]; row m: [-c | 0 | 0]
  Mat t = Mat::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  LpResult out;
  const int budget = 50 * (n + m) + 100;
  for (;;) {
    if (t(m, n + m) >= good_enough) {
      out.stopped_early = true;
      break;
    }
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (t(m, j) < -kPivotTol) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) <= kPivotTol) continue;
      const double ratio = t(i, n + m) / t(i, enter);
      if (leave < 0 || ratio < best - 1e-15 ||
          (ratio <= best + 1e-15 && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) throw LpError("simplex: unbounded objective");
    t.row(leave) /= t(leave, enter);
    for (int i = 0; i <= m; ++i)
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    basis[leave] = enter;
    if (++out.pivots > budget) {
      std::ostringstream msg;
      msg << "simplex: pivot budget exhausted (" << m << " rows, " << n << " columns)";
      throw LpError(msg.str());
    }
  }
  out.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) out.x(basis[i]) = std::max(0.0, t(i, n + m));
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace mdma
