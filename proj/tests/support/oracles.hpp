#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Pt {
  double t;
  double v;
};

// Piecewise-linear value at t, found by bisection.
inline double lerp_at(const std::vector<Pt>& pts, double t) {
  if (t <= pts.front().t) return pts.front().v;
  if (t >= pts.back().t) return pts.back().v;
  std::size_t lo = 0, hi = pts.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (pts[mid].t <= t ? lo : hi) = mid;
  }
  const double f = (t - pts[lo].t) / (pts[hi].t - pts[lo].t);
  return pts[lo].v + f * (pts[hi].v - pts[lo].v);
}

// Midpoint Riemann sum of the linear interpolant over [a, b] on a uniform
// grid of n cells, with the sample times added as extra cut points so kinks
// do not fall inside a cell.
inline double riemann(const std::vector<Pt>& pts, double a, double b, std::size_t n) {
  std::vector<double> cuts;
  cuts.reserve(n + pts.size() + 1);
  for (std::size_t k = 0; k <= n; ++k) cuts.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n));
  for (const auto& p : pts)
    if (p.t > a && p.t < b) cuts.push_back(p.t);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double w = cuts[k + 1] - cuts[k];
    if (w > 0.0) s += w * lerp_at(pts, 0.5 * (cuts[k] + cuts[k + 1]));
  }
  return s;
}

// Ordinary least squares with intercept via the normal equations on the
// centred design. Returns raw-scale slopes and the intercept.
struct OlsFit {
  std::vector<double> slopes;
  double intercept = 0.0;
};

inline OlsFit ols(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    yy(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const double my = yy.mean();
  const Eigen::MatrixXd xc = x.rowwise() - mx;
  const Eigen::VectorXd yc = yy.array() - my;
  const Eigen::VectorXd beta = (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc);
  OlsFit f;
  for (Eigen::Index j = 0; j < p; ++j) f.slopes.push_back(beta(j));
  f.intercept = my - mx.dot(beta);
  return f;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double pop_std(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Plug-in MI of two discrete label sequences, in nats.
inline double discrete_mi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pab[{a[i], b[i]}] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  return mi;
}

// Equal-frequency quantisation by rank; ties take the smallest rank of
// their group.
inline std::vector<int> quantise(const std::vector<double>& x, int bins) {
  const std::size_t n = x.size();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t below = 0;
    for (double v : x)
      if (v < x[i]) ++below;
    out[i] = static_cast<int>(below * static_cast<std::size_t>(bins) / n);
  }
  return out;
}

inline double binned_mi(const std::vector<double>& x, const std::vector<double>& y, int bins) {
  return discrete_mi(quantise(x, bins), quantise(y, bins));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
