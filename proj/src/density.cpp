#include "gsid/density.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace gsid {

namespace {

double dist_to_intervals(double z, std::span<const Interval> set) {
  double best = kInf;
  for (const auto& iv : set) {
    const double d = z < iv.lo ? iv.lo - z : (z > iv.hi ? z - iv.hi : 0.0);
    best = std::min(best, d);
  }
  return best;
}

std::vector<Interval> merged(std::span<const Interval> set) {
  std::vector<Interval> v(set.begin(), set.end());
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double sup_distance_1d(const Interval& Z, std::span<const Interval> Zprime) {
  const auto set = merged(Zprime);
  std::vector<double> candidates{Z.lo, Z.hi};
  for (std::size_t k = 0; k + 1 < set.size(); ++k) {
    const double mid = 0.5 * (set[k].hi + set[k + 1].lo);
    if (mid >= Z.lo && mid <= Z.hi) candidates.push_back(mid);
  }
  double sup = 0.0;
  for (double z : candidates) sup = std::max(sup, dist_to_intervals(z, set));
  return sup;
}

double dist_to_points(std::span<const double> z, const std::vector<std::vector<double>>& pts) {
  double best = kInf;
  for (const auto& p : pts) best = std::min(best, distance(z, p));
  return best;
}

struct Cell {
  std::vector<double> lo, hi;
  double value = 0.0;
  double upper = 0.0;
  bool operator<(const Cell& o) const { return upper < o.upper; }
};

Cell make_cell(std::vector<double> lo, std::vector<double> hi, const std::vector<std::vector<double>>& pts) {
  Cell c{std::move(lo), std::move(hi)};
  std::vector<double> mid(c.lo.size());
  double half_diag = 0.0;
  for (std::size_t d = 0; d < mid.size(); ++d) {
    mid[d] = 0.5 * (c.lo[d] + c.hi[d]);
    const double h = 0.5 * (c.hi[d] - c.lo[d]);
    half_diag += h * h;
  }
  c.value = dist_to_points(mid, pts);
  c.upper = c.value + std::sqrt(half_diag);
  return c;
}

}  // namespace

double lower_density(const Interval& Z, std::span<const Interval> Zprime) {
  if (Zprime.empty()) throw ConfigError("lower_density: Z' must be nonempty");
  const double sup = sup_distance_1d(Z, Zprime);
  return sup > 0.0 ? 1.0 / sup : kInf;
}

DensityResult lower_density(const DensityQuery& q, double tol) {
  if (q.Zprime.empty()) throw ConfigError("lower_density: Z' must be nonempty");
  for (const auto& p : q.Zprime) {
    if (p.size() != q.Z.dims()) throw ConfigError("lower_density: Z' point dimension differs from Z");
  }
  DensityResult r;
  if (q.Z.dims() == 1) {
    std::vector<Interval> pts;
    pts.reserve(q.Zprime.size());
    for (const auto& p : q.Zprime) pts.push_back({p[0], p[0]});
    r.sup_distance = sup_distance_1d({q.Z.lower[0], q.Z.upper[0]}, pts);
    r.sup_upper = r.sup_distance;
    r.exact = true;
  } else {
    std::priority_queue<Cell> open;
    open.push(make_cell(q.Z.lower, q.Z.upper, q.Zprime));
    double best = open.top().value;
    // Corners of Z are frequent maximizers and are never cell centers.
    const std::size_t dims = q.Z.dims();
    if (dims <= 16) {
      std::vector<double> corner(dims);
      for (std::uint32_t mask = 0; mask < (1u << dims); ++mask) {
        for (std::size_t d = 0; d < dims; ++d) corner[d] = (mask >> d) & 1u ? q.Z.upper[d] : q.Z.lower[d];
        best = std::max(best, dist_to_points(corner, q.Zprime));
      }
    }
    constexpr int kMaxCells = 2'000'000;
    int processed = 0;
    while (!open.empty() && processed < kMaxCells) {
      Cell c = open.top();
      if (c.upper - best <= tol * std::max(1.0, best)) break;
      open.pop();
      ++processed;
      std::size_t split = 0;
      for (std::size_t d = 1; d < c.lo.size(); ++d) {
        if (c.hi[d] - c.lo[d] > c.hi[split] - c.lo[split]) split = d;
      }
      const double mid = 0.5 * (c.lo[split] + c.hi[split]);
      auto lo_hi = c.hi;
      lo_hi[split] = mid;
      auto hi_lo = c.lo;
      hi_lo[split] = mid;
      for (Cell child : {make_cell(c.lo, lo_hi, q.Zprime), make_cell(hi_lo, c.hi, q.Zprime)}) {
        best = std::max(best, child.value);
        if (child.upper > best) open.push(std::move(child));
      }
    }
    r.sup_distance = best;
    r.sup_upper = open.empty() ? best : std::max(best, open.top().upper);
    r.exact = false;
  }
  r.density = r.sup_distance > 0.0 ? 1.0 / r.sup_distance : kInf;
  return r;
}

double m_sym_lower_density(std::span<const ProductFactor> product) {
  if (product.empty()) throw ConfigError("m_sym_lower_density: empty product");
  double best = kInf;
  for (const auto& f : product) best = std::min(best, lower_density(f.Z, f.E));
  return best;
}

double m_sym_lower_density(std::span<const std::vector<ProductFactor>> candidates) {
  if (candidates.empty()) throw ConfigError("m_sym_lower_density: no candidate products");
  double best = 0.0;
  for (const auto& c : candidates) best = std::max(best, m_sym_lower_density(c));
  return best;
}

}  // namespace gsid
