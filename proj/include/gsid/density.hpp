#pragma once

#include <span>
#include <vector>

#include "gsid/common.hpp"

namespace gsid {

/// Closed interval; lo == hi is a single point.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Z and a finite Z' in R^l.
struct DensityQuery {
  Box Z;
  std::vector<std::vector<double>> Zprime;
};

struct DensityResult {
  double density = 0.0;       // 1 / sup distance, +inf when the sup is 0
  double sup_distance = 0.0;  // attained (certified lower bound on the sup)
  double sup_upper = 0.0;     // certified upper bound on the sup (== sup_distance when exact)
  bool exact = false;
};

/// Lower density 1 / sup_{z in Z} dist(z, Z').
/// Exact in 1-D (candidates: the ends of Z and midpoints of gaps between
/// consecutive Z' points); branch-and-bound with the 1-Lipschitz bound of the
/// distance function otherwise, refined until the bracket is within `tol`.
DensityResult lower_density(const DensityQuery& q, double tol = 1e-10);

/// Exact 1-D lower density of a finite union of closed intervals in Z.
/// Distance to a set equals distance to its closure, so open excitation sets
/// may be passed as their closures.
double lower_density(const Interval& Z, std::span<const Interval> Zprime);

/// One factor of a product-form query: E_j inside Z_j.
struct ProductFactor {
  Interval Z;
  std::vector<Interval> E;
};

/// min_j lower_density(E_j | Z_j) of one candidate product prod_j E_j.
double m_sym_lower_density(std::span<const ProductFactor> product);

/// Best over several candidate products: max of the per-candidate minima.
double m_sym_lower_density(std::span<const std::vector<ProductFactor>> candidates);

}  // namespace gsid
