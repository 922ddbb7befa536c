#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsid/common.hpp"
#include "gsid/density.hpp"
#include "gsid/system.hpp"

namespace gsid {

/// Stacked argument z^(k) = col{x^(k), y^(k)} of the level-k function g^k_j,
/// with |x_block| = 2^(k-1) n and |y_block| = 2^(k-1) m.
struct GNode {
  int level = 1;
  std::vector<double> x_block;
  std::vector<double> y_block;
};

/// g^k_j at `node`, 1 <= k <= j <= n:
///   g^1_j = df/dx_j,
///   g^{k+1}_j(z, zbar) = g^k_k(z) g^k_j(zbar) - g^k_k(zbar) g^k_j(z),
/// where z and zbar are the first and second halves of each block.
double g_eval(const SystemSpec& spec, int level, int index, const GNode& node);

/// g^k_j for every j in [k, n] (entry j - k), evaluating each sub-block once.
std::vector<double> g_eval_all(const SystemSpec& spec, int level, std::span<const double> x_block,
                               std::span<const double> y_block);

enum class Verdict { Member, NonmemberAtSample, Undecided };
std::string to_string(Verdict v);

struct MembershipResult {
  Verdict verdict = Verdict::Undecided;
  double min_abs_g = 0.0;            // over the sampled lattice of Theta^(2^(n-1))
  bool sign_change = false;
  std::optional<double> analytic_min;  // exact min |g^n_n| when the model admits one
};

inline constexpr double kMembershipTol = 1e-6;
inline constexpr double kExcitationTol = 1e-9;

/// Sampled test of beta in P' = {beta : g^n_n(x, beta) != 0 for all x in Theta^(2^(n-1))}.
/// Member if the sampled min |g| exceeds tol; nonmember-at-sample if g changes
/// sign on the (connected) lattice or some |g| < tol/10; undecided otherwise.
MembershipResult p_prime_membership(const SystemSpec& spec, std::span<const double> beta, int theta_grid_density,
                                    double tol = kMembershipTol);

/// Exact min over Theta of |g^1_1(x, beta)| for SinProduct (|beta cos(x beta)|).
std::optional<double> analytic_min_abs_g(const SystemSpec& spec, std::span<const double> beta);

/// |f(x, beta) - f(x', beta)| > tol; throws ConfigError when x == x'.
bool excitation_point_simple(const SystemSpec& spec, std::span<const double> x, std::span<const double> x_prime,
                             std::span<const double> beta, double tol = kExcitationTol);

/// Closure of {s in Z : excitation_point_simple(x, x', beta with coordinate
/// `coord` set to s)} as a union of intervals. The set is sampled on
/// `samples` lattice points and every transition is located by bisection.
std::vector<Interval> excitation_set_1d(const SystemSpec& spec, std::span<const double> x,
                                        std::span<const double> x_prime, std::span<const double> beta_base,
                                        int coord, const Interval& Z, int samples, double tol = kExcitationTol);

struct ExcitationRecord {
  std::vector<double> beta;
  double min_abs_g = 0.0;
  Verdict verdict = Verdict::Undecided;
};

struct ExcitationReport {
  std::vector<ExcitationRecord> records;
  std::vector<std::vector<double>> members;
  Box search_box;
  double density_estimate = 0.0;  // lower density of the members in the search box

  std::string to_json() const;
};

/// Scans a lattice of `samples_per_dim` points per coordinate of the search box
/// (dimension 2^(n-1) m). Parallel over samples; records keep lattice order.
ExcitationReport excitation_scan(const SystemSpec& spec, const Box& search_box, int samples_per_dim,
                                 int theta_grid_density, double tol = kMembershipTol);

}  // namespace gsid
