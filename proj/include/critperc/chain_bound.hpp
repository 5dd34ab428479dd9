#pragma once

#include <optional>
#include <string>
#include <vector>

#include "critperc/curve_map.hpp"
#include "critperc/lattice.hpp"
#include "critperc/percolation.hpp"

namespace critperc {

struct ChainEvent {
  Site source;
  Site target;
  Box box;
  bool final_step = false;  // the short hop from the last partial sum to x
};

struct ChainCertificate {
  Site x;
  int n = 0;
  Decomposition dec;
  std::vector<ChainEvent> events;  // d good-vertex steps, then the final step
  bool small_n = false;            // n <= d/2: the chain is not confined to Λ(4n)
  bool contained = false;          // every event box lies in Λ(4n)
  int final_length = 0;            // ||x - sum z||_1, the sites the final step opens
};

/// Builds the chain 0 -> z1 -> z1+z2 -> ... -> sum z -> x. Throws
/// std::invalid_argument if the decomposition does not fit x, and
/// InternalInconsistency if n > d/2 and a box leaves Λ(4n).
ChainCertificate chain_events(const Site& x, const Decomposition& dec, int n);

struct ChainBound {
  double chain = 0.0;          // product of the step factors and the final factor
  std::vector<double> steps;   // one factor per good-vertex step
  double final_factor = 1.0;   // p^m with m = final_length
  double half_dim_final = 1.0;    // p^(d/2)
  double small_n_value = 0.0;  // p^(||x||_1 + 1), the direct-path bound
  double value = 0.0;          // chain if n > d/2, else small_n_value
  double explicit_form = 0.0;  // p^(d/2) / 3^(d^2) / n^(d^2)
};

/// Step j contributes max(1/(2n+1)^d, measured[j]) when z_j != 0. For z_j = 0
/// the event is {S open} with probability p: its factor is measured[j] if
/// given, otherwise min(1/(2n+1)^d, p).
ChainBound chain_lower_bound(const ChainCertificate& cert, double p,
                             const std::vector<double>* measured = nullptr);

double explicit_constant(int d, double p);  // p^(d/2) / 3^(d^2)

/// c / ||x||_inf^(d^2); x = 0 is rejected.
double theorem_bound(const Site& x, double c);

/// c' / n^(d^2) for the Λ(9n) two-point form.
double corollary_bound(int n, int d, double c_prime);

/// For x, y in Λ(n): P(x <-> y in Λ(9n)) >= P(0 <-> y - x in Λ(8n)) >= (c / 2^(d^2)) / n^(d^2).
double point_pair_bound(const Site& x, const Site& y, int n, double c);

struct ExponentTable {
  int d = 0;
  int cerf = 0;     // 2d(d-1)
  int adapted = 0;  // (2d-1)(d-1)
  int this_work = 0;  // d^2
};

ExponentTable compare_exponents(int d);

struct ExponentFit {
  double exponent = 0.0;   // -slope of log p against log ||x||
  double intercept = 0.0;  // log p at ||x|| = 1
  std::vector<double> residuals;
  std::size_t used = 0;
  std::size_t excluded = 0;  // zero-probability points
  std::vector<std::string> warnings;
  bool consistent_with(int d) const { return exponent <= static_cast<double>(d * d); }
};

/// Unweighted least squares in log-log space. Needs three distinct norms
/// with positive probability.
ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& measurements);

struct BoundVerdict {
  bool pass = false;
  double direct = 0.0;  // exact value, or the CI lower bound for an estimate
  double chain = 0.0;
  double margin = 0.0;  // direct - chain
};

/// Relative slack for floating-point rounding in verify_bound.
inline constexpr double kBoundRelativeTolerance = 1e-12;

BoundVerdict verify_bound(const EstimatorResult& direct, double chain);

/// Largest c with direct >= c / ||x||^(d^2) for every measurement.
double best_constant(const std::vector<std::pair<double, double>>& measurements, int d);

}  // namespace critperc
