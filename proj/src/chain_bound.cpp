#include "critperc/chain_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "critperc/errors.hpp"

namespace critperc {

ChainCertificate chain_events(const Site& x, const Decomposition& dec, int n) {
  const int d = x.dim();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (static_cast<int>(dec.z.size()) != d || static_cast<int>(dec.partial_sums.size()) != d)
    throw std::invalid_argument("decomposition has the wrong number of terms");
  Site sum(d);
  for (int j = 0; j < d; ++j) {
    const Site& z = dec.z[static_cast<std::size_t>(j)];
    if (z.dim() != d) throw std::invalid_argument("decomposition dimension mismatch");
    if (z.linf() > n) throw std::invalid_argument("term " + z.to_string() + " is outside Λ(n)");
    sum = sum + z;
    if (sum != dec.partial_sums[static_cast<std::size_t>(j)])
      throw std::invalid_argument("partial sums do not match the terms");
  }
  const int m = l1_distance(x, sum);
  if (2 * m > d) throw std::invalid_argument("x is " + std::to_string(m) + " steps from the last partial sum; at most d/2 allowed");

  ChainCertificate cert;
  cert.x = x;
  cert.n = n;
  cert.dec = dec;
  cert.final_length = m;
  cert.small_n = 2 * n <= d;

  Site prev(d);
  for (int j = 0; j < d; ++j) {
    const Site& next = dec.partial_sums[static_cast<std::size_t>(j)];
    cert.events.push_back({prev, next, Box(prev, n), false});
    prev = next;
  }
  cert.events.push_back({prev, x, Box(prev, d), true});

  const Box outer = Box::lambda(d, 4 * n);
  cert.contained = std::all_of(cert.events.begin(), cert.events.end(), [&](const ChainEvent& e) { return outer.contains(e.box); });
  if (!cert.small_n && !cert.contained) throw InternalInconsistency("chain event box leaves Λ(4n) although n > d/2");
  return cert;
}

double explicit_constant(int d, double p) { return std::pow(p, 0.5 * d) / std::pow(3.0, d * d); }

ChainBound chain_lower_bound(const ChainCertificate& cert, double p, const std::vector<double>* measured) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  const int d = cert.x.dim();
  if (measured && static_cast<int>(measured->size()) != d)
    throw std::invalid_argument("need one measured probability per good-vertex step");
  const double threshold = 1.0 / std::pow(2.0 * cert.n + 1.0, d);

  ChainBound b;
  b.chain = 1.0;
  for (int j = 0; j < d; ++j) {
    const bool origin = cert.dec.z[static_cast<std::size_t>(j)].is_origin();
    const double meas = measured ? (*measured)[static_cast<std::size_t>(j)] : 0.0;
    double f;
    if (origin) f = measured ? meas : std::min(threshold, p);
    else f = std::max(threshold, meas);
    b.steps.push_back(f);
    b.chain *= f;
  }
  b.final_factor = std::pow(p, cert.final_length);
  b.chain *= b.final_factor;
  b.half_dim_final = std::pow(p, 0.5 * d);
  b.small_n_value = std::pow(p, cert.x.l1() + 1);
  b.value = cert.small_n ? b.small_n_value : b.chain;
  b.explicit_form = explicit_constant(d, p) * std::pow(static_cast<double>(cert.n), -static_cast<double>(d * d));
  return b;
}

double theorem_bound(const Site& x, double c) {
  if (x.is_origin()) throw std::invalid_argument("x must be nonzero");
  const int d = x.dim();
  return c / std::pow(static_cast<double>(x.linf()), d * d);
}

double corollary_bound(int n, int d, double c_prime) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  return c_prime / std::pow(static_cast<double>(n), d * d);
}

double point_pair_bound(const Site& x, const Site& y, int n, double c) {
  const int d = x.dim();
  const Box lam = Box::lambda(d, n);
  if (!lam.contains(x) || !lam.contains(y)) throw std::invalid_argument("x and y must lie in Λ(n)");
  return corollary_bound(n, d, c / std::pow(2.0, d * d));
}

ExponentTable compare_exponents(int d) {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  return {d, 2 * d * (d - 1), (2 * d - 1) * (d - 1), d * d};
}

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& measurements) {
  ExponentFit fit;
  std::vector<double> lx, ly;
  std::set<double> norms;
  for (const auto& [norm, prob] : measurements) {
    if (!(norm > 0.0)) throw std::invalid_argument("norms must be positive");
    if (!(prob > 0.0)) {
      ++fit.excluded;
      fit.warnings.push_back("excluded zero probability at norm " + std::to_string(norm));
      continue;
    }
    lx.push_back(std::log(norm));
    ly.push_back(std::log(prob));
    norms.insert(norm);
  }
  if (norms.size() < 3) throw std::invalid_argument("exponent fit needs three distinct norms with positive probability");
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  fit.exponent = -slope;
  fit.intercept = my - slope * mx;
  fit.used = lx.size();
  for (std::size_t i = 0; i < lx.size(); ++i) fit.residuals.push_back(ly[i] - (fit.intercept + slope * lx[i]));
  return fit;
}

BoundVerdict verify_bound(const EstimatorResult& direct, double chain) {
  BoundVerdict v;
  v.direct = direct.is_exact() ? direct.estimate : direct.ci_low;
  v.chain = chain;
  v.margin = v.direct - chain;
  v.pass = v.margin >= -kBoundRelativeTolerance * chain;
  return v;
}

double best_constant(const std::vector<std::pair<double, double>>& measurements, int d) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& [norm, prob] : measurements) c = std::min(c, prob * std::pow(norm, d * d));
  return measurements.empty() ? 0.0 : c;
}

}  // namespace critperc
