#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critperc/lattice.hpp"

namespace critperc {

/// Sampling parameters. `workers` only controls parallelism; estimates are
/// a function of (p, seed, n_samples) alone.
struct PercParams {
  double p = 0.5;
  int d = 2;
  std::uint64_t seed = 1;
  std::uint64_t n_samples = 10000;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const;
};

// two-sided 99%
inline constexpr double kWilsonZ99 = 2.5758293035489004;

struct EstimatorResult {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t hits = 0;

  /// Wilson half-width divided by z; zero for exact results.
  double standard_error() const;
  bool is_exact() const { return n_samples == 0; }
};

EstimatorResult wilson_interval(std::uint64_t hits, std::uint64_t n, double z = kWilsonZ99);
EstimatorResult exact_result(double probability);

enum class Method { Exact, MonteCarlo };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Occupancy of every site of a box.
class Configuration {
 public:
  Configuration(Box domain, std::vector<std::uint8_t> open);
  static Configuration all_open(const Box& domain);
  static Configuration from_open_set(const Box& domain, const SiteSet& open_sites);

  const Box& domain() const { return domain_; }
  bool covers(const Site& v) const { return domain_.contains(v); }
  bool is_open(const Site& v) const;
  void set_open(const Site& v, bool open);
  const std::vector<std::uint8_t>& flags() const { return open_; }

 private:
  Box domain_;
  std::vector<std::uint8_t> open_;
};

/// Position-keyed draw: a site has the same state in sample `sample` no
/// matter which domain it is sampled as part of.
std::uint64_t site_key(const Site& v);
bool site_open(double p, std::uint64_t seed, std::uint64_t sample, const Site& v,
               std::uint32_t stream = 0);
Configuration sample_configuration(const Box& domain, double p, std::uint64_t seed,
                                   std::uint64_t sample, std::uint32_t stream = 0);

bool connected_in_box(const Configuration& config, const Site& x, const Site& y, const Box& box);

/// Open path from x to target whose vertices, except possibly target, lie in gamma.
bool connected_via_set(const Configuration& config, const Site& x, const Site& target,
                       const SiteSet& gamma);

EstimatorResult estimate_connection(const PercParams& params, const Box& box, const Site& x,
                                    const Site& y);

/// Estimates from `source` to every site of `box`, indexed by Box::index_of.
/// Uses the same configurations as estimate_connection(params, box, source, .).
std::vector<EstimatorResult> estimate_connections_from(const PercParams& params, const Box& box,
                                                       const Site& source);

inline constexpr std::size_t kMaxExactSites = 30;

/// Exhaustive sum over all 2^|box| configurations.
double exact_connection(double p, const Box& box, const Site& x, const Site& y);

/// Connection probabilities from one source to every target of a box, kept
/// as integer counts per number of open sites so any p can be evaluated.
class ConnectionProfile {
 public:
  static ConnectionProfile compute(const Box& box, const Site& source);

  const Box& box() const { return box_; }
  const Site& source() const { return source_; }
  double probability(double p, const Site& target) const;

 private:
  Box box_;
  Site source_;
  std::size_t n_sites_ = 0;
  std::vector<std::vector<std::uint64_t>> counts_;  // [target][#open]
};

inline constexpr int kMaxPlanarWidth = 24;

/// Exact connection probability in a d=2 box by a row-by-row transfer sweep
/// over frontier connectivity states. Handles widths up to kMaxPlanarWidth.
double exact_connection_planar(double p, const Box& box, const Site& x, const Site& y);

inline constexpr int kDefaultPlanarRadius = 5;

struct BoxedExact {
  double value = 0.0;
  Box box;            // box the value was computed in
  bool full = false;  // box equals the requested one
};

/// Exact probability in `box` when tractable, otherwise (d = 2) the exact
/// probability in the concentric sub-box of radius `max_planar_radius`,
/// which is a lower bound since the event is increasing in the box.
BoxedExact exact_connection_lower(double p, const Box& box, const Site& x, const Site& y,
                                  int max_planar_radius = kDefaultPlanarRadius);

struct InSetConnection {
  Site target;
  EstimatorResult result;
};

/// P(source <-> target 'in' gamma) for each target: an open path from
/// source whose vertices other than the target lie in gamma.
std::vector<InSetConnection> in_set_connections(const PercParams& params, const SiteSet& gamma,
                                                const Site& source, const SiteSet& targets,
                                                Method method);

struct HammersleyResult {
  double total = 0.0;
  std::vector<InSetConnection> terms;  // one per outer-boundary site, sorted
  Method method = Method::Exact;
};

HammersleyResult hammersley_sum(const PercParams& params, const SiteSet& gamma, Method method);

std::string estimate_csv_header();
std::string estimate_csv_row(const PercParams& params, const Box& box, const Site& x, const Site& y,
                             const EstimatorResult& r);

}  // namespace critperc
