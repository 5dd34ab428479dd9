#include "critperc/percolation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>

#include "critperc/rng.hpp"
#include "critperc/union_find.hpp"
#include "parallel.hpp"

namespace critperc {

void PercParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("unsupported dimension");
  if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
}

double EstimatorResult::standard_error() const {
  if (is_exact()) return 0.0;
  const double n = static_cast<double>(n_samples);
  const double ph = estimate;
  const double z2 = kWilsonZ99 * kWilsonZ99;
  return std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

EstimatorResult wilson_interval(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) throw std::invalid_argument("n_samples must be positive");
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  EstimatorResult r;
  r.estimate = ph;
  r.n_samples = n;
  r.hits = hits;
  r.ci_low = hits == 0 ? 0.0 : std::clamp(centre - half, 0.0, ph);
  r.ci_high = hits == n ? 1.0 : std::clamp(centre + half, ph, 1.0);
  return r;
}

EstimatorResult exact_result(double probability) {
  EstimatorResult r;
  r.estimate = r.ci_low = r.ci_high = probability;
  return r;
}

std::string to_string(Method m) { return m == Method::Exact ? "exact" : "mc"; }

Method method_from_string(const std::string& s) {
  if (s == "exact") return Method::Exact;
  if (s == "mc" || s == "monte_carlo") return Method::MonteCarlo;
  throw std::invalid_argument("unknown oracle '" + s + "' (expected exact or mc)");
}

Configuration::Configuration(Box domain, std::vector<std::uint8_t> open)
    : domain_(std::move(domain)), open_(std::move(open)) {
  if (open_.size() != domain_.size())
    throw std::invalid_argument("configuration needs one flag per domain site");
}

Configuration Configuration::all_open(const Box& domain) {
  return Configuration(domain, std::vector<std::uint8_t>(domain.size(), 1));
}

Configuration Configuration::from_open_set(const Box& domain, const SiteSet& open_sites) {
  Configuration c(domain, std::vector<std::uint8_t>(domain.size(), 0));
  for (const Site& v : open_sites) c.set_open(v, true);
  return c;
}

bool Configuration::is_open(const Site& v) const { return open_[domain_.index_of(v)] != 0; }

void Configuration::set_open(const Site& v, bool open) { open_[domain_.index_of(v)] = open ? 1 : 0; }

std::uint64_t site_key(const Site& v) {
  std::uint64_t key = static_cast<std::uint64_t>(v.dim()) << 60;
  for (int i = 0; i < v.dim(); ++i) {
    if (v[i] <= -512 || v[i] >= 512) throw std::invalid_argument("site coordinate out of sampling range");
    key |= static_cast<std::uint64_t>(v[i] + 512) << (10 * i);
  }
  return key;
}

bool site_open(double p, std::uint64_t seed, std::uint64_t sample, const Site& v, std::uint32_t stream) {
  return counter_uniform(seed, sample, site_key(v), stream) < p;
}

namespace {

std::vector<std::uint64_t> box_keys(const Box& box) {
  std::vector<std::uint64_t> keys(box.size());
  for (std::size_t k = 0; k < keys.size(); ++k) keys[k] = site_key(box.site_at(k));
  return keys;
}

void fill_open(std::vector<std::uint8_t>& open, const std::vector<std::uint64_t>& keys, double p,
               std::uint64_t seed, std::uint64_t sample, std::uint32_t stream) {
  for (std::size_t k = 0; k < keys.size(); ++k)
    open[k] = counter_uniform(seed, sample, keys[k], stream) < p ? 1 : 0;
}

// Neighbour table of a box; -1 marks a neighbour outside.
std::vector<std::int64_t> box_neighbours(const Box& box) {
  const int d = box.dim();
  std::vector<std::int64_t> nb(box.size() * 2 * static_cast<std::size_t>(d), -1);
  for (std::size_t k = 0; k < box.size(); ++k) {
    const auto nbs = neighbours(box.site_at(k));
    for (std::size_t j = 0; j < nbs.size(); ++j)
      if (box.contains(nbs[j]))
        nb[k * nbs.size() + j] = static_cast<std::int64_t>(box.index_of(nbs[j]));
  }
  return nb;
}

void unite_open(UnionFind& uf, const std::vector<std::uint8_t>& open, const std::vector<std::int64_t>& nb,
                std::size_t degree) {
  uf.reset();
  for (std::size_t k = 0; k < open.size(); ++k) {
    if (!open[k]) continue;
    for (std::size_t j = 0; j < degree; j += 2) {  // +1 neighbours only
      const auto m = nb[k * degree + j + 1];
      if (m >= 0 && open[static_cast<std::size_t>(m)])
        uf.unite(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(m));
    }
  }
}

}  // namespace

Configuration sample_configuration(const Box& domain, double p, std::uint64_t seed, std::uint64_t sample,
                                   std::uint32_t stream) {
  std::vector<std::uint8_t> open(domain.size());
  fill_open(open, box_keys(domain), p, seed, sample, stream);
  return Configuration(domain, std::move(open));
}

bool connected_in_box(const Configuration& config, const Site& x, const Site& y, const Box& box) {
  if (!box.contains(x) || !box.contains(y)) throw std::invalid_argument("endpoint outside box");
  if (!config.domain().contains(box)) throw std::invalid_argument("configuration does not cover box");
  if (!config.is_open(x) || !config.is_open(y)) return false;
  if (x == y) return true;
  std::vector<std::uint8_t> open(box.size());
  for (std::size_t k = 0; k < open.size(); ++k) open[k] = config.is_open(box.site_at(k)) ? 1 : 0;
  UnionFind uf(box.size());
  unite_open(uf, open, box_neighbours(box), 2 * static_cast<std::size_t>(box.dim()));
  return uf.same(static_cast<std::uint32_t>(box.index_of(x)), static_cast<std::uint32_t>(box.index_of(y)));
}

bool connected_via_set(const Configuration& config, const Site& x, const Site& target, const SiteSet& gamma) {
  if (!config.covers(x) || !config.covers(target)) throw std::invalid_argument("configuration does not cover endpoints");
  if (!config.is_open(x) || !config.is_open(target)) return false;
  if (x == target) return true;
  if (!contains(gamma, x)) throw std::invalid_argument("source must lie in gamma");
  std::vector<Site> seen{x};
  std::deque<Site> queue{x};
  while (!queue.empty()) {
    const Site v = queue.front();
    queue.pop_front();
    for (const Site& u : neighbours(v)) {
      if (u == target) return true;
      if (!contains(gamma, u) || !config.covers(u) || !config.is_open(u)) continue;
      if (std::find(seen.begin(), seen.end(), u) != seen.end()) continue;
      seen.push_back(u);
      queue.push_back(u);
    }
  }
  return false;
}

EstimatorResult estimate_connection(const PercParams& params, const Box& box, const Site& x, const Site& y) {
  params.validate();
  if (!box.contains(x) || !box.contains(y)) throw std::invalid_argument("endpoint outside box");
  const auto keys = box_keys(box);
  const auto nb = box_neighbours(box);
  const auto xi = static_cast<std::uint32_t>(box.index_of(x));
  const auto yi = static_cast<std::uint32_t>(box.index_of(y));
  const std::size_t degree = 2 * static_cast<std::size_t>(box.dim());
  const auto counts = detail::parallel_count(
      params.n_samples, params.workers, 1, [&](std::uint64_t begin, std::uint64_t end, std::vector<std::uint64_t>& acc) {
        std::vector<std::uint8_t> open(box.size());
        UnionFind uf(box.size());
        for (std::uint64_t s = begin; s < end; ++s) {
          fill_open(open, keys, params.p, params.seed, s, 0);
          if (!open[xi] || !open[yi]) continue;
          unite_open(uf, open, nb, degree);
          if (uf.same(xi, yi)) ++acc[0];
        }
      });
  return wilson_interval(counts[0], params.n_samples);
}

std::vector<EstimatorResult> estimate_connections_from(const PercParams& params, const Box& box, const Site& source) {
  params.validate();
  if (!box.contains(source)) throw std::invalid_argument("source outside box");
  const auto keys = box_keys(box);
  const auto nb = box_neighbours(box);
  const auto si = static_cast<std::uint32_t>(box.index_of(source));
  const std::size_t degree = 2 * static_cast<std::size_t>(box.dim());
  const auto counts = detail::parallel_count(
      params.n_samples, params.workers, box.size(),
      [&](std::uint64_t begin, std::uint64_t end, std::vector<std::uint64_t>& acc) {
        std::vector<std::uint8_t> open(box.size());
        UnionFind uf(box.size());
        for (std::uint64_t s = begin; s < end; ++s) {
          fill_open(open, keys, params.p, params.seed, s, 0);
          if (!open[si]) continue;
          unite_open(uf, open, nb, degree);
          const auto root = uf.find(si);
          for (std::uint32_t k = 0; k < open.size(); ++k)
            if (open[k] && uf.find(k) == root) ++acc[k];
        }
      });
  std::vector<EstimatorResult> out;
  out.reserve(box.size());
  for (auto c : counts) out.push_back(wilson_interval(c, params.n_samples));
  return out;
}

namespace {

// Bitmask flood fill over a small graph with at most 64 vertices.
std::uint64_t flood(unsigned start, std::uint64_t allowed, const std::vector<std::uint64_t>& nbr) {
  std::uint64_t cluster = (std::uint64_t{1} << start) & allowed;
  std::uint64_t frontier = cluster;
  while (frontier) {
    const int i = std::countr_zero(frontier);
    frontier &= frontier - 1;
    const std::uint64_t add = nbr[static_cast<std::size_t>(i)] & allowed & ~cluster;
    cluster |= add;
    frontier |= add;
  }
  return cluster;
}

std::vector<std::uint64_t> neighbour_masks(const std::vector<Site>& sites) {
  std::vector<std::uint64_t> nbr(sites.size(), 0);
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = 0; b < sites.size(); ++b)
      if (adjacent(sites[a], sites[b])) nbr[a] |= std::uint64_t{1} << b;
  return nbr;
}

// sum_k counts[k] p^k (1-p)^(n-k)
double evaluate_counts(const std::vector<std::uint64_t>& counts, double p, std::size_t n) {
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!counts[k]) continue;
    total += static_cast<double>(counts[k]) * std::pow(p, static_cast<double>(k)) *
             std::pow(1.0 - p, static_cast<double>(n - k));
  }
  return total;
}

void check_exact_size(std::size_t n) {
  if (n > kMaxExactSites)
    throw std::invalid_argument("exact enumeration limited to " + std::to_string(kMaxExactSites) +
                                " sites, domain has " + std::to_string(n));
}

}  // namespace

ConnectionProfile ConnectionProfile::compute(const Box& box, const Site& source) {
  check_exact_size(box.size());
  if (!box.contains(source)) throw std::invalid_argument("source outside box");
  ConnectionProfile prof;
  prof.box_ = box;
  prof.source_ = source;
  prof.n_sites_ = box.size();
  const auto sites = box.sites();
  const auto nbr = neighbour_masks(sites);
  const auto si = static_cast<unsigned>(box.index_of(source));
  const std::uint64_t src_bit = std::uint64_t{1} << si;
  prof.counts_.assign(sites.size(), std::vector<std::uint64_t>(sites.size() + 1, 0));
  const std::uint64_t total = std::uint64_t{1} << sites.size();
  for (std::uint64_t mask = src_bit; mask < total; mask = (mask + 1) | src_bit) {
    const std::uint64_t cluster = flood(si, mask, nbr);
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    for (std::uint64_t c = cluster; c; c &= c - 1) ++prof.counts_[static_cast<std::size_t>(std::countr_zero(c))][k];
  }
  return prof;
}

double ConnectionProfile::probability(double p, const Site& target) const {
  return evaluate_counts(counts_[box_.index_of(target)], p, n_sites_);
}

double exact_connection(double p, const Box& box, const Site& x, const Site& y) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  check_exact_size(box.size());
  if (!box.contains(x) || !box.contains(y)) throw std::invalid_argument("endpoint outside box");
  const auto sites = box.sites();
  const auto nbr = neighbour_masks(sites);
  const auto xi = static_cast<unsigned>(box.index_of(x));
  const auto yi = static_cast<unsigned>(box.index_of(y));
  const std::uint64_t need = (std::uint64_t{1} << xi) | (std::uint64_t{1} << yi);
  std::vector<std::uint64_t> counts(sites.size() + 1, 0);
  const std::uint64_t total = std::uint64_t{1} << sites.size();
  for (std::uint64_t mask = need; mask < total; mask = (mask + 1) | need) {
    if ((flood(xi, mask, nbr) >> yi) & 1u) ++counts[static_cast<std::size_t>(std::popcount(mask))];
  }
  return evaluate_counts(counts, p, sites.size());
}

std::vector<InSetConnection> in_set_connections(const PercParams& params, const SiteSet& gamma, const Site& source,
                                                const SiteSet& targets, Method method) {
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (!contains(gamma, source)) throw std::invalid_argument("source must lie in gamma");
  // Local graph: gamma first, then targets outside gamma.
  std::vector<Site> sites(gamma.begin(), gamma.end());
  std::vector<std::size_t> target_index;
  for (const Site& t : targets) {
    auto it = std::find(sites.begin(), sites.end(), t);
    if (it == sites.end()) {
      sites.push_back(t);
      it = sites.end() - 1;
    }
    target_index.push_back(static_cast<std::size_t>(it - sites.begin()));
  }
  const std::size_t n_gamma = gamma.size();
  const auto src = static_cast<unsigned>(std::lower_bound(gamma.begin(), gamma.end(), source) - gamma.begin());
  std::vector<InSetConnection> out;
  out.reserve(targets.size());

  if (method == Method::Exact) {
    check_exact_size(n_gamma);
    // Outside targets are independent of gamma's sites: P = p * P(target touches the cluster).
    std::vector<std::uint64_t> adj(targets.size(), 0);
    for (std::size_t t = 0; t < targets.size(); ++t)
      for (std::size_t g = 0; g < n_gamma; ++g)
        if (adjacent(targets[t], gamma[g])) adj[t] |= std::uint64_t{1} << g;
    const auto nbr = neighbour_masks(std::vector<Site>(gamma.begin(), gamma.end()));
    std::vector<std::vector<std::uint64_t>> counts(targets.size(), std::vector<std::uint64_t>(n_gamma + 1, 0));
    const std::uint64_t src_bit = std::uint64_t{1} << src;
    const std::uint64_t total = std::uint64_t{1} << n_gamma;
    for (std::uint64_t mask = src_bit; mask < total; mask = (mask + 1) | src_bit) {
      const std::uint64_t cluster = flood(src, mask, nbr);
      const auto k = static_cast<std::size_t>(std::popcount(mask));
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const bool inside = target_index[t] < n_gamma;
        const bool hit = inside ? ((cluster >> target_index[t]) & 1u) : (adj[t] & cluster) != 0;
        if (hit) ++counts[t][k];
      }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      double prob = evaluate_counts(counts[t], params.p, n_gamma);
      if (target_index[t] >= n_gamma) prob *= params.p;
      out.push_back({targets[t], exact_result(prob)});
    }
    return out;
  }

  params.validate();
  std::vector<std::vector<std::uint32_t>> adj(sites.size());
  {
    SiteSet sorted_sites = make_site_set(sites);
    for (std::size_t k = 0; k < sites.size(); ++k)
      for (const Site& u : neighbours(sites[k])) {
        if (!contains(sorted_sites, u)) continue;
        const auto it = std::find(sites.begin(), sites.end(), u);
        adj[k].push_back(static_cast<std::uint32_t>(it - sites.begin()));
      }
  }
  std::vector<std::uint64_t> keys(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) keys[k] = site_key(sites[k]);
  const auto counts = detail::parallel_count(
      params.n_samples, params.workers, targets.size(),
      [&](std::uint64_t begin, std::uint64_t end, std::vector<std::uint64_t>& acc) {
        std::vector<std::uint8_t> open(sites.size()), in_cluster(sites.size());
        std::vector<std::uint32_t> stack;
        for (std::uint64_t s = begin; s < end; ++s) {
          if (counter_uniform(params.seed, s, keys[src], 0) >= params.p) continue;
          for (std::size_t k = 0; k < sites.size(); ++k)
            open[k] = counter_uniform(params.seed, s, keys[k], 0) < params.p ? 1 : 0;
          std::fill(in_cluster.begin(), in_cluster.end(), 0);
          in_cluster[src] = 1;
          stack.assign(1, src);
          while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (auto u : adj[v])
              if (u < n_gamma && open[u] && !in_cluster[u]) {
                in_cluster[u] = 1;
                stack.push_back(u);
              }
          }
          for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto ti = target_index[t];
            if (!open[ti]) continue;
            bool hit = in_cluster[ti] != 0;
            if (!hit && ti >= n_gamma)
              hit = std::any_of(adj[ti].begin(), adj[ti].end(), [&](std::uint32_t u) { return in_cluster[u] != 0; });
            if (hit) ++acc[t];
          }
        }
      });
  for (std::size_t t = 0; t < targets.size(); ++t)
    out.push_back({targets[t], wilson_interval(counts[t], params.n_samples)});
  return out;
}

HammersleyResult hammersley_sum(const PercParams& params, const SiteSet& gamma, Method method) {
  if (gamma.empty()) throw std::invalid_argument("gamma must contain the origin");
  const Site origin(gamma.front().dim());
  if (!contains(gamma, origin)) throw std::invalid_argument("gamma must contain the origin");
  if (!is_connected(gamma)) throw std::invalid_argument("gamma must be connected");
  HammersleyResult r;
  r.method = method;
  r.terms = in_set_connections(params, gamma, origin, outer_boundary(gamma), method);
  for (const auto& t : r.terms) r.total += t.result.estimate;
  return r;
}

namespace {

std::string coords(const Site& v) {
  std::string s;
  for (int i = 0; i < v.dim(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string estimate_csv_header() {
  return "p,box_center,box_radius,x,y,estimate,ci_low,ci_high,n_samples,seed";
}

std::string estimate_csv_row(const PercParams& params, const Box& box, const Site& x, const Site& y,
                             const EstimatorResult& r) {
  return num(params.p) + "," + coords(box.center()) + "," + std::to_string(box.radius()) + "," + coords(x) + "," +
         coords(y) + "," + num(r.estimate) + "," + num(r.ci_low) + "," + num(r.ci_high) + "," +
         std::to_string(r.n_samples) + "," + std::to_string(params.seed);
}

}  // namespace critperc
