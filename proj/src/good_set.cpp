#include "critperc/good_set.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

#include "critperc/errors.hpp"
#include "critperc/rng.hpp"

namespace critperc {

std::string to_string(GoodLabel l) {
  switch (l) {
    case GoodLabel::Good: return "good";
    case GoodLabel::NotGood: return "not_good";
    case GoodLabel::Uncertain: return "uncertain";
  }
  return "?";
}

Rational good_threshold(int n, int d) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::uint64_t den = 1;
  for (int i = 0; i < d; ++i) den *= static_cast<std::uint64_t>(2 * n + 1);
  return {1, den};
}

GoodLabel label_from_estimate(const EstimatorResult& r, double threshold) {
  if (r.ci_low >= threshold) return GoodLabel::Good;
  if (r.ci_high < threshold) return GoodLabel::NotGood;
  return GoodLabel::Uncertain;
}

namespace {

EstimatorResult exact_in_lambda(double p, int n, const Site& v) {
  const auto r = exact_connection_lower(p, Box::lambda(v.dim(), n), Site(v.dim()), v);
  if (!r.full) throw std::invalid_argument("no exact oracle for Λ(" + std::to_string(n) + ") in this dimension");
  return exact_result(r.value);
}

}  // namespace

GoodLabel classify_vertex(const Site& v, int n, const PercParams& params, Method method) {
  const Box box = Box::lambda(v.dim(), n);
  if (!box.contains(v)) throw std::invalid_argument("vertex " + v.to_string() + " outside Λ(n)");
  if (v.is_origin()) return GoodLabel::Good;
  const double threshold = good_threshold(n, v.dim()).value();
  if (method == Method::Exact) return label_from_estimate(exact_in_lambda(params.p, n, v), threshold);
  return label_from_estimate(estimate_connection(params, box, Site(v.dim()), v), threshold);
}

std::vector<Classification> classify_all(int n, const PercParams& params, Method method) {
  const Box box = Box::lambda(params.d, n);
  const Site origin(params.d);
  const double threshold = good_threshold(n, params.d).value();
  std::vector<EstimatorResult> probs(box.size());
  if (method == Method::MonteCarlo) {
    probs = estimate_connections_from(params, box, origin);
  } else if (box.size() <= kMaxExactSites) {
    const auto prof = ConnectionProfile::compute(box, origin);
    for (std::size_t k = 0; k < box.size(); ++k) probs[k] = exact_result(prof.probability(params.p, box.site_at(k)));
  } else {
    for (std::size_t k = 0; k < box.size(); ++k) probs[k] = exact_in_lambda(params.p, n, box.site_at(k));
  }
  std::vector<Classification> out;
  out.reserve(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    const Site v = box.site_at(k);
    const GoodLabel label = v.is_origin() ? GoodLabel::Good : label_from_estimate(probs[k], threshold);
    out.push_back({v, label, probs[k]});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.v < b.v; });
  return out;
}

std::uint64_t site_set_hash(const SiteSet& s) {
  // FNV-1a over the coordinates
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const Site& v : s)
    for (int i = 0; i < v.dim(); ++i) {
      h ^= static_cast<std::uint32_t>(v[i]);
      h *= 0x100000001b3ull;
    }
  return h;
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t step) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(step)));
}

GrowthTrace grow_gamma(int n, const PercParams& params, Method method) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  const int d = params.d;
  const Box box = Box::lambda(d, n);
  GrowthTrace trace;
  trace.n = n;
  trace.d = d;
  trace.p = params.p;
  trace.method = method;
  trace.seed = params.seed;
  trace.n_samples = method == Method::MonteCarlo ? params.n_samples : 0;

  SiteSet gamma{Site(d)};
  for (std::size_t step = 0;; ++step) {
    const SiteSet boundary = outer_boundary(gamma);
    SiteSet candidates;
    std::copy_if(boundary.begin(), boundary.end(), std::back_inserter(candidates),
                 [&](const Site& v) { return box.contains(v); });
    if (candidates.empty()) throw InternalInconsistency("growth ran out of candidates inside Λ(n)");

    PercParams sp = params;
    sp.seed = step_seed(params.seed, step);
    const auto est = in_set_connections(sp, gamma, Site(d), candidates, method);
    // candidates are sorted, so the first maximum is the lexicographic tie-break
    std::size_t best = 0;
    for (std::size_t k = 1; k < est.size(); ++k)
      if (est[k].result.estimate > est[best].result.estimate) best = k;

    GrowthStep s;
    s.gamma_hash = site_set_hash(gamma);
    s.gamma_size = gamma.size();
    s.boundary_size = boundary.size();
    s.candidates = candidates.size();
    s.chosen = est[best].target;
    s.estimate = est[best].result;
    s.seed = sp.seed;
    trace.steps.push_back(s);

    gamma.insert(std::lower_bound(gamma.begin(), gamma.end(), s.chosen), s.chosen);
    if (s.chosen.linf() == n) {
      trace.terminal = s.chosen;
      break;
    }
  }
  trace.final_gamma = gamma;
  return trace;
}

std::vector<Classification> validate_trace(const GrowthTrace& trace, const PercParams& params, Method method) {
  const Box box = Box::lambda(trace.d, trace.n);
  const double threshold = good_threshold(trace.n, trace.d).value();
  std::vector<Classification> out;
  if (method == Method::MonteCarlo) {
    const auto all = estimate_connections_from(params, box, Site(trace.d));
    for (const auto& s : trace.steps) {
      const auto& r = all[box.index_of(s.chosen)];
      out.push_back({s.chosen, label_from_estimate(r, threshold), r});
    }
  } else {
    for (const auto& s : trace.steps) {
      const auto r = exact_in_lambda(params.p, trace.n, s.chosen);
      out.push_back({s.chosen, label_from_estimate(r, threshold), r});
    }
  }
  return out;
}

GoodPath extract_good_path(const GrowthTrace& trace) {
  const SiteSet& gamma = trace.final_gamma;
  const Site origin(trace.d);
  if (!contains(gamma, origin) || !contains(gamma, trace.terminal))
    throw std::invalid_argument("incomplete growth trace");
  std::map<Site, Site> parent;
  parent.emplace(origin, origin);
  std::deque<Site> queue{origin};
  while (!queue.empty() && !parent.count(trace.terminal)) {
    const Site v = queue.front();
    queue.pop_front();
    for (const Site& u : neighbours(v))
      if (contains(gamma, u) && parent.emplace(u, v).second) queue.push_back(u);
  }
  if (!parent.count(trace.terminal)) throw InternalInconsistency("Γ is not connected");
  std::vector<Site> rev{trace.terminal};
  while (rev.back() != origin) rev.push_back(parent.at(rev.back()));
  std::reverse(rev.begin(), rev.end());

  GoodPath gp;
  gp.raw = LatticePath(rev);
  gp.path = coordinatewise_abs(gp.raw);
  const Site& end = gp.path.back();
  gp.face = -1;
  for (int i = 0; i < end.dim() && gp.face < 0; ++i)
    if (end[i] == trace.n) gp.face = i;
  if (gp.face < 0) throw InternalInconsistency("good path does not end on a face of [0,n]^d");
  return gp;
}

LatticePath reflect_double(const LatticePath& path, int axis, int n) {
  if (path.empty() || !path.front().is_origin()) throw std::invalid_argument("path must start at the origin");
  const int d = path.front().dim();
  if (axis < 0 || axis >= d) throw std::invalid_argument("axis out of range");
  if (path.back()[axis] != n)
    throw std::invalid_argument("path must end with coordinate " + std::to_string(axis) + " equal to n");
  for (const Site& v : path.vertices())
    for (int i = 0; i < d; ++i)
      if (v[i] < 0 || v[i] > n) throw std::invalid_argument("path must lie in [0,n]^d");
  const auto flip = axis_reflection(d, axis);
  std::vector<Site> out;
  out.reserve(2 * path.size());
  for (auto it = path.vertices().rbegin(); it != path.vertices().rend(); ++it) out.push_back(flip.apply(*it));
  out.insert(out.end(), path.vertices().begin(), path.vertices().end());
  return LatticePath(std::move(out));
}

LatticePath rotate_to_axis(const LatticePath& path, int from_axis, int to_axis) {
  if (path.empty()) return path;
  const auto swap = axis_swap(path.front().dim(), from_axis, to_axis);
  std::vector<Site> out;
  out.reserve(path.size());
  for (const Site& v : path.vertices()) out.push_back(swap.apply(v));
  return LatticePath(std::move(out));
}

}  // namespace critperc
