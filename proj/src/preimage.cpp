#include "critperc/preimage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>

#include "parallel.hpp"

namespace critperc {

bool BoundaryReport::ok() const {
  return std::all_of(faces.begin(), faces.end(), [](const FaceMargin& f) { return f.violations.empty(); });
}

BoundaryReport check_boundary_conditions(const GMap& g, std::size_t samples_per_face, std::uint64_t seed) {
  const int d = g.dim();
  const double n = g.n();
  BoundaryReport rep;
  for (int i = 0; i < d; ++i)
    for (int side = 0; side < 2; ++side) {
      FaceMargin f;
      f.axis = i;
      f.side = side;
      f.worst_margin = std::numeric_limits<double>::infinity();
      rep.faces.push_back(f);
    }

  auto record = [&](const Point& t, const Point& v, int i, int side) {
    FaceMargin& f = rep.faces[static_cast<std::size_t>(2 * i + side)];
    const double margin = side == 0 ? -v[i] / n : v[i] / n - 1.0;
    if (margin < f.worst_margin) {
      f.worst_margin = margin;
      f.worst_t = t;
    }
    if (margin < 0.0) f.violations.push_back(t);
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < d; ++i)
    for (int side = 0; side < 2; ++side)
      for (std::size_t s = 0; s < samples_per_face; ++s) {
        Point t(d);
        for (int j = 0; j < d; ++j) t[j] = u(rng);
        t[i] = side;
        record(t, g.value(t), i, side);
        ++rep.evaluations;
      }

  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Point t(d);
    for (int j = 0; j < d; ++j) t[j] = (mask >> j) & 1u;
    const Point v = g.value(t);
    ++rep.evaluations;
    for (int i = 0; i < d; ++i) record(t, v, i, static_cast<int>((mask >> i) & 1u));
  }
  return rep;
}

VectorMap clamp_map(VectorMap f) {
  return [f = std::move(f)](const Point& x) {
    Point y = f(x);
    for (int i = 0; i < y.dim; ++i) y[i] = std::clamp(y[i], 0.0, 1.0);
    return y;
  };
}

VectorMap normalized_map(const GMap& g) {
  return [&g](const Point& t) {
    Point v = g.value(t);
    for (int i = 0; i < v.dim; ++i) v[i] /= g.n();
    return v;
  };
}

FacePreservationReport face_preservation_check(const VectorMap& f, int d, std::size_t samples, std::uint64_t seed) {
  FacePreservationReport rep;
  rep.min_antipodal_distance = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    Point x(d);
    for (int j = 0; j < d; ++j) x[j] = u(rng);
    const int axis = static_cast<int>(rng() % static_cast<unsigned>(d));
    x[axis] = static_cast<double>(rng() & 1u);
    const Point y = f(x);
    bool on_boundary = false;
    double dist = 0.0;
    for (int j = 0; j < d; ++j) {
      if (y[j] == 0.0 || y[j] == 1.0) on_boundary = true;
      dist = std::max(dist, std::abs(y[j] - (1.0 - x[j])));
    }
    ++rep.samples;
    if (!on_boundary) ++rep.off_boundary;
    if (dist == 0.0) ++rep.antipodal_hits;
    rep.min_antipodal_distance = std::min(rep.min_antipodal_distance, dist);
  }
  return rep;
}

std::string to_string(PreimageStatus s) {
  switch (s) {
    case PreimageStatus::Found: return "found";
    case PreimageStatus::BudgetExhausted: return "budget_exhausted";
    case PreimageStatus::NoPreimageWithinTolerance: return "no_preimage_within_tolerance";
  }
  return "?";
}

namespace {

struct Node {
  SearchBox box;
  std::uint64_t id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.box.lower_bound != b.box.lower_bound) return a.box.lower_bound > b.box.lower_bound;
    if (a.box.center_error != b.box.center_error) return a.box.center_error > b.box.center_error;
    return a.id > b.id;
  }
};

}  // namespace

PreimageResult find_preimage(const GMap& g, const Point& y, double tol, std::uint64_t budget,
                             std::vector<SearchBox>* pruned) {
  const int d = g.dim();
  if (y.dim != d) throw std::invalid_argument("target has the wrong dimension");
  for (int i = 0; i < d; ++i)
    if (!(y[i] >= 0.0 && y[i] <= g.n())) throw std::invalid_argument("target must lie in [0,n]^d");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (budget == 0) throw std::invalid_argument("node budget must be positive");

  const Matrix& L = g.lipschitz();
  PreimageResult res;
  res.target = y;
  res.error = std::numeric_limits<double>::infinity();

  // evaluates the centre, updates the incumbent, returns the box lower bound
  auto bound = [&](SearchBox& b) {
    Point c(d);
    for (int j = 0; j < d; ++j) c[j] = 0.5 * (b.lo[j] + b.hi[j]);
    const Point v = g.value(c);
    ++res.nodes;
    double err = 0.0, lb = 0.0;
    for (int i = 0; i < d; ++i) {
      const double e = std::abs(v[i] - y[i]);
      double reach = 0.0;
      for (int j = 0; j < d; ++j) reach += L[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * 0.5 * (b.hi[j] - b.lo[j]);
      err = std::max(err, e);
      lb = std::max(lb, e - reach);
    }
    if (err < res.error) {
      res.error = err;
      res.t = c;
    }
    b.lower_bound = lb;
    b.center_error = err;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
  std::uint64_t next_id = 0;
  SearchBox root{Point(d), Point(d), 0.0, 0.0};
  for (int j = 0; j < d; ++j) root.hi[j] = 1.0;
  bound(root);
  queue.push({root, next_id++});

  while (res.error > tol) {
    if (queue.empty()) {
      res.status = PreimageStatus::NoPreimageWithinTolerance;
      return res;
    }
    if (res.nodes >= budget) {
      res.status = PreimageStatus::BudgetExhausted;
      return res;
    }
    const SearchBox b = queue.top().box;
    queue.pop();
    int axis = 0;
    for (int j = 1; j < d; ++j)
      if (b.hi[j] - b.lo[j] > b.hi[axis] - b.lo[axis]) axis = j;
    const double mid = 0.5 * (b.lo[axis] + b.hi[axis]);
    SearchBox halves[2] = {b, b};
    halves[0].hi[axis] = mid;
    halves[1].lo[axis] = mid;
    for (SearchBox& h : halves) {
      bound(h);
      if (res.error <= tol) break;
      if (h.lower_bound > tol) {
        if (pruned) pruned->push_back(h);
      } else {
        queue.push({h, next_id++});
      }
    }
  }
  res.status = PreimageStatus::Found;
  return res;
}

std::vector<PreimageResult> find_preimages(const GMap& g, const std::vector<Point>& targets, double tol,
                                           std::uint64_t budget, unsigned workers) {
  std::vector<PreimageResult> out(targets.size());
  const unsigned w = std::min<unsigned>(detail::resolve_workers(workers), std::max<std::size_t>(targets.size(), 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(targets.size());
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < targets.size();) {
      try {
        out[k] = find_preimage(g, targets[k], tol, budget);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (w <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned k = 0; k < w; ++k) threads.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<Point> lattice_targets(int d, int n) {
  if (d < 1 || d > kMaxDim || n < 0) throw std::invalid_argument("bad target grid");
  std::vector<Point> out;
  Point y(d);
  while (true) {
    out.push_back(y);
    int i = d - 1;
    while (i >= 0 && y[i] == n) y[i--] = 0.0;
    if (i < 0) break;
    y[i] += 1.0;
  }
  return out;
}

}  // namespace critperc
