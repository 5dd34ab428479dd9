#include <algorithm>
#include <bit>
#include <stdexcept>
#include <cmath>
#include <deque>

#include "critperc/percolation.hpp"
#include "critperc/rng.hpp"
#include "doctest.h"

using namespace critperc;

namespace {

// Independent oracle: sums over configurations with a plain BFS on Site
// values, sharing no code with the bitmask enumeration.
double brute_force_connection(double p, const Box& box, const Site& x, const Site& y) {
  const auto sites = box.sites();
  const std::size_t n = sites.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    auto open = [&](const Site& v) { return box.contains(v) && ((mask >> box.index_of(v)) & 1u); };
    if (!open(x) || !open(y)) continue;
    std::vector<Site> seen{x};
    std::deque<Site> q{x};
    bool hit = x == y;
    while (!q.empty() && !hit) {
      const Site v = q.front();
      q.pop_front();
      for (const Site& u : neighbours(v)) {
        if (!open(u) || std::find(seen.begin(), seen.end(), u) != seen.end()) continue;
        if (u == y) hit = true;
        seen.push_back(u);
        q.push_back(u);
      }
    }
    if (!hit) continue;
    const int k = std::popcount(mask);
    total += std::pow(p, k) * std::pow(1.0 - p, static_cast<double>(n) - k);
  }
  return total;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  using P = Philox4x32;
  CHECK(P::block({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(P::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(P::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter uniforms look uniform") {
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += counter_uniform(42, static_cast<std::uint64_t>(i), 7, 0);
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("connected_in_box") {
  const Box box = Box::lambda(2, 1);
  const auto all = Configuration::all_open(box);
  for (const Site& x : box.sites())
    for (const Site& y : box.sites()) CHECK(connected_in_box(all, x, y, box));

  auto c = Configuration::all_open(box);
  c.set_open(Site{0, 0}, false);
  CHECK_FALSE(connected_in_box(c, Site{0, 0}, Site{1, 0}, box));
  CHECK_FALSE(connected_in_box(c, Site{0, 0}, Site{0, 0}, box));

  const auto path = Configuration::from_open_set(box, make_site_set({Site{0, 0}, Site{0, 1}, Site{1, 1}}));
  CHECK(connected_in_box(path, Site{0, 0}, Site{1, 1}, box));
  CHECK_FALSE(connected_in_box(path, Site{0, 0}, Site{-1, -1}, box));
  CHECK_THROWS_AS(connected_in_box(path, Site{0, 0}, Site{2, 0}, box), std::invalid_argument);
}

TEST_CASE("connection is restricted to the box") {
  // (1,0) and (-1,0) connect only through row 1, which the lower box omits.
  const Box dom = Box::lambda(2, 2);
  const auto c = Configuration::from_open_set(
      dom, make_site_set({Site{1, 0}, Site{1, 1}, Site{0, 1}, Site{-1, 1}, Site{-1, 0}}));
  CHECK(connected_in_box(c, Site{1, 0}, Site{-1, 0}, dom));
  CHECK_FALSE(connected_in_box(c, Site{1, 0}, Site{-1, 0}, Box(Site{0, -1}, 1)));
}

TEST_CASE("connected_via_set") {
  const Box dom = Box::lambda(2, 2);
  auto c = Configuration::all_open(dom);
  CHECK(connected_via_set(c, Site{0, 0}, Site{1, 0}, SiteSet{Site{0, 0}}));
  c.set_open(Site{1, 0}, false);
  CHECK_FALSE(connected_via_set(c, Site{0, 0}, Site{1, 0}, SiteSet{Site{0, 0}}));

  auto blocked = Configuration::all_open(dom);
  blocked.set_open(Site{1, 0}, false);
  const auto gamma = make_site_set({Site{0, 0}, Site{1, 0}});
  CHECK_FALSE(connected_via_set(blocked, Site{0, 0}, Site{2, 0}, gamma));
  // With (1,0) open the two-step path works.
  CHECK(connected_via_set(Configuration::all_open(dom), Site{0, 0}, Site{2, 0}, gamma));
  // Paths may not detour outside gamma even when those sites are open.
  CHECK_FALSE(connected_via_set(Configuration::all_open(dom), Site{0, 0}, Site{2, 1}, gamma));
}

TEST_CASE("exact connection examples") {
  const Box box = Box::lambda(2, 1);
  CHECK(exact_connection(0.5, box, Site{0, 0}, Site{1, 0}) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(exact_connection(0.5, box, Site{0, 0}, Site{1, 1}) == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(exact_connection(1.0, box, Site{0, 0}, Site{1, 1}) == doctest::Approx(1.0));
  CHECK(exact_connection(0.0, box, Site{0, 0}, Site{1, 1}) == 0.0);
  CHECK(exact_connection(0.3, box, Site{0, 0}, Site{0, 0}) == doctest::Approx(0.3));
  CHECK_THROWS_AS(exact_connection(0.5, Box::lambda(2, 3), Site{0, 0}, Site{1, 0}), std::invalid_argument);
}

TEST_CASE("exact connection closed forms") {
  for (double p : {0.2, 0.5, 0.7}) {
    // p^2 (1 - (1-p)^2): both corners-adjacent routes
    CHECK(exact_connection(p, Box::lambda(2, 1), Site{0, 0}, Site{1, 1}) ==
          doctest::Approx(p * p * (1 - (1 - p) * (1 - p))).epsilon(1e-13));
    // a one-dimensional box: every intermediate site must be open
    for (int k = -3; k <= 3; ++k)
      CHECK(exact_connection(p, Box::lambda(1, 3), Site{0}, Site{k}) ==
            doctest::Approx(std::pow(p, std::abs(k) + 1)).epsilon(1e-13));
  }
}

TEST_CASE("bitmask enumeration agrees with the BFS oracle") {
  for (const Box& box : {Box::lambda(2, 1), Box(Site{1, 0}, 1), Box::lambda(1, 4)}) {
    for (double p : {0.35, 0.6}) {
      const Site x = box.center();
      for (const Site& y : box.sites())
        CHECK(exact_connection(p, box, x, y) == doctest::Approx(brute_force_connection(p, box, x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("connection profile agrees with pairwise enumeration") {
  const Box box = Box::lambda(2, 1);
  const auto prof = ConnectionProfile::compute(box, Site{0, 0});
  for (double p : {0.1, 0.55, 0.9})
    for (const Site& y : box.sites())
      CHECK(prof.probability(p, y) == doctest::Approx(exact_connection(p, box, Site{0, 0}, y)).epsilon(1e-13));
}

TEST_CASE("planar transfer sweep agrees with enumeration") {
  for (int m = 0; m <= 2; ++m) {
    const Box box = Box::lambda(2, m);
    for (double p : {0.0, 0.4, 0.593, 1.0}) {
      const auto prof = ConnectionProfile::compute(box, Site{0, 0});
      for (const Site& y : box.sites())
        CHECK(exact_connection_planar(p, box, Site{0, 0}, y) == doctest::Approx(prof.probability(p, y)).epsilon(1e-12));
    }
  }
  // off-centre source and a shifted box
  const Box shifted(Site{3, -1}, 2);
  CHECK(exact_connection_planar(0.6, shifted, Site{2, -2}, Site{4, 1}) ==
        doctest::Approx(exact_connection(0.6, shifted, Site{2, -2}, Site{4, 1})).epsilon(1e-12));
  CHECK(exact_connection_planar(0.6, shifted, Site{4, 1}, Site{2, -2}) ==
        doctest::Approx(exact_connection(0.6, shifted, Site{2, -2}, Site{4, 1})).epsilon(1e-12));
  CHECK_THROWS_AS(exact_connection_planar(0.5, Box::lambda(3, 1), Site(3), Site(3)), std::invalid_argument);
  CHECK_THROWS_AS(exact_connection_planar(0.5, Box::lambda(2, 12), Site(2), Site(2)), std::invalid_argument);
}

TEST_CASE("planar sweep: larger boxes dominate smaller ones") {
  const Site x{2, 1};
  double prev = 0.0;
  for (int m = 2; m <= 5; ++m) {
    const double v = exact_connection_planar(0.6, Box::lambda(2, m), Site{0, 0}, x);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
}

TEST_CASE("exact connection is monotone in p") {
  const Box box = Box::lambda(2, 1);
  const auto prof = ConnectionProfile::compute(box, Site{0, 0});
  for (const Site& y : box.sites()) {
    double prev = 0.0;
    for (int k = 0; k <= 50; ++k) {
      const double v = prof.probability(k / 50.0, y);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("exact connection is automorphism invariant") {
  const Box box = Box::lambda(2, 2);
  const auto prof = ConnectionProfile::compute(box, Site{0, 0});
  for (const auto& sigma : enumerate_automorphisms(2))
    for (const Site& y : box.sites())
      CHECK(prof.probability(0.55, y) == doctest::Approx(prof.probability(0.55, sigma.apply(y))).epsilon(1e-13));
}

TEST_CASE("FKG chaining inequality on small boxes") {
  const Box outer = Box::lambda(2, 2);
  const Box inner = Box::lambda(2, 1);
  const auto prof_outer = ConnectionProfile::compute(outer, Site{0, 0});
  const auto prof_inner = ConnectionProfile::compute(inner, Site{0, 0});
  for (double p : {0.3, 0.5, 0.7})
    for (const Site& z : inner.sites())
      for (const Site& w : inner.sites()) {
        const Site x = z + w;  // z + Λ(1) sits inside Λ(2)
        CHECK(prof_outer.probability(p, x) + 1e-15 >= prof_inner.probability(p, z) * prof_inner.probability(p, w));
      }
}

TEST_CASE("Monte Carlo estimate") {
  PercParams params;
  params.d = 2;
  params.seed = 2024;
  params.n_samples = 100000;

  params.p = 1.0;
  auto r = estimate_connection(params, Box::lambda(2, 1), Site{0, 0}, Site{1, 1});
  CHECK(r.estimate == 1.0);
  CHECK(r.ci_high == 1.0);

  params.p = 0.0;
  r = estimate_connection(params, Box::lambda(2, 1), Site{0, 0}, Site{1, 1});
  CHECK(r.estimate == 0.0);
  CHECK(r.ci_low == 0.0);

  params.p = 0.5;
  r = estimate_connection(params, Box::lambda(2, 1), Site{0, 0}, Site{1, 1});
  CHECK(std::abs(r.estimate - 0.1875) <= 4 * r.standard_error());
  CHECK(r.ci_low <= r.estimate);
  CHECK(r.estimate <= r.ci_high);

  params.n_samples = 0;
  CHECK_THROWS_AS(estimate_connection(params, Box::lambda(2, 1), Site{0, 0}, Site{1, 1}), std::invalid_argument);
}

TEST_CASE("Monte Carlo estimates do not depend on the worker count") {
  PercParams params;
  params.p = 0.593;
  params.seed = 99;
  params.n_samples = 20000;
  const Box box = Box::lambda(2, 3);
  params.workers = 1;
  const auto a = estimate_connection(params, box, Site{0, 0}, Site{2, 3});
  const auto all_a = estimate_connections_from(params, box, Site{0, 0});
  params.workers = 5;
  const auto b = estimate_connection(params, box, Site{0, 0}, Site{2, 3});
  const auto all_b = estimate_connections_from(params, box, Site{0, 0});
  CHECK(a.hits == b.hits);
  for (std::size_t k = 0; k < all_a.size(); ++k) CHECK(all_a[k].hits == all_b[k].hits);
  // the all-target pass uses the same configurations as the pairwise one
  CHECK(all_a[box.index_of(Site{2, 3})].hits == a.hits);
}

TEST_CASE("sampled configurations agree with estimator draws") {
  PercParams params;
  params.p = 0.5;
  params.seed = 5;
  params.n_samples = 300;
  const Box box = Box::lambda(2, 2);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < params.n_samples; ++s)
    hits += connected_in_box(sample_configuration(box, params.p, params.seed, s), Site{0, 0}, Site{1, 2}, box);
  CHECK(hits == estimate_connection(params, box, Site{0, 0}, Site{1, 2}).hits);
}

TEST_CASE("Wilson interval") {
  const auto r = wilson_interval(50, 100);
  CHECK(r.estimate == doctest::Approx(0.5));
  CHECK(r.ci_low < 0.5);
  CHECK(r.ci_high > 0.5);
  CHECK(r.ci_high - 0.5 == doctest::Approx(0.5 - r.ci_low));
  const auto zero = wilson_interval(0, 100);
  CHECK(zero.ci_low == 0.0);
  CHECK(zero.ci_high > 0.0);
  CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
}

TEST_CASE("Hammersley sum for a single site") {
  PercParams params;
  const SiteSet origin{Site{0, 0}};
  params.p = 0.6;
  const auto h = hammersley_sum(params, origin, Method::Exact);
  CHECK(h.terms.size() == 4);
  CHECK(std::abs(h.total - 1.44) < 1e-12);
  params.p = 1.0;
  CHECK(hammersley_sum(params, origin, Method::Exact).total == doctest::Approx(4.0));
  params.p = 0.5;
  CHECK(std::abs(hammersley_sum(params, origin, Method::Exact).total - 1.0) < 1e-12);
}

TEST_CASE("Hammersley sum input validation") {
  PercParams params;
  CHECK_THROWS_AS(hammersley_sum(params, make_site_set({Site{1, 0}}), Method::Exact), std::invalid_argument);
  CHECK_THROWS_AS(hammersley_sum(params, make_site_set({Site{0, 0}, Site{2, 0}}), Method::Exact), std::invalid_argument);
}

TEST_CASE("in-set connections: exact against configuration enumeration") {
  // Oracle: enumerate configurations on a box covering gamma and its boundary,
  // then test connected_via_set directly.
  const auto gamma = make_site_set({Site{0, 0}, Site{1, 0}, Site{0, 1}});
  const auto targets = outer_boundary(gamma);
  const Box dom = Box::lambda(2, 2);
  std::vector<Site> relevant(gamma.begin(), gamma.end());
  relevant.insert(relevant.end(), targets.begin(), targets.end());
  const double p = 0.45;
  std::vector<double> oracle(targets.size(), 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << relevant.size()); ++mask) {
    auto c = Configuration(dom, std::vector<std::uint8_t>(dom.size(), 0));
    int k = 0;
    for (std::size_t i = 0; i < relevant.size(); ++i)
      if ((mask >> i) & 1u) {
        c.set_open(relevant[i], true);
        ++k;
      }
    const double w = std::pow(p, k) * std::pow(1 - p, static_cast<double>(relevant.size()) - k);
    for (std::size_t t = 0; t < targets.size(); ++t)
      if (connected_via_set(c, Site{0, 0}, targets[t], gamma)) oracle[t] += w;
  }
  PercParams params;
  params.p = p;
  const auto exact = in_set_connections(params, gamma, Site{0, 0}, targets, Method::Exact);
  for (std::size_t t = 0; t < targets.size(); ++t) CHECK(exact[t].result.estimate == doctest::Approx(oracle[t]).epsilon(1e-12));

  params.n_samples = 50000;
  params.seed = 3;
  const auto mc = in_set_connections(params, gamma, Site{0, 0}, targets, Method::MonteCarlo);
  for (std::size_t t = 0; t < targets.size(); ++t)
    CHECK(std::abs(mc[t].result.estimate - oracle[t]) <= 4 * mc[t].result.standard_error() + 1e-12);
}

TEST_CASE("estimate CSV row") {
  PercParams params;
  params.p = 0.5;
  params.seed = 7;
  const auto row = estimate_csv_row(params, Box::lambda(2, 1), Site{0, 0}, Site{1, 1}, wilson_interval(3, 4));
  CHECK(row.rfind("0.5,0 0,1,0 0,1 1,0.75,", 0) == 0);
  CHECK(estimate_csv_header() == "p,box_center,box_radius,x,y,estimate,ci_low,ci_high,n_samples,seed");
}

TEST_CASE("exact lower bound falls back to a sub-box") {
  const auto small = exact_connection_lower(0.6, Box::lambda(2, 2), Site{0, 0}, Site{1, 1});
  CHECK(small.full);
  CHECK(small.value == doctest::Approx(exact_connection(0.6, Box::lambda(2, 2), Site{0, 0}, Site{1, 1})));
  const auto big = exact_connection_lower(0.6, Box::lambda(2, 8), Site{0, 0}, Site{1, 1}, 3);
  CHECK_FALSE(big.full);
  CHECK(big.box == Box::lambda(2, 3));
  CHECK(big.value >= small.value);
  CHECK_THROWS_AS(exact_connection_lower(0.6, Box::lambda(3, 2), Site(3), Site(3)), std::invalid_argument);
  CHECK_THROWS_AS(exact_connection_lower(0.6, Box::lambda(2, 8), Site(2), Site{7, 0}, 3), std::invalid_argument);
}
