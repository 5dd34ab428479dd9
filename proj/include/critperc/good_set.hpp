#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "critperc/lattice.hpp"
#include "critperc/percolation.hpp"

namespace critperc {

enum class GoodLabel { Good, NotGood, Uncertain };

std::string to_string(GoodLabel l);

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// 1/|Λ(n)| = 1/(2n+1)^d
Rational good_threshold(int n, int d);

GoodLabel label_from_estimate(const EstimatorResult& r, double threshold);

/// Label of v in Λ(n): Good if the CI lower bound reaches the threshold,
/// NotGood if the CI upper bound is below it, Uncertain otherwise.
GoodLabel classify_vertex(const Site& v, int n, const PercParams& params, Method method);

struct Classification {
  Site v;
  GoodLabel label = GoodLabel::Uncertain;
  EstimatorResult probability;  // P(0 <-> v in Λ(n))
};

/// Classifies every vertex of Λ(n) from one exact profile or one shared
/// Monte Carlo pass. Sorted by site.
std::vector<Classification> classify_all(int n, const PercParams& params, Method method);

struct GrowthStep {
  std::uint64_t gamma_hash = 0;   // hash of Γ_j before adding `chosen`
  std::size_t gamma_size = 0;
  std::size_t boundary_size = 0;  // |∂out Γ_j|
  std::size_t candidates = 0;     // |∂out Γ_j ∩ Λ(n)|
  Site chosen;
  EstimatorResult estimate;       // P(0 <-> chosen 'in' Γ_j)
  std::uint64_t seed = 0;         // seed used for this step's samples
};

struct GrowthTrace {
  int n = 0;
  int d = 0;
  double p = 0.0;
  Method method = Method::Exact;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  std::vector<GrowthStep> steps;
  SiteSet final_gamma;
  Site terminal;  // chosen vertex on the inner boundary of Λ(n)
};

std::uint64_t site_set_hash(const SiteSet& s);
std::uint64_t step_seed(std::uint64_t seed, std::size_t step);

/// Greedy growth from Γ = {0}: each step adds the outer-boundary vertex inside
/// Λ(n) with the largest estimated 'in'-Γ connection probability (ties to the
/// lexicographically smallest) until a vertex with ‖x‖∞ = n is added.
GrowthTrace grow_gamma(int n, const PercParams& params, Method method);

/// Re-classifies every chosen vertex with `params` (typically more samples).
std::vector<Classification> validate_trace(const GrowthTrace& trace, const PercParams& params, Method method);

struct GoodPath {
  LatticePath path;  // in [0,n]^d, from 0 to the face {x_face = n}
  int face = 0;      // zero-based axis
  LatticePath raw;   // the path inside Γ before taking absolute values
};

GoodPath extract_good_path(const GrowthTrace& trace);

/// (ṽ(k), ..., ṽ(1), v(1), ..., v(k)) where ṽ negates coordinate `axis`.
LatticePath reflect_double(const LatticePath& path, int axis, int n);

LatticePath rotate_to_axis(const LatticePath& path, int from_axis, int to_axis);

}  // namespace critperc
