#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "critperc/curve_map.hpp"

namespace critperc {

struct FaceMargin {
  int axis = 0;
  int side = 0;               // 0: t_axis = 0, 1: t_axis = 1
  double worst_margin = 0.0;  // min over samples of -g_i/n (side 0) or g_i/n - 1 (side 1)
  Point worst_t;
  std::vector<Point> violations;
};

struct BoundaryReport {
  std::vector<FaceMargin> faces;  // 2d entries, axis-major
  std::size_t evaluations = 0;
  bool ok() const;
};

/// Evaluates g on `samples_per_face` random points of every face plus all
/// 2^d corners (corners count towards each face they lie on).
BoundaryReport check_boundary_conditions(const GMap& g, std::size_t samples_per_face, std::uint64_t seed = 1);

using VectorMap = std::function<Point(const Point&)>;

/// Coordinatewise clamp of f to [0,1].
VectorMap clamp_map(VectorMap f);

/// t -> g(t) / n.
VectorMap normalized_map(const GMap& g);

struct FacePreservationReport {
  std::size_t samples = 0;
  std::size_t off_boundary = 0;        // f(x) not on the boundary of the cube
  std::size_t antipodal_hits = 0;      // f(x) == 1 - x
  double min_antipodal_distance = 0.0; // min ||f(x) - (1 - x)||_inf
  bool ok() const { return off_boundary == 0 && antipodal_hits == 0; }
};

FacePreservationReport face_preservation_check(const VectorMap& f, int d, std::size_t samples,
                                               std::uint64_t seed = 1);

enum class PreimageStatus { Found, BudgetExhausted, NoPreimageWithinTolerance };

std::string to_string(PreimageStatus s);

inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

struct PreimageResult {
  Point target;
  Point t;
  double error = 0.0;  // ||g(t) - y||_inf at the best t seen
  std::uint64_t nodes = 0;
  PreimageStatus status = PreimageStatus::BudgetExhausted;
  bool found() const { return status == PreimageStatus::Found; }
};

struct SearchBox {
  Point lo;
  Point hi;
  double lower_bound = 0.0;
  double center_error = 0.0;
};

/// Best-first branch and bound on ||g(t) - y||_inf over [0,1]^d, ordered by
/// Lipschitz lower bound and then by the error at the box centre. A box is
/// discarded when its lower bound exceeds tol; boxes are split by bisecting
/// their longest side. If `pruned` is given, every discarded box
/// is appended to it.
PreimageResult find_preimage(const GMap& g, const Point& y, double tol = kDefaultTolerance,
                             std::uint64_t budget = kDefaultNodeBudget, std::vector<SearchBox>* pruned = nullptr);

/// Solves every target independently; results are in target order.
std::vector<PreimageResult> find_preimages(const GMap& g, const std::vector<Point>& targets, double tol,
                                           std::uint64_t budget, unsigned workers = 0);

/// All lattice points of [0,n]^d in Box order.
std::vector<Point> lattice_targets(int d, int n);

}  // namespace critperc
