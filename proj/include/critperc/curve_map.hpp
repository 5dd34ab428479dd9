#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "critperc/good_set.hpp"
#include "critperc/lattice.hpp"

namespace critperc {

/// Fixed-capacity real vector; entries past dim() stay zero.
struct Point {
  std::array<double, kMaxDim> c{};
  int dim = 0;

  Point() = default;
  explicit Point(int d) : dim(d) {}
  Point(std::initializer_list<double> xs);
  static Point from_site(const Site& v);

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::span<const double> span() const { return {c.data(), static_cast<std::size_t>(dim)}; }

  double l1() const;
  double linf() const;
  std::string to_string() const;

  bool operator==(const Point&) const = default;
};

Point operator-(const Point& a, const Point& b);

/// Piecewise-linear, constant parameter speed: segment j covers [j/k, (j+1)/k].
class Curve {
 public:
  Curve() = default;
  /// A single-vertex path becomes a constant curve with one zero-length step.
  explicit Curve(const LatticePath& path);

  int dim() const { return vertices_.front().dim(); }
  int steps() const { return static_cast<int>(vertices_.size()) - 1; }
  const std::vector<Site>& vertices() const { return vertices_; }
  const Site& breakpoint(int j) const { return vertices_[static_cast<std::size_t>(j)]; }

  Point eval(double t) const;
  /// Coordinate i only, for hot loops.
  double eval(double t, int i) const;

  /// Index of the breakpoint j/k nearest t; ties go to the smaller index.
  int nearest_breakpoint(double t) const;

  /// Whether coordinate i changes anywhere along the curve.
  bool moves_along(int i) const { return moves_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Site> vertices_;
  std::array<bool, kMaxDim> moves_{};
};

/// Evaluates h_m(x) = |h_{m-1}(x_1..x_{m-1}) - x_m| with h_1 = |x_1| and writes
/// weights a in {-1,+1} with value = sum a_j x_j into `signs`.
double h_with_signs(std::span<const double> x, std::span<int> signs);

struct HResult {
  double value = 0.0;
  std::vector<int> signs;
};

HResult h_with_signs(std::span<const double> x);

using Matrix = std::array<std::array<double, kMaxDim>, kMaxDim>;
using SignMatrix = std::array<std::array<int, kMaxDim>, kMaxDim>;

struct GEval {
  Point t;
  Point value;
  Matrix C{};        // C[i][j] = (c^(j)(t_j))_i
  SignMatrix a{};    // row signs; a[i][i] = +1
};

struct Decomposition {
  Point t;
  Point x;                        // g(t)
  Point s;                        // breakpoint parameters
  std::vector<int> breakpoints;   // breakpoint index per curve
  std::vector<Site> z;            // sign-flipped breakpoint vertices
  std::vector<Site> partial_sums;
  Point residual;                 // x - sum z
};

/// The map g(t)_i = C_ii + h_{d-1}(row i of C without the diagonal).
class GMap {
 public:
  /// Validates that curve j runs from coordinate j = -n to +n, keeps that
  /// coordinate in [-n,n] and every other coordinate in [0,n].
  GMap(std::vector<Curve> curves, int n);

  int dim() const { return static_cast<int>(curves_.size()); }
  int n() const { return n_; }
  const std::vector<Curve>& curves() const { return curves_; }

  GEval eval(const Point& t) const;
  Point value(const Point& t) const;

  /// Sum_j ã^(j)(t_j) with row signs taken from `ev`.
  Point signed_column_sum(const GEval& ev) const;

  /// L[i][j] bounds |g_i(t) - g_i(t')| <= sum_j L[i][j] |t_j - t'_j|.
  const Matrix& lipschitz() const { return lip_; }
  /// Bound on ||g(t) - g(t')||_1 per unit of ||t - t'||_inf.
  double lipschitz_l1() const;

  Decomposition decompose(const Point& t) const;

 private:
  std::vector<Curve> curves_;
  int n_ = 0;
  Matrix lip_{};
};

/// Curve j runs straight from -n e_j to n e_j in 2n steps.
std::vector<Curve> straight_axis_curves(int d, int n);

/// Reflects a good path across its face and rotates it onto every axis.
std::vector<Curve> build_curves(const GoodPath& path, int n);

}  // namespace critperc
