#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace critperc {

inline constexpr int kMaxDim = 6;

/// A point of Z^d with 1 <= d <= kMaxDim. Unused trailing coordinates are
/// kept at zero so the defaulted comparison is lexicographic within a
/// dimension.
class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<int> coords);
  static Site from_span(std::span<const int> coords);
  static Site unit(int dim, int axis, int sign = 1);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  int l1() const;
  int linf() const;
  bool is_origin() const;

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;

  std::string to_string() const;

  auto operator<=>(const Site&) const = default;

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

int l1_distance(const Site& a, const Site& b);
bool adjacent(const Site& a, const Site& b);
std::vector<Site> neighbours(const Site& v);

/// Sorted, duplicate-free site collection.
using SiteSet = std::vector<Site>;

SiteSet make_site_set(std::vector<Site> sites);
bool contains(const SiteSet& set, const Site& v);

/// Axis-aligned L-infinity ball centred at `center`.
class Box {
 public:
  Box() = default;
  Box(Site center, int radius);
  static Box lambda(int dim, int radius);

  const Site& center() const { return center_; }
  int radius() const { return radius_; }
  int dim() const { return center_.dim(); }
  int width() const { return 2 * radius_ + 1; }
  std::size_t size() const;

  bool contains(const Site& v) const;
  bool contains(const Box& other) const;

  // Row-major with the last axis fastest.
  std::size_t index_of(const Site& v) const;
  Site site_at(std::size_t index) const;
  std::vector<Site> sites() const;

  bool operator==(const Box&) const = default;

 private:
  Site center_;
  int radius_ = 0;
};

/// Sequence of sites whose consecutive L1 steps are at most one.
class LatticePath {
 public:
  LatticePath() = default;
  explicit LatticePath(std::vector<Site> vertices);

  const std::vector<Site>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  const Site& front() const { return v_.front(); }
  const Site& back() const { return v_.back(); }
  const Site& operator[](std::size_t i) const { return v_[i]; }

  bool operator==(const LatticePath&) const = default;

 private:
  std::vector<Site> v_;
};

bool is_lattice_path(std::span<const Site> vertices);

/// Signed permutation: (sigma v)[perm[i]] = sign[i] * v[i].
class BoxAutomorphism {
 public:
  static BoxAutomorphism identity(int dim);
  BoxAutomorphism(std::vector<int> perm, std::vector<int> signs);

  int dim() const { return static_cast<int>(perm_.size()); }
  const std::vector<int>& perm() const { return perm_; }
  const std::vector<int>& signs() const { return signs_; }

  Site apply(const Site& v) const;
  /// (this after other)(v) = this(other(v))
  BoxAutomorphism compose(const BoxAutomorphism& other) const;

  auto operator<=>(const BoxAutomorphism&) const = default;

 private:
  std::vector<int> perm_;
  std::vector<int> signs_;
};

std::vector<BoxAutomorphism> enumerate_automorphisms(int dim);
BoxAutomorphism axis_swap(int dim, int a, int b);
BoxAutomorphism axis_reflection(int dim, int axis);

SiteSet outer_boundary(const SiteSet& w);
SiteSet inner_boundary(const SiteSet& w);
bool is_connected(const SiteSet& w);

LatticePath coordinatewise_abs(const LatticePath& path);

}  // namespace critperc
