#include "critperc/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace critperc {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(dim));
}

}  // namespace

Site::Site(int dim) : dim_(dim) { check_dim(dim); }

Site::Site(std::initializer_list<int> coords) : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Site Site::from_span(std::span<const int> coords) {
  Site s(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), s.c_.begin());
  return s;
}

Site Site::unit(int dim, int axis, int sign) {
  Site s(dim);
  s[axis] = sign;
  return s;
}

int Site::l1() const {
  int r = 0;
  for (int i = 0; i < dim_; ++i) r += std::abs(c_[i]);
  return r;
}

int Site::linf() const {
  int r = 0;
  for (int i = 0; i < dim_; ++i) r = std::max(r, std::abs(c_[i]));
  return r;
}

bool Site::is_origin() const {
  return std::all_of(c_.begin(), c_.end(), [](int x) { return x == 0; });
}

Site Site::operator+(const Site& o) const {
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] += o.c_[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] -= o.c_[i];
  return r;
}

Site Site::operator-() const {
  Site r = *this;
  for (int i = 0; i < dim_; ++i) r.c_[i] = -r.c_[i];
  return r;
}

std::string Site::to_string() const {
  std::string s = "(";
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ',';
    s += std::to_string(c_[i]);
  }
  return s + ")";
}

int l1_distance(const Site& a, const Site& b) { return (a - b).l1(); }

bool adjacent(const Site& a, const Site& b) { return l1_distance(a, b) == 1; }

std::vector<Site> neighbours(const Site& v) {
  std::vector<Site> out;
  out.reserve(2 * static_cast<std::size_t>(v.dim()));
  for (int i = 0; i < v.dim(); ++i) {
    Site a = v, b = v;
    a[i] -= 1;
    b[i] += 1;
    out.push_back(a);
    out.push_back(b);
  }
  return out;
}

SiteSet make_site_set(std::vector<Site> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

bool contains(const SiteSet& set, const Site& v) {
  return std::binary_search(set.begin(), set.end(), v);
}

Box::Box(Site center, int radius) : center_(center), radius_(radius) {
  check_dim(center.dim());
  if (radius < 0) throw std::invalid_argument("box radius must be non-negative");
}

Box Box::lambda(int dim, int radius) { return Box(Site(dim), radius); }

std::size_t Box::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim(); ++i) s *= static_cast<std::size_t>(width());
  return s;
}

bool Box::contains(const Site& v) const {
  if (v.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (std::abs(v[i] - center_[i]) > radius_) return false;
  return true;
}

bool Box::contains(const Box& other) const {
  if (other.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (other.center_[i] - other.radius_ < center_[i] - radius_) return false;
    if (other.center_[i] + other.radius_ > center_[i] + radius_) return false;
  }
  return true;
}

std::size_t Box::index_of(const Site& v) const {
  if (!contains(v)) throw std::invalid_argument("site " + v.to_string() + " outside box");
  std::size_t idx = 0;
  const auto w = static_cast<std::size_t>(width());
  for (int i = 0; i < dim(); ++i)
    idx = idx * w + static_cast<std::size_t>(v[i] - center_[i] + radius_);
  return idx;
}

Site Box::site_at(std::size_t index) const {
  Site v(dim());
  const auto w = static_cast<std::size_t>(width());
  for (int i = dim() - 1; i >= 0; --i) {
    v[i] = static_cast<int>(index % w) - radius_ + center_[i];
    index /= w;
  }
  return v;
}

std::vector<Site> Box::sites() const {
  std::vector<Site> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = site_at(k);
  return out;
}

bool is_lattice_path(std::span<const Site> vertices) {
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i].dim() != vertices[0].dim()) return false;
    if (l1_distance(vertices[i - 1], vertices[i]) > 1) return false;
  }
  return true;
}

LatticePath::LatticePath(std::vector<Site> vertices) : v_(std::move(vertices)) {
  if (!is_lattice_path(v_))
    throw std::invalid_argument("consecutive path vertices must be at L1 distance <= 1");
}

BoxAutomorphism BoxAutomorphism::identity(int dim) {
  check_dim(dim);
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  return BoxAutomorphism(perm, std::vector<int>(static_cast<std::size_t>(dim), 1));
}

BoxAutomorphism::BoxAutomorphism(std::vector<int> perm, std::vector<int> signs)
    : perm_(std::move(perm)), signs_(std::move(signs)) {
  if (perm_.size() != signs_.size()) throw std::invalid_argument("perm/sign size mismatch");
  std::vector<int> sorted = perm_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i)) throw std::invalid_argument("not a permutation");
  for (int s : signs_)
    if (s != 1 && s != -1) throw std::invalid_argument("signs must be +-1");
}

Site BoxAutomorphism::apply(const Site& v) const {
  if (v.dim() != dim()) throw std::invalid_argument("automorphism dimension mismatch");
  Site out(v.dim());
  for (int i = 0; i < dim(); ++i)
    out[perm_[static_cast<std::size_t>(i)]] = signs_[static_cast<std::size_t>(i)] * v[i];
  return out;
}

BoxAutomorphism BoxAutomorphism::compose(const BoxAutomorphism& other) const {
  // other sends e_i to s'_i e_{p'(i)}; this then sends it to s_{p'(i)} s'_i e_{p(p'(i))}.
  const auto d = perm_.size();
  std::vector<int> perm(d), signs(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto mid = static_cast<std::size_t>(other.perm_[i]);
    perm[i] = perm_[mid];
    signs[i] = signs_[mid] * other.signs_[i];
  }
  return BoxAutomorphism(perm, signs);
}

std::vector<BoxAutomorphism> enumerate_automorphisms(int dim) {
  check_dim(dim);
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<BoxAutomorphism> out;
  do {
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
      std::vector<int> signs(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i) signs[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? -1 : 1;
      out.emplace_back(perm, signs);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

BoxAutomorphism axis_swap(int dim, int a, int b) {
  auto id = BoxAutomorphism::identity(dim);
  std::vector<int> perm = id.perm();
  std::swap(perm.at(static_cast<std::size_t>(a)), perm.at(static_cast<std::size_t>(b)));
  return BoxAutomorphism(perm, id.signs());
}

BoxAutomorphism axis_reflection(int dim, int axis) {
  auto id = BoxAutomorphism::identity(dim);
  std::vector<int> signs = id.signs();
  signs.at(static_cast<std::size_t>(axis)) = -1;
  return BoxAutomorphism(id.perm(), signs);
}

SiteSet outer_boundary(const SiteSet& w) {
  std::vector<Site> out;
  for (const Site& v : w)
    for (const Site& u : neighbours(v))
      if (!contains(w, u)) out.push_back(u);
  return make_site_set(std::move(out));
}

SiteSet inner_boundary(const SiteSet& w) {
  SiteSet out;
  for (const Site& v : w) {
    const auto nb = neighbours(v);
    if (std::any_of(nb.begin(), nb.end(), [&](const Site& u) { return !contains(w, u); }))
      out.push_back(v);
  }
  return out;
}

bool is_connected(const SiteSet& w) {
  if (w.empty()) return true;
  std::vector<char> seen(w.size(), 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const Site v = w[queue.front()];
    queue.pop_front();
    for (const Site& u : neighbours(v)) {
      auto it = std::lower_bound(w.begin(), w.end(), u);
      if (it == w.end() || *it != u) continue;
      const auto k = static_cast<std::size_t>(it - w.begin());
      if (!seen[k]) {
        seen[k] = 1;
        ++reached;
        queue.push_back(k);
      }
    }
  }
  return reached == w.size();
}

LatticePath coordinatewise_abs(const LatticePath& path) {
  std::vector<Site> out;
  out.reserve(path.size());
  for (const Site& v : path.vertices()) {
    Site a = v;
    for (int i = 0; i < a.dim(); ++i) a[i] = std::abs(a[i]);
    out.push_back(a);
  }
  return LatticePath(std::move(out));
}

}  // namespace critperc
