#include "critperc/curve_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "critperc/errors.hpp"

namespace critperc {

Point::Point(std::initializer_list<double> xs) : dim(static_cast<int>(xs.size())) {
  if (xs.size() == 0 || xs.size() > kMaxDim) throw std::invalid_argument("point dimension out of range");
  std::copy(xs.begin(), xs.end(), c.begin());
}

Point Point::from_site(const Site& v) {
  Point p(v.dim());
  for (int i = 0; i < v.dim(); ++i) p[i] = v[i];
  return p;
}

double Point::l1() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += std::abs(c[static_cast<std::size_t>(i)]);
  return s;
}

double Point::linf() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s = std::max(s, std::abs(c[static_cast<std::size_t>(i)]));
  return s;
}

std::string Point::to_string() const {
  std::string out = "(";
  char buf[32];
  for (int i = 0; i < dim; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", c[static_cast<std::size_t>(i)]);
    if (i) out += ",";
    out += buf;
  }
  return out + ")";
}

Point operator-(const Point& a, const Point& b) {
  if (a.dim != b.dim) throw std::invalid_argument("dimension mismatch");
  Point r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
  return r;
}

Curve::Curve(const LatticePath& path) {
  if (path.empty()) throw std::invalid_argument("curve needs at least one vertex");
  vertices_ = path.vertices();
  if (vertices_.size() == 1) vertices_.push_back(vertices_.front());
  for (std::size_t k = 1; k < vertices_.size(); ++k)
    for (int i = 0; i < dim(); ++i)
      if (vertices_[k][i] != vertices_[k - 1][i]) moves_[static_cast<std::size_t>(i)] = true;
}

double Curve::eval(double t, int i) const {
  const int k = steps();
  const double u = t * k;
  const int seg = std::clamp(static_cast<int>(u), 0, k - 1);
  const double frac = u - seg;
  const double a = vertices_[static_cast<std::size_t>(seg)][i];
  const double b = vertices_[static_cast<std::size_t>(seg) + 1][i];
  return a + frac * (b - a);
}

Point Curve::eval(double t) const {
  Point p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = eval(t, i);
  return p;
}

int Curve::nearest_breakpoint(double t) const {
  const int k = steps();
  return std::clamp(static_cast<int>(std::ceil(t * k - 0.5)), 0, k);
}

double h_with_signs(std::span<const double> x, std::span<int> signs) {
  if (x.empty() || signs.size() < x.size()) throw std::invalid_argument("h needs at least one entry");
  double h = std::abs(x[0]);
  signs[0] = x[0] >= 0.0 ? 1 : -1;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double diff = h - x[k];
    if (diff < 0.0) {
      for (std::size_t j = 0; j < k; ++j) signs[j] = -signs[j];
      signs[k] = 1;
      h = -diff;
    } else {
      signs[k] = -1;
      h = diff;
    }
  }
  return h;
}

HResult h_with_signs(std::span<const double> x) {
  HResult r;
  r.signs.resize(x.size());
  r.value = h_with_signs(x, std::span<int>(r.signs));
  return r;
}

GMap::GMap(std::vector<Curve> curves, int n) : curves_(std::move(curves)), n_(n) {
  const int d = dim();
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("need between 1 and 6 curves");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  for (int j = 0; j < d; ++j) {
    const Curve& c = curves_[static_cast<std::size_t>(j)];
    const std::string tag = "curve " + std::to_string(j) + ": ";
    if (c.dim() != d) throw std::invalid_argument(tag + "dimension mismatch");
    if (c.vertices().front()[j] != -n || c.vertices().back()[j] != n)
      throw std::invalid_argument(tag + "must run from coordinate -n to +n on its own axis");
    for (const Site& v : c.vertices())
      for (int i = 0; i < d; ++i) {
        const bool ok = i == j ? (v[i] >= -n && v[i] <= n) : (v[i] >= 0 && v[i] <= n);
        if (!ok) throw std::invalid_argument(tag + "vertex " + v.to_string() + " out of range");
      }
    for (int i = 0; i < d; ++i) lip_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c.moves_along(i) ? c.steps() : 0.0;
  }
}

GEval GMap::eval(const Point& t) const {
  const int d = dim();
  if (t.dim != d) throw std::invalid_argument("t has the wrong dimension");
  for (int j = 0; j < d; ++j)
    if (!(t[j] >= 0.0 && t[j] <= 1.0)) throw std::invalid_argument("t must lie in [0,1]^d");
  GEval ev;
  ev.t = t;
  ev.value = Point(d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) ev.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = curves_[static_cast<std::size_t>(j)].eval(t[j], i);

  std::array<double, kMaxDim> row{};
  std::array<int, kMaxDim> sg{};
  for (int i = 0; i < d; ++i) {
    const auto& Ci = ev.C[static_cast<std::size_t>(i)];
    auto& ai = ev.a[static_cast<std::size_t>(i)];
    ai[static_cast<std::size_t>(i)] = 1;
    double h = 0.0;
    if (d > 1) {
      int m = 0;
      for (int j = 0; j < d; ++j)
        if (j != i) row[static_cast<std::size_t>(m++)] = Ci[static_cast<std::size_t>(j)];
      h = h_with_signs(std::span<const double>(row.data(), static_cast<std::size_t>(m)),
                       std::span<int>(sg.data(), static_cast<std::size_t>(m)));
      m = 0;
      for (int j = 0; j < d; ++j)
        if (j != i) ai[static_cast<std::size_t>(j)] = sg[static_cast<std::size_t>(m++)];
    }
    ev.value[i] = Ci[static_cast<std::size_t>(i)] + h;
  }
  return ev;
}

Point GMap::value(const Point& t) const { return eval(t).value; }

Point GMap::signed_column_sum(const GEval& ev) const {
  const int d = dim();
  Point s(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      s[i] += ev.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * ev.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return s;
}

double GMap::lipschitz_l1() const {
  double s = 0.0;
  for (const Curve& c : curves_) s += c.steps();
  return s;
}

Decomposition GMap::decompose(const Point& t) const {
  const int d = dim();
  const GEval ev = eval(t);
  Decomposition dec;
  dec.t = t;
  dec.x = ev.value;
  dec.s = Point(d);
  Site sum(d);
  for (int j = 0; j < d; ++j) {
    const Curve& c = curves_[static_cast<std::size_t>(j)];
    const int b = c.nearest_breakpoint(t[j]);
    dec.breakpoints.push_back(b);
    dec.s[j] = static_cast<double>(b) / c.steps();
    const Site& v = c.breakpoint(b);
    Site z(d);
    for (int i = 0; i < d; ++i) z[i] = ev.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * v[i];
    dec.z.push_back(z);
    sum = sum + z;
    dec.partial_sums.push_back(sum);
  }
  dec.residual = dec.x - Point::from_site(sum);

  const int reach = 2 * n_ + (d + 1) / 2;
  for (const Site& ps : dec.partial_sums)
    if (ps.linf() > reach)
      throw InternalInconsistency("partial sum " + ps.to_string() + " leaves Λ(" + std::to_string(reach) + ")");
  if (dec.residual.l1() > 0.5 * d + 1e-9)
    throw InternalInconsistency("decomposition residual " + dec.residual.to_string() + " exceeds d/2");
  return dec;
}

std::vector<Curve> straight_axis_curves(int d, int n) {
  std::vector<Curve> out;
  for (int j = 0; j < d; ++j) {
    std::vector<Site> vs;
    for (int k = -n; k <= n; ++k) {
      Site v(d);
      v[j] = k;
      vs.push_back(v);
    }
    out.emplace_back(LatticePath(std::move(vs)));
  }
  return out;
}

std::vector<Curve> build_curves(const GoodPath& path, int n) {
  const LatticePath doubled = reflect_double(path.path, path.face, n);
  const int d = doubled.front().dim();
  std::vector<Curve> out;
  for (int j = 0; j < d; ++j) out.emplace_back(rotate_to_axis(doubled, path.face, j));
  return out;
}

}  // namespace critperc
