#include <algorithm>
#include <array>
#include <stdexcept>
#include <unordered_map>

#include "critperc/percolation.hpp"
#include "critperc/rng.hpp"

namespace critperc {

namespace {

// Frontier state of the sweep: the label of the most recently processed cell
// in every column (0 = closed), plus the labels of the components holding
// the two endpoints (0 = endpoint not reached yet). Labels are canonical:
// numbered 1, 2, ... in order of first appearance along the frontier.
struct Frontier {
  std::array<std::uint8_t, kMaxPlanarWidth> cell{};
  std::uint8_t src = 0;
  std::uint8_t dst = 0;
};

using Key = unsigned __int128;

struct KeyHash {
  std::size_t operator()(Key k) const noexcept {
    return static_cast<std::size_t>(splitmix64(static_cast<std::uint64_t>(k) ^ splitmix64(static_cast<std::uint64_t>(k >> 64))));
  }
};

Key encode(const Frontier& f, int width) {
  Key k = 0;
  for (int c = 0; c < width; ++c) k = (k << 4) | f.cell[static_cast<std::size_t>(c)];
  k = (k << 4) | f.src;
  k = (k << 4) | f.dst;
  return k;
}

Frontier decode(Key k, int width) {
  Frontier f;
  f.dst = static_cast<std::uint8_t>(k & 0xF);
  k >>= 4;
  f.src = static_cast<std::uint8_t>(k & 0xF);
  k >>= 4;
  for (int c = width - 1; c >= 0; --c) {
    f.cell[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(k & 0xF);
    k >>= 4;
  }
  return f;
}

void canonicalize(Frontier& f, int width) {
  std::array<std::uint8_t, 2 * kMaxPlanarWidth> remap{};
  std::uint8_t next = 1;
  for (int c = 0; c < width; ++c) {
    auto& v = f.cell[static_cast<std::size_t>(c)];
    if (!v) continue;
    if (!remap[v]) remap[v] = next++;
    v = remap[v];
  }
  f.src = f.src ? remap[f.src] : 0;
  f.dst = f.dst ? remap[f.dst] : 0;
}

bool present(const Frontier& f, int width, std::uint8_t label) {
  for (int c = 0; c < width; ++c)
    if (f.cell[static_cast<std::size_t>(c)] == label) return true;
  return false;
}

}  // namespace

double exact_connection_planar(double p, const Box& box, const Site& x, const Site& y) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (box.dim() != 2) throw std::invalid_argument("planar transfer sweep requires d = 2");
  if (box.width() > kMaxPlanarWidth)
    throw std::invalid_argument("planar transfer sweep limited to width " + std::to_string(kMaxPlanarWidth));
  if (!box.contains(x) || !box.contains(y)) throw std::invalid_argument("endpoint outside box");
  if (x == y) return p;

  const int width = box.width();
  const std::size_t src = box.index_of(x), dst = box.index_of(y);
  const double q = 1.0 - p;

  std::unordered_map<Key, double, KeyHash> cur, next;
  cur.emplace(encode(Frontier{}, width), 1.0);
  double success = 0.0;

  for (std::size_t idx = 0; idx < box.size(); ++idx) {
    const int c = static_cast<int>(idx % static_cast<std::size_t>(width));
    const auto cu = static_cast<std::size_t>(c);
    next.clear();
    next.reserve(cur.size() * 2);
    for (const auto& [key, prob] : cur) {
      const Frontier f = decode(key, width);
      const std::uint8_t up = f.cell[cu];
      const std::uint8_t left = c > 0 ? f.cell[cu - 1] : 0;

      if (q > 0.0 && idx != src && idx != dst) {
        Frontier g = f;
        g.cell[cu] = 0;
        const bool lost = up && !present(g, width, up);
        if (!(lost && (up == f.src || up == f.dst))) {
          canonicalize(g, width);
          next[encode(g, width)] += prob * q;
        }
      }

      if (p > 0.0) {
        Frontier g = f;
        std::uint8_t label;
        if (up && left) {
          label = up;
          if (left != up) {
            for (int k = 0; k < width; ++k)
              if (g.cell[static_cast<std::size_t>(k)] == left) g.cell[static_cast<std::size_t>(k)] = up;
            if (g.src == left) g.src = up;
            if (g.dst == left) g.dst = up;
          }
        } else if (up || left) {
          label = up ? up : left;
        } else {
          label = static_cast<std::uint8_t>(2 * kMaxPlanarWidth - 1);  // fresh; canonicalize renumbers it
        }
        g.cell[cu] = label;
        if (idx == src) g.src = label;
        if (idx == dst) g.dst = label;
        if (g.src && g.src == g.dst) {
          success += prob * p;
          continue;
        }
        canonicalize(g, width);
        next[encode(g, width)] += prob * p;
      }
    }
    cur.swap(next);
  }
  return success;
}

BoxedExact exact_connection_lower(double p, const Box& box, const Site& x, const Site& y, int max_planar_radius) {
  if (box.size() <= kMaxExactSites) return {exact_connection(p, box, x, y), box, true};
  if (box.dim() != 2)
    throw std::invalid_argument("no exact oracle for a " + std::to_string(box.size()) + "-site box in d = " +
                                std::to_string(box.dim()));
  const int r = std::min({box.radius(), max_planar_radius, (kMaxPlanarWidth - 1) / 2});
  const Box sub(box.center(), r);
  if (!sub.contains(x) || !sub.contains(y))
    throw std::invalid_argument("endpoints do not fit in the largest tractable sub-box");
  return {exact_connection_planar(p, sub, x, y), sub, r == box.radius()};
}

}  // namespace critperc
