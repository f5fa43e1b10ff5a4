#pragma once

// Lattice geometry on Z^d: sites, finite site sets, boxes, vertex and bond
// boundaries, connected components and the annulus sets that separate a site
// from the far region of a domain.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <compare>
#include <functional>
#include <initializer_list>
#include <istream>
#include <iterator>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "alloy/error.hpp"

namespace alloy {

inline constexpr int kMaxDim = 4;

/// A point of Z^d. Coordinates beyond dim() are kept at zero so that the
/// defaulted ordering is lexicographic within a fixed dimension.
class Site {
 public:
  Site() = default;

  explicit Site(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw GeometryError("site dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }

  Site(std::initializer_list<int> coords) : Site(static_cast<int>(coords.size())) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  static Site from(const std::vector<int>& coords) {
    Site s(static_cast<int>(coords.size()));
    std::copy(coords.begin(), coords.end(), s.c_.begin());
    return s;
  }

  int dim() const noexcept { return dim_; }
  int operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

  Site operator+(const Site& o) const noexcept {
    Site r = *this;
    for (int i = 0; i < dim_; ++i) r[i] += o[i];
    return r;
  }
  Site operator-(const Site& o) const noexcept {
    Site r = *this;
    for (int i = 0; i < dim_; ++i) r[i] -= o[i];
    return r;
  }
  Site operator-() const noexcept {
    Site r = *this;
    for (int i = 0; i < dim_; ++i) r[i] = -r[i];
    return r;
  }

  auto operator<=>(const Site&) const = default;

 private:
  int dim_ = 1;
  std::array<int, kMaxDim> c_{};
};

inline int norm1(const Site& s) {
  int r = 0;
  for (int i = 0; i < s.dim(); ++i) r += std::abs(s[i]);
  return r;
}

inline int norm_inf(const Site& s) {
  int r = 0;
  for (int i = 0; i < s.dim(); ++i) r = std::max(r, std::abs(s[i]));
  return r;
}

inline int dist1(const Site& a, const Site& b) { return norm1(a - b); }
inline int dist_inf(const Site& a, const Site& b) { return norm_inf(a - b); }

/// The 2d nearest neighbours of s, ordered -e_1, +e_1, -e_2, ...
inline std::vector<Site> neighbors(const Site& s) {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(2 * s.dim()));
  for (int i = 0; i < s.dim(); ++i) {
    Site m = s, p = s;
    m[i] -= 1;
    p[i] += 1;
    out.push_back(m);
    out.push_back(p);
  }
  return out;
}

inline std::string to_string(const Site& s) {
  std::string r = "(";
  for (int i = 0; i < s.dim(); ++i) {
    if (i) r += ",";
    r += std::to_string(s[i]);
  }
  return r + ")";
}

/// Finite set of lattice sites, stored sorted and duplicate-free. The position
/// of a site in the sorted order is its row/column index in every operator
/// assembled over the set.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(int dim) : dim_(dim) {}

  SiteSet(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {
    for (const auto& s : sites_)
      if (s.dim() != dim_) throw GeometryError("site " + to_string(s) + " has wrong dimension");
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  }

  SiteSet(int dim, std::initializer_list<Site> sites) : SiteSet(dim, std::vector<Site>(sites)) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  auto begin() const noexcept { return sites_.begin(); }
  auto end() const noexcept { return sites_.end(); }
  const std::vector<Site>& sites() const noexcept { return sites_; }

  bool contains(const Site& s) const { return std::binary_search(sites_.begin(), sites_.end(), s); }

  std::optional<std::size_t> index_of(const Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it == sites_.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - sites_.begin());
  }

  std::size_t index(const Site& s) const {
    auto i = index_of(s);
    if (!i) throw GeometryError("site " + to_string(s) + " is not in the set");
    return *i;
  }

  SiteSet translated(const Site& by) const {
    std::vector<Site> v;
    v.reserve(sites_.size());
    for (const auto& s : sites_) v.push_back(s + by);
    return SiteSet(dim_, std::move(v));
  }

  SiteSet unite(const SiteSet& o) const {
    std::vector<Site> v;
    std::set_union(begin(), end(), o.begin(), o.end(), std::back_inserter(v));
    return from_sorted(std::move(v));
  }
  SiteSet intersect(const SiteSet& o) const {
    std::vector<Site> v;
    std::set_intersection(begin(), end(), o.begin(), o.end(), std::back_inserter(v));
    return from_sorted(std::move(v));
  }
  SiteSet minus(const SiteSet& o) const {
    std::vector<Site> v;
    std::set_difference(begin(), end(), o.begin(), o.end(), std::back_inserter(v));
    return from_sorted(std::move(v));
  }
  bool includes(const SiteSet& o) const { return std::includes(begin(), end(), o.begin(), o.end()); }

  template <class Pred>
  SiteSet filter(Pred&& keep) const {
    std::vector<Site> v;
    for (const auto& s : sites_)
      if (keep(s)) v.push_back(s);
    return from_sorted(std::move(v));
  }

  bool operator==(const SiteSet& o) const { return sites_ == o.sites_; }

 private:
  SiteSet from_sorted(std::vector<Site> v) const {
    SiteSet r(dim_);
    r.sites_ = std::move(v);
    return r;
  }

  int dim_ = 1;
  std::vector<Site> sites_;
};

/// The set Gamma in which a construction lives: either all of Z^d, a finite
/// set, or an arbitrary membership predicate (e.g. a half-space).
class Ambient {
 public:
  static Ambient whole(int dim) { return Ambient(dim, [](const Site&) { return true; }, std::nullopt); }

  static Ambient of(SiteSet set) {
    int d = set.dim();
    auto shared = std::make_shared<SiteSet>(std::move(set));
    return Ambient(d, [shared](const Site& s) { return shared->contains(s); }, *shared);
  }

  /// {k : k[axis] >= lower}
  static Ambient half_space(int dim, int axis, int lower) {
    return Ambient(dim, [axis, lower](const Site& s) { return s[axis] >= lower; }, std::nullopt);
  }

  static Ambient predicate(int dim, std::function<bool(const Site&)> pred) {
    return Ambient(dim, std::move(pred), std::nullopt);
  }

  int dim() const noexcept { return dim_; }
  bool contains(const Site& s) const { return pred_(s); }
  bool is_finite() const noexcept { return finite_.has_value(); }
  const SiteSet& finite_set() const {
    if (!finite_) throw GeometryError("ambient set is infinite");
    return *finite_;
  }

 private:
  Ambient(int dim, std::function<bool(const Site&)> pred, std::optional<SiteSet> finite)
      : dim_(dim), pred_(std::move(pred)), finite_(std::move(finite)) {}

  int dim_;
  std::function<bool(const Site&)> pred_;
  std::optional<SiteSet> finite_;
};

struct Bond {
  Site inner;
  Site outer;
  bool operator==(const Bond&) const = default;
};

struct Boundaries {
  SiteSet interior;        // sites of L with fewer than 2d neighbours in L
  SiteSet exterior;        // sites of ambient \ L adjacent to L
  std::vector<Bond> bonds; // (u, u') with u in L, u' in ambient \ L, |u-u'|_1 = 1
};

inline SiteSet interior_boundary(const SiteSet& set) {
  return set.filter([&](const Site& s) {
    for (const auto& n : neighbors(s))
      if (!set.contains(n)) return true;
    return false;
  });
}

inline Boundaries boundaries(const SiteSet& set, const Ambient& ambient) {
  Boundaries b{SiteSet(set.dim()), SiteSet(set.dim()), {}};
  std::vector<Site> ext;
  std::vector<Site> inner;
  for (const auto& s : set) {
    bool on_boundary = false;
    for (const auto& n : neighbors(s)) {
      if (set.contains(n)) continue;
      on_boundary = true;
      if (ambient.contains(n)) {
        ext.push_back(n);
        b.bonds.push_back({s, n});
      }
    }
    if (on_boundary) inner.push_back(s);
  }
  b.interior = SiteSet(set.dim(), std::move(inner));
  b.exterior = SiteSet(set.dim(), std::move(ext));
  return b;
}

inline Boundaries boundaries(const SiteSet& set) { return boundaries(set, Ambient::whole(set.dim())); }

/// Lambda^+ = Lambda united with its exterior boundary inside the ambient set.
inline SiteSet fattened(const SiteSet& set, const Ambient& ambient) {
  return set.unite(boundaries(set, ambient).exterior);
}

/// The cube {k : |x - k|_inf <= L} of side 2L+1.
inline SiteSet box(int L, const Site& x) {
  if (L < 0) throw GeometryError("box half-width must be non-negative");
  const int d = x.dim();
  std::vector<Site> out;
  Site offset(d);
  for (int i = 0; i < d; ++i) offset[i] = -L;
  while (true) {
    out.push_back(x + offset);
    int i = d - 1;
    while (i >= 0 && offset[i] == L) {
      offset[i] = -L;
      --i;
    }
    if (i < 0) break;
    ++offset[i];
  }
  return SiteSet(d, std::move(out));
}

inline SiteSet box(int L, int dim) { return box(L, Site(dim)); }

struct Diameters {
  int diam_inf = 0;
  int diam_l1 = 0;
};

/// Exact sup- and l1-diameters. The l1 diameter is the largest spread of
/// sum_i sigma_i x_i over all sign patterns sigma.
inline Diameters metrics(const SiteSet& set) {
  if (set.empty()) throw GeometryError("diameter of an empty set is undefined");
  const int d = set.dim();
  Diameters r;
  for (int i = 0; i < d; ++i) {
    int lo = set[0][i], hi = lo;
    for (const auto& s : set) {
      lo = std::min(lo, s[i]);
      hi = std::max(hi, s[i]);
    }
    r.diam_inf = std::max(r.diam_inf, hi - lo);
  }
  for (int mask = 0; mask < (1 << d); ++mask) {
    int lo = 0, hi = 0;
    bool first = true;
    for (const auto& s : set) {
      int v = 0;
      for (int i = 0; i < d; ++i) v += (mask >> i & 1) ? -s[i] : s[i];
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    r.diam_l1 = std::max(r.diam_l1, hi - lo);
  }
  return r;
}

/// Partition of a finite set into maximal nearest-neighbour connected pieces,
/// listed in order of their smallest site.
inline std::vector<SiteSet> components(const SiteSet& set) {
  std::vector<int> label(set.size(), -1);
  std::vector<std::vector<Site>> parts;
  for (std::size_t start = 0; start < set.size(); ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(parts.size());
    parts.emplace_back();
    std::queue<std::size_t> q;
    q.push(start);
    label[start] = id;
    while (!q.empty()) {
      auto i = q.front();
      q.pop();
      parts.back().push_back(set[i]);
      for (const auto& n : neighbors(set[i])) {
        auto j = set.index_of(n);
        if (j && label[*j] < 0) {
          label[*j] = id;
          q.push(*j);
        }
      }
    }
  }
  std::vector<SiteSet> out;
  out.reserve(parts.size());
  for (auto& p : parts) out.emplace_back(set.dim(), std::move(p));
  return out;
}

inline SiteSet component_of(const SiteSet& set, const Site& site) {
  if (!set.contains(site)) throw GeometryError("component_of: site " + to_string(site) + " is not in the set");
  std::vector<Site> out;
  std::vector<char> seen(set.size(), 0);
  std::queue<std::size_t> q;
  auto s0 = set.index(site);
  seen[s0] = 1;
  q.push(s0);
  while (!q.empty()) {
    auto i = q.front();
    q.pop();
    out.push_back(set[i]);
    for (const auto& n : neighbors(set[i])) {
      auto j = set.index_of(n);
      if (j && !seen[*j]) {
        seen[*j] = 1;
        q.push(*j);
      }
    }
  }
  return SiteSet(set.dim(), std::move(out));
}

/// Sets around x built from translates of the support Theta along the sphere
/// of the box of half-width L. Deleting hat_w separates x from everything
/// outside lambda.
struct AnnulusGeometry {
  int L = 0;
  Site x;
  SiteSet sphere;      // B_x, interior boundary of the box around x (not clipped)
  SiteSet hat_w;       // union of Theta_b over b in B_x, clipped to Gamma
  SiteSet w;           // hat_w^+ clipped to Gamma
  SiteSet hat_lambda;  // union of Theta_b over b in the box, clipped to Gamma
  SiteSet lambda;      // hat_lambda^+ clipped to Gamma
  SiteSet inner;       // component of x in Gamma \ hat_w
};

inline AnnulusGeometry annulus_geometry(const Ambient& gamma, const SiteSet& theta, const Site& x, int L) {
  if (theta.empty() || !theta.contains(Site(theta.dim())))
    throw GeometryError("annulus_geometry: support must contain the origin");
  const int diam = metrics(theta).diam_inf;
  if (L < diam + 2)
    throw GeometryError("annulus_geometry: L = " + std::to_string(L) + " is below diam(Theta) + 2 = " +
                        std::to_string(diam + 2));
  const int d = x.dim();
  AnnulusGeometry g;
  g.L = L;
  g.x = x;
  const SiteSet cube = box(L, x);
  g.sphere = interior_boundary(cube);

  auto translates = [&](const SiteSet& anchors) {
    std::vector<Site> v;
    for (const auto& b : anchors)
      for (const auto& t : theta) {
        Site k = b + t;
        if (gamma.contains(k)) v.push_back(k);
      }
    return SiteSet(d, std::move(v));
  };
  g.hat_w = translates(g.sphere);
  g.w = fattened(g.hat_w, gamma);
  g.hat_lambda = translates(cube);
  g.lambda = fattened(g.hat_lambda, gamma);

  if (!gamma.contains(x)) throw GeometryError("annulus_geometry: x is not in Gamma");

  // Flood fill from x inside Gamma \ hat_w. Escaping lambda means hat_w does
  // not separate x from the far region.
  std::vector<Site> inner;
  std::vector<Site> stack{x};
  std::set<Site> seen{x};
  while (!stack.empty()) {
    Site s = stack.back();
    stack.pop_back();
    inner.push_back(s);
    for (const auto& n : neighbors(s)) {
      if (!gamma.contains(n) || g.hat_w.contains(n) || seen.count(n)) continue;
      if (!g.lambda.contains(n))
        throw GeometryError("annulus_geometry: removing hat W_x does not disconnect x from " + to_string(n));
      seen.insert(n);
      stack.push_back(n);
    }
  }
  g.inner = SiteSet(d, std::move(inner));
  return g;
}

/// Text format: first line is the dimension d, then one site per line with d
/// space-separated integers.
inline void write_sites(std::ostream& os, const SiteSet& set) {
  os << set.dim() << '\n';
  for (const auto& s : set) {
    for (int i = 0; i < s.dim(); ++i) os << (i ? " " : "") << s[i];
    os << '\n';
  }
}

inline SiteSet read_sites(std::istream& is) {
  int d = 0;
  if (!(is >> d) || d < 1 || d > kMaxDim) throw GeometryError("read_sites: bad dimension header");
  std::vector<Site> v;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Site s(d);
    for (int i = 0; i < d; ++i)
      if (!(ls >> s[i])) throw GeometryError("read_sites: malformed line '" + line + "'");
    v.push_back(s);
  }
  return SiteSet(d, std::move(v));
}

}  // namespace alloy
