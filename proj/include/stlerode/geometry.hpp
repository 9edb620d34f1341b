#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace stlerode {

using Vec2 = Eigen::Vector2d;

struct Disk {
  Vec2 center;
  double radius;  // >= 0
};
struct DiskComplement {
  Vec2 center;
  double radius;
};
// Set {p : a.dot(p) >= b}.
struct Halfspace {
  Vec2 a;
  double b;
};
// Strictly convex, counterclockwise vertex order.
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};
struct PolygonComplement {
  std::vector<Vec2> vertices;
};
// Set {p : (p-c)^T S^{-1} (p-c) <= r^2}, S symmetric positive definite.
struct Ellipse {
  Vec2 center;
  Eigen::Matrix2d S;
  double level;
};
// Over-erosion signal; contains nothing.
struct EmptyRegion {};

using RegionShape =
    std::variant<Disk, DiskComplement, Halfspace, ConvexPolygon, PolygonComplement, Ellipse, EmptyRegion>;

struct Region {
  RegionShape shape;
  std::vector<int> coords = {0, 1};  // state indices the region constrains
};

inline ConvexPolygon regular_polygon(const Vec2& center, double circumradius, int sides,
                                     double first_vertex_angle) {
  if (sides < 3) throw std::invalid_argument("polygon needs at least 3 sides");
  ConvexPolygon poly;
  poly.vertices.reserve(sides);
  for (int i = 0; i < sides; ++i) {
    double ang = first_vertex_angle + 2.0 * M_PI * i / sides;
    poly.vertices.push_back(center + circumradius * Vec2(std::cos(ang), std::sin(ang)));
  }
  return poly;
}

namespace detail {

inline double min_eigenvalue(const Eigen::Matrix2d& S) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(S).eigenvalues()[0];
}

inline double polygon_signed_distance(const std::vector<Vec2>& verts, const Vec2& p) {
  // Positive inside. Inside iff left of every CCW edge; distance is to the
  // nearest edge segment either way.
  const std::size_t n = verts.size();
  double min_edge_dist = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = verts[i];
    const Vec2& b = verts[(i + 1) % n];
    Vec2 ab = b - a;
    double cross = ab.x() * (p.y() - a.y()) - ab.y() * (p.x() - a.x());
    if (cross < 0) inside = false;
    double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    min_edge_dist = std::min(min_edge_dist, (p - (a + t * ab)).norm());
  }
  return inside ? min_edge_dist : -min_edge_dist;
}

}  // namespace detail

// Positive inside, negative outside, magnitude = Euclidean distance to the
// boundary. p is the already-sliced point in the region's own plane.
inline double signed_distance(const RegionShape& shape, const Vec2& p) {
  struct Visitor {
    const Vec2& p;
    double operator()(const Disk& d) const { return d.radius - (p - d.center).norm(); }
    double operator()(const DiskComplement& d) const { return (p - d.center).norm() - d.radius; }
    double operator()(const Halfspace& h) const { return (h.a.dot(p) - h.b) / h.a.norm(); }
    double operator()(const ConvexPolygon& poly) const {
      return detail::polygon_signed_distance(poly.vertices, p);
    }
    double operator()(const PolygonComplement& poly) const {
      return -detail::polygon_signed_distance(poly.vertices, p);
    }
    double operator()(const Ellipse& e) const {
      // Exact distance to an ellipse needs a root solve; a sound surrogate is
      // enough for margins: |grad| of the sqrt-level form is at most
      // 1/sqrt(lmin(S)), so |level gap| * sqrt(lmin) never exceeds the true
      // distance on either side. Sign is preserved, magnitude is conservative.
      double lmin = detail::min_eigenvalue(e.S);
      Vec2 d = p - e.center;
      double level = std::sqrt(d.dot(e.S.inverse() * d));
      return (e.level - level) * std::sqrt(lmin);
    }
    double operator()(const EmptyRegion&) const {
      return -std::numeric_limits<double>::infinity();
    }
  };
  return std::visit(Visitor{p}, shape);
}

inline bool region_contains(const RegionShape& shape, const Vec2& p) {
  if (std::holds_alternative<EmptyRegion>(shape)) return false;
  return signed_distance(shape, p) >= 0.0;  // closed sets: boundary is inside
}

inline Vec2 slice(const Eigen::VectorXd& state, const std::vector<int>& coords) {
  if (coords.size() != 2) throw std::invalid_argument("regions constrain exactly 2 coordinates");
  for (int c : coords) {
    if (c < 0 || c >= state.size()) throw std::out_of_range("region coordinate out of state range");
  }
  return Vec2(state[coords[0]], state[coords[1]]);
}

inline bool region_contains(const Region& r, const Eigen::VectorXd& state) {
  return region_contains(r.shape, slice(state, r.coords));
}

inline double signed_distance(const Region& r, const Eigen::VectorXd& state) {
  return signed_distance(r.shape, slice(state, r.coords));
}

namespace detail {

inline Vec2 outward_normal(const Vec2& a, const Vec2& b) {
  // CCW polygon: outward normal of edge a->b points right of the direction.
  Vec2 d = b - a;
  return Vec2(d.y(), -d.x()).normalized();
}

// Clip a convex CCW polygon by the halfplane {p : n.dot(p) <= c}.
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& verts, const Vec2& n, double c) {
  std::vector<Vec2> out;
  const std::size_t m = verts.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& cur = verts[i];
    const Vec2& nxt = verts[(i + 1) % m];
    double dc = n.dot(cur) - c, dn = n.dot(nxt) - c;
    if (dc <= 0) out.push_back(cur);
    if ((dc < 0 && dn > 0) || (dc > 0 && dn < 0)) {
      out.push_back(cur + (dc / (dc - dn)) * (nxt - cur));
    }
  }
  return out;
}

inline bool polygon_degenerate(const std::vector<Vec2>& verts) {
  if (verts.size() < 3) return true;
  double area2 = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Vec2& a = verts[i];
    const Vec2& b = verts[(i + 1) % verts.size()];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  return area2 <= 1e-12;
}

// Inward edge offset via successive halfplane clipping; empty when it
// annihilates the polygon.
inline std::vector<Vec2> polygon_inward_offset(const std::vector<Vec2>& verts, double rho) {
  std::vector<Vec2> cur = verts;
  const std::size_t n = verts.size();
  for (std::size_t i = 0; i < n && !cur.empty(); ++i) {
    Vec2 nrm = outward_normal(verts[i], verts[(i + 1) % n]);
    cur = clip_halfplane(cur, nrm, nrm.dot(verts[i]) - rho);
  }
  if (polygon_degenerate(cur)) return {};
  return cur;
}

// Sharp-corner (miter) outward offset: intersect consecutive outward-shifted
// edge lines. Contains the rounded Minkowski dilation, so complements of the
// result are sound erosions of polygon complements.
inline std::vector<Vec2> polygon_outward_offset(const std::vector<Vec2>& verts, double rho) {
  const std::size_t n = verts.size();
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = verts[(i + n - 1) % n];
    const Vec2& cur = verts[i];
    const Vec2& nxt = verts[(i + 1) % n];
    Vec2 n1 = outward_normal(prev, cur);
    Vec2 n2 = outward_normal(cur, nxt);
    // Solve n1.p = n1.cur + rho, n2.p = n2.cur + rho.
    Eigen::Matrix2d M;
    M.row(0) = n1.transpose();
    M.row(1) = n2.transpose();
    Eigen::Vector2d rhs(n1.dot(cur) + rho, n2.dot(cur) + rho);
    double det = M.determinant();
    if (std::abs(det) < 1e-14) {
      out[i] = cur + rho * n1;  // collinear edges: plain shift
    } else {
      out[i] = M.inverse() * rhs;
    }
  }
  return out;
}

}  // namespace detail

// Erode the region by a planar ball of radius rho: result is a subset of
// R chipped inward by rho everywhere (Minkowski difference, closed-form per
// shape). EmptyRegion signals over-erosion.
inline RegionShape erode_shape(const RegionShape& shape, double rho) {
  if (rho < 0) throw std::invalid_argument("erosion radius must be nonnegative");
  struct Visitor {
    double rho;
    RegionShape operator()(const Disk& d) const {
      if (d.radius - rho < 0) return EmptyRegion{};
      return Disk{d.center, d.radius - rho};
    }
    RegionShape operator()(const DiskComplement& d) const {
      return DiskComplement{d.center, d.radius + rho};
    }
    RegionShape operator()(const Halfspace& h) const {
      return Halfspace{h.a, h.b + rho * h.a.norm()};
    }
    RegionShape operator()(const ConvexPolygon& poly) const {
      auto v = detail::polygon_inward_offset(poly.vertices, rho);
      if (v.empty()) return EmptyRegion{};
      return ConvexPolygon{std::move(v)};
    }
    RegionShape operator()(const PolygonComplement& poly) const {
      return PolygonComplement{detail::polygon_outward_offset(poly.vertices, rho)};
    }
    RegionShape operator()(const Ellipse& e) const {
      // Level-set retreat by rho / |grad|_max; conservative subset.
      double shrink = rho / std::sqrt(detail::min_eigenvalue(e.S));
      if (e.level - shrink < 0) return EmptyRegion{};
      return Ellipse{e.center, e.S, e.level - shrink};
    }
    RegionShape operator()(const EmptyRegion& e) const { return e; }
  };
  return std::visit(Visitor{rho}, shape);
}

// Dilate by a planar ball of radius rho: result contains R expanded by rho
// (superset of the exact Minkowski sum where closed forms are inexact).
// Needed to erode complement regions: erode(~R) = ~dilate(R). A complement
// that fills the whole plane makes the negated predicate empty; that case is
// signaled by the caller via shrinking complements below.
inline RegionShape dilate_shape(const RegionShape& shape, double rho) {
  if (rho < 0) throw std::invalid_argument("dilation radius must be nonnegative");
  struct Visitor {
    double rho;
    RegionShape operator()(const Disk& d) const { return Disk{d.center, d.radius + rho}; }
    RegionShape operator()(const DiskComplement& d) const {
      // Dilated complement eats into the disk; an eaten-away disk means the
      // dilation covers the whole plane.
      if (d.radius - rho <= 0) return EmptyRegion{};  // marker: complement is everything
      return DiskComplement{d.center, d.radius - rho};
    }
    RegionShape operator()(const Halfspace& h) const {
      return Halfspace{h.a, h.b - rho * h.a.norm()};
    }
    RegionShape operator()(const ConvexPolygon& poly) const {
      return ConvexPolygon{detail::polygon_outward_offset(poly.vertices, rho)};
    }
    RegionShape operator()(const PolygonComplement& poly) const {
      auto v = detail::polygon_inward_offset(poly.vertices, rho);
      if (v.empty()) return EmptyRegion{};  // marker: complement is everything
      return PolygonComplement{std::move(v)};
    }
    RegionShape operator()(const Ellipse& e) const {
      double grow = rho / std::sqrt(detail::min_eigenvalue(e.S));
      return Ellipse{e.center, e.S, e.level + grow};
    }
    RegionShape operator()(const EmptyRegion& e) const { return e; }
  };
  return std::visit(Visitor{rho}, shape);
}

// Erosion for a predicate with a possible negated flag. The negated flag means
// "complement of shape", so erosion dilates the underlying shape. Returns the
// new shape plus whether the eroded set is empty.
struct ErodedShape {
  RegionShape shape;
  bool empty;
};

inline ErodedShape erode_predicate_shape(const RegionShape& shape, bool negated, double rho) {
  if (!negated) {
    RegionShape s = erode_shape(shape, rho);
    return {s, std::holds_alternative<EmptyRegion>(s)};
  }
  if (std::holds_alternative<EmptyRegion>(shape)) {
    // Complement of empty is everything; eroding everything changes nothing.
    return {shape, false};
  }
  RegionShape s = dilate_shape(shape, rho);
  if (std::holds_alternative<EmptyRegion>(s)) {
    // Dilation swallowed the plane, so the complement's erosion is empty.
    return {EmptyRegion{}, true};
  }
  return {s, false};
}

// Deviation set: origin-centered ball in the weighted norm, {e : ||e||_P <= r}.
struct DeviationSet {
  Eigen::MatrixXd P;  // positive definite weight
  double level;       // radius in ||.||_P
};

// Exact shadow of {e : ||e||_P <= r} on the given coordinates:
// {y : y^T S^{-1} y <= r^2} with S the coords-submatrix of P^{-1}.
inline Ellipse project_ellipsoid(const Eigen::MatrixXd& P, double r, const std::vector<int>& coords) {
  if (coords.size() != 2) throw std::invalid_argument("projection targets exactly 2 coordinates");
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("weight matrix must be positive definite");
  }
  Eigen::MatrixXd Pinv = P.inverse();
  Eigen::Matrix2d S;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) S(i, j) = Pinv(coords[i], coords[j]);
  }
  return Ellipse{Vec2::Zero(), S, r};
}

// Radius of the smallest origin-centered disk containing the ellipse:
// r * sqrt(lambda_max(S)).
inline double enclosing_disk(const Ellipse& e) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(e.S);
  return e.level * std::sqrt(es.eigenvalues()[1]);
}

// Effective planar erosion radius of a deviation set on given coordinates.
inline double planar_radius(const DeviationSet& dev, const std::vector<int>& coords) {
  return enclosing_disk(project_ellipsoid(dev.P, dev.level, coords));
}

inline std::string shape_name(const RegionShape& shape) {
  struct Visitor {
    std::string operator()(const Disk&) const { return "disk"; }
    std::string operator()(const DiskComplement&) const { return "disk_complement"; }
    std::string operator()(const Halfspace&) const { return "halfspace"; }
    std::string operator()(const ConvexPolygon&) const { return "polygon"; }
    std::string operator()(const PolygonComplement&) const { return "polygon_complement"; }
    std::string operator()(const Ellipse&) const { return "ellipse"; }
    std::string operator()(const EmptyRegion&) const { return "empty"; }
  };
  return std::visit(Visitor{}, shape);
}

}  // namespace stlerode
