#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sclab/eigen_support.hpp"
#include "sclab/real.hpp"

namespace sclab {

// Projective plane over an exact scalar field. Points and lines are
// homogeneous 3-vectors, conics symmetric 3x3 matrices acting as quadratic
// forms. Everything is stored in canonical form: scaled so the first
// coordinate (row-major for conics) with nonzero *value* equals 1. With that,
// projective equality is plain coefficient-wise value equality.
//
// The scalar is a template parameter: Real for the full lab, Rat for purely
// rational subplanes. Operations that take square roots exist only for Real
// and live in geometry.cpp.

template <class S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S>
using Mat3 = Eigen::Matrix<S, 3, 3>;

struct KernelError : std::domain_error {
  explicit KernelError(const std::string& w) : std::domain_error(w) {}
};
struct ZeroVector : KernelError { ZeroVector() : KernelError("all-zero homogeneous vector") {} };
struct CoincidentPoints : KernelError { CoincidentPoints() : KernelError("join of equal points") {} };
struct IdenticalLines : KernelError { IdenticalLines() : KernelError("meet of equal lines") {} };
struct InfinitePoint : KernelError { InfinitePoint() : KernelError("finite point required") {} };
struct DegenerateRadius : KernelError { DegenerateRadius() : KernelError("circle with zero radius") {} };
struct NotACircle : KernelError { NotACircle() : KernelError("conic is not a real circle") {} };
struct IdenticalCircles : KernelError { IdenticalCircles() : KernelError("intersection of equal circles") {} };
struct ConcentricCircles : KernelError { ConcentricCircles() : KernelError("distinct concentric circles never meet") {} };
struct LineInConic : KernelError { LineInConic() : KernelError("line lies in the conic") {} };
struct SingularMap : KernelError { SingularMap() : KernelError("projective map must be invertible") {} };
struct NotSymmetric : KernelError { NotSymmetric() : KernelError("conic matrix must be symmetric") {} };
struct ParameterOutOfRange : KernelError {
  explicit ParameterOutOfRange(const std::string& w) : KernelError(w) {}
};

inline int sign_of(const Rat& x) { return x.sign(); }
inline int sign_of(const Real& x) { return x.sign(); }

template <class S>
Vec3<S> cross3(const Vec3<S>& a, const Vec3<S>& b) {
  return Vec3<S>(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

template <class S>
S det3(const Mat3<S>& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Adjugate: T * adjugate3(T) = det(T) * I. Lets us invert and push objects
// through maps without any division.
template <class S>
Mat3<S> adjugate3(const Mat3<S>& m) {
  Mat3<S> a;
  a(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  a(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  a(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  a(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  a(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  a(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  a(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  a(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  a(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return a;
}

template <class S>
Vec3<S> canonical_h(const Vec3<S>& v) {
  for (int i = 0; i < 3; ++i) {
    if (sign_of(v[i]) != 0) {
      Vec3<S> out;
      for (int j = 0; j < 3; ++j) out[j] = j < i ? S(0) : v[j] / v[i];
      return out;
    }
  }
  throw ZeroVector();
}

template <class S>
class PointT {
 public:
  PointT() : h_(S(0), S(0), S(1)) {}
  static PointT from_h(const Vec3<S>& v) { return PointT(canonical_h(v)); }
  static PointT affine(const S& x, const S& y) { return from_h(Vec3<S>(x, y, S(1))); }

  const Vec3<S>& h() const { return h_; }
  bool is_infinite() const { return sign_of(h_[2]) == 0; }
  S affine_x() const { require_finite(); return h_[0] / h_[2]; }
  S affine_y() const { require_finite(); return h_[1] / h_[2]; }
  void require_finite() const { if (is_infinite()) throw InfinitePoint(); }

  friend bool operator==(const PointT& a, const PointT& b) {
    for (int i = 0; i < 3; ++i)
      if (sign_of(a.h_[i] - b.h_[i]) != 0) return false;
    return true;
  }
  friend bool operator!=(const PointT& a, const PointT& b) { return !(a == b); }

 private:
  explicit PointT(Vec3<S> v) : h_(std::move(v)) {}
  Vec3<S> h_;
};

template <class S>
class LineT {
 public:
  LineT() : h_(S(0), S(0), S(1)) {}  // the line at infinity
  static LineT from_h(const Vec3<S>& v) { return LineT(canonical_h(v)); }
  static LineT infinity() { return LineT(); }

  const Vec3<S>& h() const { return h_; }
  bool is_infinity() const { return sign_of(h_[0]) == 0 && sign_of(h_[1]) == 0; }

  friend bool operator==(const LineT& a, const LineT& b) {
    for (int i = 0; i < 3; ++i)
      if (sign_of(a.h_[i] - b.h_[i]) != 0) return false;
    return true;
  }
  friend bool operator!=(const LineT& a, const LineT& b) { return !(a == b); }

 private:
  explicit LineT(Vec3<S> v) : h_(std::move(v)) {}
  Vec3<S> h_;
};

template <class S>
Mat3<S> canonical_sym(const Mat3<S>& m) {
  if (sign_of(m(0, 1) - m(1, 0)) != 0 || sign_of(m(0, 2) - m(2, 0)) != 0 ||
      sign_of(m(1, 2) - m(2, 1)) != 0)
    throw NotSymmetric();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (sign_of(m(i, j)) != 0) {
        Mat3<S> out = m;
        const S pivot = m(i, j);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) out(r, c) = m(r, c) / pivot;
        return out;
      }
  throw ZeroVector();
}

template <class S>
class ConicT {
 public:
  static ConicT from_matrix(const Mat3<S>& m) { return ConicT(canonical_sym(m)); }
  const Mat3<S>& m() const { return m_; }

  S evaluate(const PointT<S>& p) const {
    const Vec3<S>& v = p.h();
    return (v.transpose() * m_ * v)(0);
  }

  friend bool operator==(const ConicT& a, const ConicT& b) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (sign_of(a.m_(i, j) - b.m_(i, j)) != 0) return false;
    return true;
  }
  friend bool operator!=(const ConicT& a, const ConicT& b) { return !(a == b); }

 private:
  explicit ConicT(Mat3<S> m) : m_(std::move(m)) {}
  Mat3<S> m_;
};

template <class S>
class ProjMapT {
 public:
  static ProjMapT from_matrix(const Mat3<S>& m) {
    if (sign_of(det3(m)) == 0) throw SingularMap();
    return ProjMapT(m);
  }
  static ProjMapT identity() {
    Mat3<S> m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = S(i == j ? 1 : 0);
    return ProjMapT(m);
  }
  const Mat3<S>& m() const { return m_; }

  ProjMapT inverse() const { return ProjMapT(adjugate3(m_)); }
  friend ProjMapT compose(const ProjMapT& f, const ProjMapT& g) {
    // (compose(f, g))(x) = f(g(x))
    return ProjMapT(Mat3<S>(f.m_ * g.m_));
  }

 private:
  explicit ProjMapT(Mat3<S> m) : m_(std::move(m)) {}
  Mat3<S> m_;
};

using HPoint = PointT<Real>;
using HLine = LineT<Real>;
using Conic = ConicT<Real>;
using ProjMap = ProjMapT<Real>;

// ---- incidence and affine predicates ----

template <class S>
LineT<S> join(const PointT<S>& p, const PointT<S>& q) {
  if (p == q) throw CoincidentPoints();
  return LineT<S>::from_h(cross3(p.h(), q.h()));
}

template <class S>
PointT<S> meet(const LineT<S>& l, const LineT<S>& m) {
  if (l == m) throw IdenticalLines();
  return PointT<S>::from_h(cross3(l.h(), m.h()));
}

template <class S>
bool incident(const PointT<S>& p, const LineT<S>& l) {
  return sign_of(S(l.h().dot(p.h()))) == 0;
}

template <class S>
bool incident(const PointT<S>& p, const ConicT<S>& c) {
  return sign_of(c.evaluate(p)) == 0;
}

// Distinct lines whose meet is at infinity. The line at infinity itself is
// "parallel" to every affine line under this reading.
template <class S>
bool parallel(const LineT<S>& l, const LineT<S>& m) {
  if (l == m) return false;
  return sign_of(l.h()[0] * m.h()[1] - l.h()[1] * m.h()[0]) == 0;
}

// Which side of l the finite point p lies on: +1 / -1 for the two open
// halfplanes, 0 on the line (or for infinite points). Canonical forms do not
// normalize the z sign, so the bare dot product needs the sign(z) correction
// to be well defined on representatives.
template <class S>
int affine_side(const LineT<S>& l, const PointT<S>& p) {
  return sign_of(S(l.h().dot(p.h()))) * sign_of(p.h()[2]);
}

template <class S>
bool same_side(const LineT<S>& l, const PointT<S>& p, const PointT<S>& q) {
  return affine_side(l, p) * affine_side(l, q) == 1;
}

template <class S>
bool collinear(const PointT<S>& a, const PointT<S>& b, const PointT<S>& c) {
  Mat3<S> m;
  m.col(0) = a.h();
  m.col(1) = b.h();
  m.col(2) = c.h();
  return sign_of(det3(m)) == 0;
}

// Strict betweenness of finite collinear points: m between a and b.
template <class S>
bool between(const PointT<S>& a, const PointT<S>& m, const PointT<S>& b) {
  if (a.is_infinite() || m.is_infinite() || b.is_infinite()) return false;
  if (a == m || m == b || a == b) return false;
  if (!collinear(a, m, b)) return false;
  const S dx1 = m.affine_x() - a.affine_x(), dy1 = m.affine_y() - a.affine_y();
  const S dx2 = b.affine_x() - m.affine_x(), dy2 = b.affine_y() - m.affine_y();
  return sign_of(dx1 * dx2 + dy1 * dy2) > 0;
}

template <class S>
S distance2(const PointT<S>& p, const PointT<S>& q) {
  const S dx = p.affine_x() - q.affine_x(), dy = p.affine_y() - q.affine_y();
  return dx * dx + dy * dy;
}

// ---- projective maps ----

template <class S>
PointT<S> apply_map(const ProjMapT<S>& t, const PointT<S>& p) {
  return PointT<S>::from_h(Vec3<S>(t.m() * p.h()));
}

// Lines transform by the inverse transpose; with the adjugate this needs no
// division: l' = adj(T)^T l.
template <class S>
LineT<S> apply_map(const ProjMapT<S>& t, const LineT<S>& l) {
  return LineT<S>::from_h(Vec3<S>(adjugate3(t.m()).transpose() * l.h()));
}

template <class S>
ConicT<S> apply_map(const ProjMapT<S>& t, const ConicT<S>& c) {
  const Mat3<S> a = adjugate3(t.m());
  return ConicT<S>::from_matrix(Mat3<S>(a.transpose() * c.m() * a));
}

// ---- deterministic ordering (used to label multi-valued results) ----

// Exact comparison of a/b vs c/d given nonzero b, d.
template <class S>
int cmp_frac(const S& a, const S& b, const S& c, const S& d) {
  return sign_of(a * d - c * b) * sign_of(b) * sign_of(d);
}

// Total order: finite points first by affine (x, y); infinite points last by
// canonical homogeneous coordinates.
template <class S>
bool point_less(const PointT<S>& p, const PointT<S>& q) {
  const bool pi = p.is_infinite(), qi = q.is_infinite();
  if (pi != qi) return qi;
  if (!pi) {
    int c = cmp_frac(p.h()[0], p.h()[2], q.h()[0], q.h()[2]);
    if (c != 0) return c < 0;
    c = cmp_frac(p.h()[1], p.h()[2], q.h()[1], q.h()[2]);
    return c < 0;
  }
  int c = sign_of(p.h()[0] - q.h()[0]);
  if (c != 0) return c < 0;
  return sign_of(p.h()[1] - q.h()[1]) < 0;
}

// ---- circle operations (Real only; may extend the tower) ----

// Circle centered at `center` whose radius is the distance from `radius_from`
// to `radius_to` (rigid compass). All three points must be finite and the
// radius nonzero.
Conic circle_from(const HPoint& center, const HPoint& radius_from, const HPoint& radius_to);

bool is_circle(const Conic& c);
HPoint circle_center(const Conic& c);   // throws NotACircle
Real circle_radius2(const Conic& c);    // throws NotACircle

// 0, 1 (tangency) or 2 points, in point_less order. Throws LineInConic if
// every point of the line satisfies the conic.
std::vector<HPoint> line_conic_intersections(const HLine& l, const Conic& c, const TowerPtr& tower);

// Intersection via the radical axis. Both conics must be real circles.
std::vector<HPoint> circle_circle_intersections(const Conic& a, const Conic& b, const TowerPtr& tower);

// A projective map preserving the family of circles: the hyperbolic shift
//   H(u) = [[1,0,u],[0,sqrt(1-u^2),0],[u,0,1]],  u in (-1,1)
// composed with the rational rotation R(t) given by
//   cos = (1-t^2)/(1+t^2), sin = 2t/(1+t^2).
ProjMap circle_preserving_map(const Real& u, const Real& t, const TowerPtr& tower);

// ---- plain-text forms ----

std::string to_text(const HPoint& p);
std::string to_text(const HLine& l);
std::string to_text(const Conic& c);
std::string to_text(const ProjMap& t);

}  // namespace sclab
