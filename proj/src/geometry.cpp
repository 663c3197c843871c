#include "sclab/geometry.hpp"

#include <algorithm>

namespace sclab {

namespace {

Real quad_eval(const Vec3<Real>& u, const Mat3<Real>& m, const Vec3<Real>& v) {
  return (u.transpose() * m * v)(0);
}

}  // namespace

Conic circle_from(const HPoint& center, const HPoint& radius_from, const HPoint& radius_to) {
  center.require_finite();
  radius_from.require_finite();
  radius_to.require_finite();
  const Real r2 = distance2(radius_from, radius_to);
  if (r2.sign() == 0) throw DegenerateRadius();
  const Real cx = center.affine_x(), cy = center.affine_y();
  Mat3<Real> m;
  m << Real(1), Real(0), -cx,
       Real(0), Real(1), -cy,
       -cx, -cy, cx * cx + cy * cy - r2;
  return Conic::from_matrix(m);
}

bool is_circle(const Conic& c) {
  const Mat3<Real>& m = c.m();
  if (m(0, 0).sign() == 0) return false;  // canonical scaling pivots elsewhere
  if (m(0, 1).sign() != 0) return false;
  if ((m(0, 0) - m(1, 1)).sign() != 0) return false;
  // canonical form has m(0,0) == 1 here; >= 0 keeps point circles, which do
  // contain a real point
  const Real d = m(0, 2), e = m(1, 2), f = m(2, 2);
  return (d * d + e * e - f).sign() >= 0;
}

HPoint circle_center(const Conic& c) {
  if (!is_circle(c)) throw NotACircle();
  return HPoint::affine(-c.m()(0, 2), -c.m()(1, 2));
}

Real circle_radius2(const Conic& c) {
  if (!is_circle(c)) throw NotACircle();
  const Real d = c.m()(0, 2), e = c.m()(1, 2), f = c.m()(2, 2);
  return d * d + e * e - f;
}

std::vector<HPoint> line_conic_intersections(const HLine& l, const Conic& c,
                                             const TowerPtr& tower) {
  // Span the line by two points and restrict the quadratic form to it:
  // X = s*P0 + t*P1 lies on the conic iff A s^2 + 2B st + C t^2 = 0.
  const Vec3<Real>& h = l.h();
  Vec3<Real> p0, p1;
  if (h[0].sign() != 0 || h[1].sign() != 0) {
    p0 = Vec3<Real>(h[1], -h[0], Real(0));
    p1 = h[0].sign() != 0 ? Vec3<Real>(-h[2], Real(0), h[0])
                          : Vec3<Real>(Real(0), -h[2], h[1]);
  } else {
    p0 = Vec3<Real>(Real(1), Real(0), Real(0));
    p1 = Vec3<Real>(Real(0), Real(1), Real(0));
  }
  const Real a = quad_eval(p0, c.m(), p0);
  const Real b = quad_eval(p0, c.m(), p1);
  const Real d = quad_eval(p1, c.m(), p1);
  const int sa = a.sign(), sb = b.sign(), sd = d.sign();
  if (sa == 0 && sb == 0 && sd == 0) throw LineInConic();

  std::vector<std::pair<Real, Real>> roots;
  if (sa == 0) {
    roots.emplace_back(Real(1), Real(0));
    if (sb != 0) roots.emplace_back(-d, Real(2) * b);
  } else {
    const Real disc = b * b - a * d;
    const int s = disc.sign();
    if (s == 0) {
      roots.emplace_back(-b, a);
    } else if (s > 0) {
      const Real q = Real::sqrt(disc, tower);
      roots.emplace_back(-b + q, a);
      roots.emplace_back(-b - q, a);
    }
  }

  std::vector<HPoint> out;
  out.reserve(roots.size());
  for (const auto& [s, t] : roots)
    out.push_back(HPoint::from_h(Vec3<Real>(s * p0[0] + t * p1[0], s * p0[1] + t * p1[1],
                                            s * p0[2] + t * p1[2])));
  std::sort(out.begin(), out.end(), point_less<Real>);
  return out;
}

std::vector<HPoint> circle_circle_intersections(const Conic& a, const Conic& b,
                                                const TowerPtr& tower) {
  if (!is_circle(a) || !is_circle(b)) throw NotACircle();
  if (a == b) throw IdenticalCircles();
  // Canonical circles have x^2+y^2 coefficient 1; subtracting the forms
  // leaves the radical axis, whose meets with either circle are the common
  // points.
  const Real d1 = a.m()(0, 2), e1 = a.m()(1, 2), f1 = a.m()(2, 2);
  const Real d2 = b.m()(0, 2), e2 = b.m()(1, 2), f2 = b.m()(2, 2);
  const Real lx = Real(2) * (d1 - d2), ly = Real(2) * (e1 - e2), lz = f1 - f2;
  if (lx.sign() == 0 && ly.sign() == 0) throw ConcentricCircles();
  const HLine radical = HLine::from_h(Vec3<Real>(lx, ly, lz));
  return line_conic_intersections(radical, a, tower);
}

ProjMap circle_preserving_map(const Real& u, const Real& t, const TowerPtr& tower) {
  const Real one(1);
  const Real usq = u * u;
  if ((one - usq).sign() <= 0) throw ParameterOutOfRange("shift parameter must lie in (-1,1)");
  const Real w = Real::sqrt(one - usq, tower);
  Mat3<Real> h;
  h << one, Real(0), u,
       Real(0), w, Real(0),
       u, Real(0), one;
  const Real den = one + t * t;
  const Real c = (one - t * t) / den;
  const Real s = (Real(2) * t) / den;
  Mat3<Real> r;
  r << c, -s, Real(0),
       s, c, Real(0),
       Real(0), Real(0), one;
  return ProjMap::from_matrix(Mat3<Real>(r * h));
}

namespace {
std::string vec_text(const Vec3<Real>& v) {
  return "[" + v[0].serialize() + ":" + v[1].serialize() + ":" + v[2].serialize() + "]";
}
}  // namespace

std::string to_text(const HPoint& p) { return "point " + vec_text(p.h()); }
std::string to_text(const HLine& l) { return "line " + vec_text(l.h()); }

// Conics are symmetric, so only the upper triangle is written:
// [m11 m12 m13; m22 m23; m33]
std::string to_text(const Conic& c) {
  const Mat3<Real>& m = c.m();
  return "conic [" + m(0, 0).serialize() + " " + m(0, 1).serialize() + " " + m(0, 2).serialize() +
         "; " + m(1, 1).serialize() + " " + m(1, 2).serialize() + "; " + m(2, 2).serialize() + "]";
}

// Maps are full 3x3, rows separated by semicolons.
std::string to_text(const ProjMap& t) {
  const Mat3<Real>& m = t.m();
  std::string out = "map [";
  for (int i = 0; i < 3; ++i) {
    if (i) out += "; ";
    for (int j = 0; j < 3; ++j) {
      if (j) out += " ";
      out += m(i, j).serialize();
    }
  }
  return out + "]";
}

}  // namespace sclab
