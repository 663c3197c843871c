#include "sclab/svg.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sclab {

namespace {

// Exact decimal expansion. Well-defined whenever the denominator has no
// prime factors besides 2 and 5, which covers every quantity the renderer
// produces (interval midpoints and fixed dyadic fractions of them).
std::string finite_decimal(const Rat& q) {
  mpz_class d = q.den();
  unsigned long twos = 0, fives = 0;
  while (mpz_even_p(d.get_mpz_t())) {
    d >>= 1;
    ++twos;
  }
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) {
    mpz_divexact_ui(d.get_mpz_t(), d.get_mpz_t(), 5);
    ++fives;
  }
  if (d != 1) throw std::logic_error("finite_decimal: denominator is not of the form 2^a 5^b");
  const unsigned long k = std::max(twos, fives);
  mpz_class scaled = q.num();
  scaled <<= (k - twos);
  for (unsigned long i = fives; i < k; ++i) scaled *= 5;
  const bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string digits = scaled.get_str();
  if (digits.size() <= k) digits.insert(0, k + 1 - digits.size(), '0');
  std::string out = digits.substr(0, digits.size() - k);
  std::string frac = digits.substr(digits.size() - k);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (!frac.empty()) out += "." + frac;
  if (neg && out != "0") out.insert(out.begin(), '-');
  return out;
}

// Dyadic approximation of sqrt(q) for q >= 0, error below 2^(1-bits).
Rat dyadic_sqrt(const Rat& q, unsigned bits) {
  if (q.sign() <= 0) return Rat(0);
  mpz_class t = 1;
  t <<= bits;
  mpz_class m = q.num() * q.den() * t * t;
  mpz_sqrt(m.get_mpz_t(), m.get_mpz_t());
  m /= q.den();
  return Rat(m, t);
}

Rat mid_at(const Real& x, unsigned bits) { return x.approx(bits).mid(); }

struct CircleShape {
  Rat cx, cy, r;
};

// Center and radius when the conic is a real circle of positive radius.
std::optional<CircleShape> as_circle(const Conic& k, unsigned bits) {
  const Mat3<Real>& m = k.m();
  if (m(0, 1).sign() != 0) return std::nullopt;
  if ((m(0, 0) - m(1, 1)).sign() != 0) return std::nullopt;
  if (m(0, 0).sign() == 0) return std::nullopt;
  const Real& a = m(0, 0);
  const Real r2 = (m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2) - a * m(2, 2)) / (a * a);
  if (r2.sign() <= 0) return std::nullopt;
  CircleShape c;
  c.cx = mid_at(-m(0, 2) / a, bits);
  c.cy = mid_at(-m(1, 2) / a, bits);
  c.r = dyadic_sqrt(mid_at(r2, bits), bits);
  return c;
}

struct Viewport {
  Rat x0, y0, side;  // world coordinates, square

  Rat x1() const { return x0 + side; }
  Rat y1() const { return y0 + side; }
};

class Emitter {
 public:
  Emitter(const Configuration& cfg, unsigned bits)
      : cfg_(cfg), bits_(bits), cls_(cfg.size(), 1) {}

  void set_class(int id, int cls) { cls_.at(id) = cls; }

  std::string run() {
    fit_viewport();
    std::ostringstream out;
    const Rat sw = vp_.side * Rat(1, 512);
    const Rat dot = vp_.side * Rat(1, 128);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << finite_decimal(vp_.x0)
        << " " << finite_decimal(-vp_.y1()) << " " << finite_decimal(vp_.side) << " "
        << finite_decimal(vp_.side) << "\">\n";
    out << "<g fill=\"none\" stroke-linecap=\"round\" stroke-width=\"" << finite_decimal(sw)
        << "\">\n";
    for (int id = 0; id < cfg_.size(); ++id)
      if (const HLine* l = std::get_if<HLine>(&cfg_.object(id))) emit_line(out, *l, id);
    for (int id = 0; id < cfg_.size(); ++id)
      if (const Conic* k = std::get_if<Conic>(&cfg_.object(id))) emit_circle(out, *k, id);
    for (int id = 0; id < cfg_.size(); ++id)
      if (const HPoint* p = std::get_if<HPoint>(&cfg_.object(id))) emit_point(out, *p, id, dot);
    out << "</g>\n</svg>\n";
    return out.str();
  }

 private:
  const char* color(int id) const {
    switch (cls_[id]) {
      case 0: return "#999999";
      case 2: return "#cc2200";
      default: return "#111111";
    }
  }

  void grow(const Rat& x, const Rat& y, const Rat& margin = Rat(0)) {
    if (!have_) {
      lo_x_ = x - margin;
      hi_x_ = x + margin;
      lo_y_ = y - margin;
      hi_y_ = y + margin;
      have_ = true;
      return;
    }
    lo_x_ = std::min(lo_x_, x - margin);
    hi_x_ = std::max(hi_x_, x + margin);
    lo_y_ = std::min(lo_y_, y - margin);
    hi_y_ = std::max(hi_y_, y + margin);
  }

  void fit_viewport() {
    for (int id = 0; id < cfg_.size(); ++id) {
      if (const HPoint* p = std::get_if<HPoint>(&cfg_.object(id))) {
        if (p->is_infinite()) continue;
        grow(mid_at(p->affine_x(), bits_), mid_at(p->affine_y(), bits_));
      } else if (const Conic* k = std::get_if<Conic>(&cfg_.object(id))) {
        if (const auto c = as_circle(*k, bits_)) grow(c->cx, c->cy, c->r);
      }
    }
    if (!have_) {
      lo_x_ = lo_y_ = Rat(-2);
      hi_x_ = hi_y_ = Rat(2);
    }
    Rat side = std::max(hi_x_ - lo_x_, hi_y_ - lo_y_);
    if (side.sign() == 0) side = Rat(2);
    side += side * Rat(1, 4);
    const Rat cx = (lo_x_ + hi_x_) * Rat(1, 2);
    const Rat cy = (lo_y_ + hi_y_) * Rat(1, 2);
    vp_ = Viewport{cx - side * Rat(1, 2), cy - side * Rat(1, 2), side};
  }

  void emit_point(std::ostringstream& out, const HPoint& p, int id, const Rat& dot) {
    if (p.is_infinite()) return;
    out << "<circle cx=\"" << finite_decimal(mid_at(p.affine_x(), bits_)) << "\" cy=\""
        << finite_decimal(-mid_at(p.affine_y(), bits_)) << "\" r=\"" << finite_decimal(dot)
        << "\" fill=\"" << color(id) << "\"/>\n";
  }

  void emit_circle(std::ostringstream& out, const Conic& k, int id) {
    const auto c = as_circle(k, bits_);
    if (!c) return;
    out << "<circle cx=\"" << finite_decimal(c->cx) << "\" cy=\"" << finite_decimal(-c->cy)
        << "\" r=\"" << finite_decimal(c->r) << "\" stroke=\"" << color(id) << "\"/>\n";
  }

  // Exact clip against the viewport rectangle; the endpoints are rounded
  // only on emission.
  void emit_line(std::ostringstream& out, const HLine& l, int id) {
    const Vec3<Real>& v = l.h();
    if (v[0].sign() == 0 && v[1].sign() == 0) return;
    std::vector<std::pair<Real, Real>> hits;
    const auto push_unique = [&](const Real& x, const Real& y) {
      for (const auto& h : hits)
        if ((h.first - x).sign() == 0 && (h.second - y).sign() == 0) return;
      hits.emplace_back(x, y);
    };
    const Real X0(vp_.x0), X1(vp_.x1()), Y0(vp_.y0), Y1(vp_.y1());
    if (v[1].sign() != 0) {
      for (const Real* X : {&X0, &X1}) {
        const Real y = -(v[2] + v[0] * *X) / v[1];
        if ((y - Y0).sign() >= 0 && (Y1 - y).sign() >= 0) push_unique(*X, y);
      }
    }
    if (v[0].sign() != 0) {
      for (const Real* Y : {&Y0, &Y1}) {
        const Real x = -(v[2] + v[1] * *Y) / v[0];
        if ((x - X0).sign() >= 0 && (X1 - x).sign() >= 0) push_unique(x, *Y);
      }
    }
    if (hits.size() < 2) return;
    out << "<line x1=\"" << finite_decimal(mid_at(hits[0].first, bits_)) << "\" y1=\""
        << finite_decimal(-mid_at(hits[0].second, bits_)) << "\" x2=\""
        << finite_decimal(mid_at(hits[1].first, bits_)) << "\" y2=\""
        << finite_decimal(-mid_at(hits[1].second, bits_)) << "\" stroke=\"" << color(id)
        << "\"/>\n";
  }

  const Configuration& cfg_;
  unsigned bits_;
  std::vector<int> cls_;
  bool have_ = false;
  Rat lo_x_, hi_x_, lo_y_, hi_y_;
  Viewport vp_;
};

}  // namespace

std::string render_svg(const Configuration& cfg, const RenderOptions& opt) {
  return Emitter(cfg, opt.precision_bits).run();
}

std::string render_svg(const Trace& t, const RenderOptions& opt) {
  Emitter e(t.cfg, opt.precision_bits);
  for (int id = 0; id < t.cfg.size(); ++id) e.set_class(id, id < t.initial_size ? 0 : 1);
  for (int id : t.outputs) e.set_class(id, 2);
  return e.run();
}

}  // namespace sclab
