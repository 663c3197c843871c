#include <algorithm>
#include <functional>

#include "sclab/game.hpp"

namespace sclab {

namespace {

mpz_class floor_rat(const Rat& r) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return q;
}

mpz_class ceil_rat(const Rat& r) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return q;
}

// Open rational interval used only to bound sweeps; exact tests gate every
// candidate, so outer (too wide) bounds are always safe.
struct Window {
  bool bounded = false;
  Rat lo, hi;

  void clip(const Rat& l, const Rat& h) {
    if (!bounded) {
      bounded = true;
      lo = l;
      hi = h;
      return;
    }
    if (l > lo) lo = l;
    if (h < hi) hi = h;
  }
};

constexpr long kDenominatorMax = 4096;
constexpr long kZigzagMax = 4096;
constexpr long kWorkLimit = 400000;

// Numerators for denominator q, smallest magnitude first, + before -.
std::vector<mpz_class> numerators(const Window& w, long q) {
  std::vector<mpz_class> out;
  if (w.bounded) {
    const mpz_class first = floor_rat(w.lo * Rat(q)) + 1;
    const mpz_class last = ceil_rat(w.hi * Rat(q)) - 1;
    for (mpz_class p = first; p <= last; ++p) out.push_back(p);
    std::sort(out.begin(), out.end(), [](const mpz_class& a, const mpz_class& b) {
      const mpz_class aa = abs(a), ab = abs(b);
      if (aa != ab) return aa < ab;
      return a > b;
    });
  } else {
    out.push_back(0);
    for (long p = 1; p <= kZigzagMax; ++p) {
      out.push_back(p);
      out.push_back(-p);
    }
  }
  return out;
}

struct SetView {
  struct Disc {
    Real cx, cy;
    Rat r;
  };
  struct Half {
    Vec3<Real> l;  // coefficients (a, b, c)
    int side;
  };
  std::vector<Disc> discs;
  std::vector<Half> halves;

  SetView(const OpenSet& u, const Configuration& cfg) {
    for (const OpenAtom& atom : u.atoms) {
      if (const auto* d = std::get_if<DiscAtom>(&atom)) {
        discs.push_back({d->cx, d->cy, d->radius});
      } else {
        const auto& h = std::get<HalfplaneAtom>(atom);
        halves.push_back({std::get<HLine>(cfg.object(h.line)).h(), h.side});
      }
    }
  }

  Window x_window() const {
    Window w;
    for (const Disc& d : discs) {
      const DyadicInterval iv = d.cx.approx(24);
      w.clip(iv.lo - d.r, iv.hi + d.r);
    }
    return w;
  }

  Window y_window() const {
    Window w;
    for (const Disc& d : discs) {
      const DyadicInterval iv = d.cy.approx(24);
      w.clip(iv.lo - d.r, iv.hi + d.r);
    }
    return w;
  }

  // Exact test that the vertical line at x meets every atom's x-projection.
  bool x_feasible(const Rat& x) const {
    const Real rx{x};
    for (const Disc& d : discs) {
      const Real dx = rx - d.cx;
      if ((Real(d.r) * Real(d.r) - dx * dx).sign() <= 0) return false;
    }
    for (const Half& h : halves) {
      if (h.l[1].sign() != 0) continue;  // y-dependent, no x constraint
      if ((h.l[0] * rx + h.l[2]).sign() != h.side) return false;
    }
    return true;
  }
};

// Minimal-denominator sweep: x before y, denominators ascending, numerators
// by magnitude. Every returned point passes `accept` (exact membership plus
// any extra gate). Deterministic for fixed inputs.
HPoint sweep_point(const OpenSet& u, const Configuration& cfg,
                   const std::function<bool(const HPoint&)>& accept) {
  const SetView view(u, cfg);
  const Window wx = view.x_window();
  const Window wy = view.y_window();
  if ((wx.bounded && wx.lo >= wx.hi) || (wy.bounded && wy.lo >= wy.hi))
    throw SearchBudgetExceeded("the requested set appears empty");
  long work = 0;
  const auto spend = [&work](long n) {
    work += n;
    if (work > kWorkLimit) throw SearchBudgetExceeded("candidate sweep exhausted");
  };
  for (long qx = 1; qx <= kDenominatorMax; ++qx) {
    for (const mpz_class& px : numerators(wx, qx)) {
      if (gcd(px, mpz_class(qx)) != 1) continue;
      spend(1);
      const Rat x(px, mpz_class(qx));
      if (!view.x_feasible(x)) continue;
      long ywork = 0;
      for (long qy = 1; qy <= kDenominatorMax && ywork <= 20000; ++qy) {
        for (const mpz_class& py : numerators(wy, qy)) {
          if (gcd(py, mpz_class(qy)) != 1) continue;
          spend(1);
          ++ywork;
          const HPoint p = HPoint::affine(Real(x), Real(Rat(py, mpz_class(qy))));
          if (!contains_strict(u, p, cfg)) continue;
          if (accept && !accept(p)) continue;
          return p;
        }
      }
    }
  }
  throw SearchBudgetExceeded("no rational point found in the requested set");
}

class RationalAdversary final : public Adversary {
 public:
  std::string name() const override { return "rational"; }
  HPoint choose_point(const OpenSet& u, const Configuration& cfg) override {
    return sweep_point(u, cfg, nullptr);
  }
};

class PullbackAdversary final : public Adversary {
 public:
  explicit PullbackAdversary(const ProjMap& t)
      : t_(t), tinv_(t.inverse()), rational_(map_is_rational(t)) {
    forbidden_.push_back(apply_map(t_, HPoint::affine(Real(0), Real(0))));
  }

  std::string name() const override { return "pullback"; }

  HPoint choose_point(const OpenSet& u, const Configuration& cfg) override {
    if (rational_) {
      // T-preimages of rationals are exactly the rationals, so sweep the set
      // directly and gate on the image.
      return sweep_point(u, cfg, [this](const HPoint& p) {
        const HPoint img = apply_map(t_, p);
        if (img.is_infinite()) return false;
        return !is_forbidden(img);
      });
    }
    return image_sweep(u, cfg);
  }

 private:
  static bool map_is_rational(const ProjMap& t) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (!t.m()(i, j).as_rational()) return false;
    return true;
  }

  bool is_forbidden(const HPoint& img) const {
    for (const HPoint& f : forbidden_) {
      if (img == f) return true;
    }
    return false;
  }

  // Irrational maps: enumerate candidate images r over a window around the
  // image of the set's anchor, denominators ascending, and answer T^-1(r).
  HPoint image_sweep(const OpenSet& u, const Configuration& cfg) const {
    Real ax{Rat(0)}, ay{Rat(0)};
    for (const OpenAtom& atom : u.atoms)
      if (const auto* d = std::get_if<DiscAtom>(&atom)) {
        ax = d->cx;
        ay = d->cy;
        break;
      }
    const HPoint anchor_img = apply_map(t_, HPoint::affine(ax, ay));
    Rat cx(0), cy(0);
    if (!anchor_img.is_infinite()) {
      cx = anchor_img.affine_x().approx(24).mid();
      cy = anchor_img.affine_y().approx(24).mid();
    }
    const Rat w(2);
    long work = 0;
    for (long q = 1; q <= 256; ++q) {
      const mpz_class x0 = floor_rat((cx - w) * Rat(q)), x1 = ceil_rat((cx + w) * Rat(q));
      const mpz_class y0 = floor_rat((cy - w) * Rat(q)), y1 = ceil_rat((cy + w) * Rat(q));
      for (mpz_class px = x0; px <= x1; ++px) {
        for (mpz_class py = y0; py <= y1; ++py) {
          if (gcd(gcd(px, py), mpz_class(q)) != 1) continue;
          if (++work > kWorkLimit) throw SearchBudgetExceeded("image sweep exhausted");
          const HPoint r = HPoint::affine(Real(Rat(px, mpz_class(q))), Real(Rat(py, mpz_class(q))));
          if (is_forbidden(r)) continue;
          const HPoint p = apply_map(tinv_, r);
          if (p.is_infinite()) continue;
          if (contains_strict(u, p, cfg)) return p;
        }
      }
    }
    throw SearchBudgetExceeded("no preimage found in the requested set");
  }

  ProjMap t_, tinv_;
  bool rational_;
  std::vector<HPoint> forbidden_;
};

}  // namespace

std::unique_ptr<Adversary> rational_adversary() { return std::make_unique<RationalAdversary>(); }

std::unique_ptr<Adversary> pullback_adversary(const ProjMap& t) {
  return std::make_unique<PullbackAdversary>(t);
}

}  // namespace sclab
