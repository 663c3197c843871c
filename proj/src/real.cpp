#include "sclab/real.hpp"

#include <cassert>
#include <ostream>

namespace sclab {

struct Real::Node {
  int level = 0;
  std::size_t nodes = 1;
  Rat leaf;       // level == 0
  NodePtr a, b;   // level > 0: value = a + b * sqrt(radicand(level))

  mutable std::atomic<int> sign_c{kSignUnknown};
  mutable DyadicInterval cached;
  mutable long cached_bits = -1;

  static constexpr int kSignUnknown = 2;
};

namespace {

using Node = Real::Node;
using NodePtr = Real::NodePtr;

std::mutex g_interval_cache_mu;

// Internal arithmetic (sign's norm recursion) must not trip the user-facing
// expression budget: its temporaries are transient and sign() must not fail.
thread_local int g_budget_exempt = 0;
struct BudgetExemption {
  BudgetExemption() { ++g_budget_exempt; }
  ~BudgetExemption() { --g_budget_exempt; }
};

NodePtr make_leaf(const Rat& q) {
  auto n = std::make_shared<Node>();
  n->leaf = q;
  return n;
}

const NodePtr& leaf_zero() {
  static const NodePtr n = make_leaf(Rat(0));
  return n;
}
const NodePtr& leaf_one() {
  static const NodePtr n = make_leaf(Rat(1));
  return n;
}

bool is_syntactic_zero(const NodePtr& n) { return n->level == 0 && n->leaf.is_zero(); }

NodePtr make_quad(const NodePtr& a, const NodePtr& b, int level, const Tower* tw) {
  if (is_syntactic_zero(b)) return a;
  auto n = std::make_shared<Node>();
  n->level = level;
  n->nodes = 1 + a->nodes + b->nodes;
  n->a = a;
  n->b = b;
  if (tw && g_budget_exempt == 0 && n->nodes > tw->node_limit())
    throw BudgetExceeded("expression node budget exceeded");
  return n;
}

int sign_n(const NodePtr& x, const Tower* tw);

const NodePtr& radicand_node(int level, const Tower* tw) {
  assert(tw != nullptr && "irrational value without a tower");
  return tw->radicand_n(level);
}

NodePtr add_n(const NodePtr& x, const NodePtr& y, const Tower* tw) {
  if (x->level == 0 && y->level == 0) return make_leaf(x->leaf + y->leaf);
  if (x->level == y->level)
    return make_quad(add_n(x->a, y->a, tw), add_n(x->b, y->b, tw), x->level, tw);
  if (x->level < y->level)
    return make_quad(add_n(x, y->a, tw), y->b, y->level, tw);
  return make_quad(add_n(x->a, y, tw), x->b, x->level, tw);
}

NodePtr neg_n(const NodePtr& x, const Tower* tw) {
  if (x->level == 0) return make_leaf(-x->leaf);
  return make_quad(neg_n(x->a, tw), neg_n(x->b, tw), x->level, tw);
}

NodePtr sub_n(const NodePtr& x, const NodePtr& y, const Tower* tw) {
  return add_n(x, neg_n(y, tw), tw);
}

NodePtr mul_n(const NodePtr& x, const NodePtr& y, const Tower* tw) {
  if (x->level == 0 && y->level == 0) return make_leaf(x->leaf * y->leaf);
  if (x->level == y->level) {
    // (xa + xb*s)(ya + yb*s) = xa*ya + xb*yb*r + (xa*yb + xb*ya)*s
    const NodePtr r = radicand_node(x->level, tw);
    NodePtr p = add_n(mul_n(x->a, y->a, tw), mul_n(mul_n(x->b, y->b, tw), r, tw), tw);
    NodePtr q = add_n(mul_n(x->a, y->b, tw), mul_n(x->b, y->a, tw), tw);
    return make_quad(p, q, x->level, tw);
  }
  if (x->level < y->level)
    return make_quad(mul_n(x, y->a, tw), mul_n(x, y->b, tw), y->level, tw);
  return make_quad(mul_n(x->a, y, tw), mul_n(x->b, y, tw), x->level, tw);
}

NodePtr norm_conj_n(const NodePtr& x, const Tower* tw) {
  // a^2 - b^2 * r for x = a + b*sqrt(r); one level below x.
  const NodePtr r = radicand_node(x->level, tw);
  return sub_n(mul_n(x->a, x->a, tw), mul_n(mul_n(x->b, x->b, tw), r, tw), tw);
}

int sign_n(const NodePtr& x, const Tower* tw) {
  int c = x->sign_c.load(std::memory_order_relaxed);
  if (c != Node::kSignUnknown) return c;
  int res;
  if (x->level == 0) {
    res = x->leaf.sign();
  } else {
    const int sa = sign_n(x->a, tw);
    const int sb = sign_n(x->b, tw);
    if (sb == 0) {
      res = sa;
    } else if (sa == 0 || sa == sb) {
      res = sa == 0 ? sb : sa;
    } else {
      // a and b*sqrt(r) pull in opposite directions; the winner is decided
      // by sign(a^2 - b^2 r), one level down.
      BudgetExemption guard;
      const int sn = sign_n(norm_conj_n(x, tw), tw);
      res = sn == 0 ? 0 : (sn > 0 ? sa : sb);
    }
  }
  x->sign_c.store(res, std::memory_order_relaxed);
  return res;
}

NodePtr inv_n(const NodePtr& x, const Tower* tw) {
  if (x->level == 0) return make_leaf(x->leaf.inverse());
  const NodePtr n = norm_conj_n(x, tw);
  if (sign_n(n, tw) != 0) {
    const NodePtr in = inv_n(n, tw);
    return make_quad(mul_n(x->a, in, tw), neg_n(mul_n(x->b, in, tw), tw), x->level, tw);
  }
  // Degenerate top level: a^2 = b^2 r, so sqrt(r) = |a/b| and the value
  // lives one level down. Rewrite and retry there.
  const NodePtr s = mul_n(x->a, inv_n(x->b, tw), tw);
  const NodePtr sa = sign_n(s, tw) < 0 ? neg_n(s, tw) : s;
  return inv_n(add_n(x->a, mul_n(x->b, sa, tw), tw), tw);
}

// ---- interval evaluation ----

DyadicInterval iadd(const DyadicInterval& x, const DyadicInterval& y) {
  return {x.lo + y.lo, x.hi + y.hi};
}

DyadicInterval imul(const DyadicInterval& x, const DyadicInterval& y) {
  Rat c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
  Rat lo = c[0], hi = c[0];
  for (int i = 1; i < 4; ++i) {
    if (c[i] < lo) lo = c[i];
    if (c[i] > hi) hi = c[i];
  }
  return {lo, hi};
}

DyadicInterval iround_out(const DyadicInterval& x, unsigned bits) {
  return {x.lo.floor_dyadic(bits), x.hi.ceil_dyadic(bits)};
}

Rat sqrt_lower_dyadic(const Rat& v, unsigned bits) {
  // floor(sqrt(v) * 2^bits) / 2^bits, via integer sqrt of floor(v * 4^bits)
  mpz_class t = (v.num() << (2 * bits)) / v.den();
  mpz_class z;
  mpz_sqrt(z.get_mpz_t(), t.get_mpz_t());
  mpz_class d = 1; d <<= bits;
  return Rat(z, d);
}

Rat sqrt_upper_dyadic(const Rat& v, unsigned bits) {
  mpz_class num = v.num() << (2 * bits);
  mpz_class t;
  mpz_cdiv_q(t.get_mpz_t(), num.get_mpz_t(), v.den().get_mpz_t());
  mpz_class z;
  mpz_sqrt(z.get_mpz_t(), t.get_mpz_t());
  if (z * z < t) z += 1;
  mpz_class d = 1; d <<= bits;
  return Rat(z, d);
}

DyadicInterval isqrt(const DyadicInterval& x, unsigned bits) {
  Rat lo = x.lo.sign() < 0 ? Rat(0) : x.lo;
  return {sqrt_lower_dyadic(lo, bits), sqrt_upper_dyadic(x.hi, bits)};
}

DyadicInterval approx_n(const NodePtr& x, const Tower* tw, unsigned p) {
  {
    std::lock_guard<std::mutex> lk(g_interval_cache_mu);
    if (x->cached_bits >= static_cast<long>(p)) return x->cached;
  }
  DyadicInterval out;
  if (x->level == 0) {
    out = {x->leaf.floor_dyadic(p + 1), x->leaf.ceil_dyadic(p + 1)};
  } else {
    const Rat target = pow2(-static_cast<long>(p));
    unsigned wp = p + 8;
    for (;;) {
      DyadicInterval ia = approx_n(x->a, tw, wp);
      DyadicInterval ib = approx_n(x->b, tw, wp);
      DyadicInterval ir = approx_n(radicand_node(x->level, tw), tw, wp);
      out = iround_out(iadd(ia, imul(ib, isqrt(ir, wp))), wp);
      if (out.width() <= target) break;
      if (wp > (1u << 26)) throw std::runtime_error("approx: failed to converge");
      wp *= 2;
    }
  }
  std::lock_guard<std::mutex> lk(g_interval_cache_mu);
  if (x->cached_bits < static_cast<long>(p)) {
    x->cached = out;
    x->cached_bits = static_cast<long>(p);
  }
  return out;
}

std::string serialize_n(const NodePtr& x, const Tower* tw) {
  if (x->level == 0) return x->leaf.str();
  const NodePtr r = radicand_node(x->level, tw);
  return "(" + serialize_n(x->a, tw) + " + (" + serialize_n(x->b, tw) + " * sqrt(" +
         serialize_n(r, tw) + ")))";
}

}  // namespace

// ---- Tower ----

TowerPtr Tower::create(std::size_t node_limit) {
  TowerPtr t(new Tower());
  t->radicands_.reserve(kMaxLevels);
  t->node_limit_.store(node_limit);
  return t;
}

std::size_t Tower::levels() const { return count_.load(std::memory_order_acquire); }

const Real::NodePtr& Tower::radicand_n(int level) const {
  const std::size_t n = count_.load(std::memory_order_acquire);
  if (level < 1 || static_cast<std::size_t>(level) > n)
    throw std::logic_error("Tower: radicand level out of range");
  return radicands_[static_cast<std::size_t>(level) - 1];
}

Real Tower::radicand(int level) const {
  return Real(radicand_n(level), std::const_pointer_cast<Tower>(shared_from_this()));
}

Tower::Reuse Tower::intern_radicand(const Real& x) {
  std::lock_guard<std::mutex> lk(mu_);
  const std::size_t n = count_.load(std::memory_order_relaxed);
  for (std::size_t j = 0; j < n; ++j) {
    Real rj(radicands_[j], x.tower());
    try {
      DyadicInterval ix = x.approx(48), ir = rj.approx(48);
      if (!(ix.hi < ir.lo) && !(ir.hi < ix.lo) && (x - rj).sign() == 0)
        return {static_cast<int>(j + 1), Rat(1)};
      if (auto q = (x / rj).as_rational()) {
        Rat c;
        if (q->is_perfect_square(&c) && c.sign() != 0) return {static_cast<int>(j + 1), c};
      }
    } catch (const BudgetExceeded&) {
      // reuse probing is best effort; fall through to a fresh level
    }
  }
  if (n >= level_limit() || n >= kMaxLevels)
    throw BudgetExceeded("tower level budget exceeded");
  radicands_.push_back(x.node());
  count_.store(n + 1, std::memory_order_release);
  return {static_cast<int>(n + 1), Rat(1)};
}

// ---- Real ----

Real::Real(const Rat& q) : node_(q.is_zero() ? leaf_zero() : make_leaf(q)), tower_(nullptr) {}

int Real::level() const { return node_->level; }
std::size_t Real::tree_nodes() const { return node_->nodes; }

int Real::sign() const { return sign_n(node_, tower_.get()); }

DyadicInterval Real::approx(unsigned precision_bits) const {
  return approx_n(node_, tower_.get(), precision_bits);
}

double Real::to_double() const { return approx(70).mid().to_double(); }

std::optional<Rat> Real::as_rational() const {
  NodePtr cur = node_;
  while (cur->level > 0) {
    if (sign_n(cur->b, tower_.get()) != 0) return std::nullopt;
    cur = cur->a;
  }
  return cur->leaf;
}

namespace {
const Tower* pick_tower(const Real& x, const Real& y) {
  const Tower* a = x.tower().get();
  const Tower* b = y.tower().get();
  if (a && b && a != b) throw TowerMismatch();
  return a ? a : b;
}
TowerPtr pick_tower_ptr(const Real& x, const Real& y) {
  if (x.tower()) return x.tower();
  return y.tower();
}
}  // namespace

Real Real::operator-() const { return Real(neg_n(node_, tower_.get()), tower_); }

Real Real::inverse() const {
  if (sign() == 0) throw DivisionByZero();
  return Real(inv_n(node_, tower_.get()), tower_);
}

Real operator+(const Real& x, const Real& y) {
  const Tower* tw = pick_tower(x, y);
  return Real(add_n(x.node(), y.node(), tw), pick_tower_ptr(x, y));
}
Real operator-(const Real& x, const Real& y) {
  const Tower* tw = pick_tower(x, y);
  return Real(sub_n(x.node(), y.node(), tw), pick_tower_ptr(x, y));
}
Real operator*(const Real& x, const Real& y) {
  const Tower* tw = pick_tower(x, y);
  return Real(mul_n(x.node(), y.node(), tw), pick_tower_ptr(x, y));
}
Real operator/(const Real& x, const Real& y) {
  const Tower* tw = pick_tower(x, y);
  if (sign_n(y.node(), tw) == 0) throw DivisionByZero();
  return Real(mul_n(x.node(), inv_n(y.node(), tw), tw), pick_tower_ptr(x, y));
}

namespace {

// Best-effort detection of squares inside the field already spanned by the
// value itself: exact rational squares, and (c + d*sqrt(r))^2 patterns found
// through the norm. Runs under the normal budget; a budget trip just means
// "not detected".
std::optional<Real> try_exact_sqrt(const Real& x) {
  const Tower* tw = x.tower().get();
  const NodePtr& n = x.node();
  if (n->level == 0) {
    Rat c;
    if (n->leaf.is_perfect_square(&c)) return Real(c);
    return std::nullopt;
  }
  if (sign_n(n->b, tw) == 0) {
    auto inner = try_exact_sqrt(Real(n->a, x.tower()));
    if (!inner) return std::nullopt;
    return inner;
  }
  Real a(n->a, x.tower()), b(n->b, x.tower());
  Real norm = a * a - b * b * Real(radicand_node(n->level, tw), x.tower());
  if (norm.sign() < 0) return std::nullopt;
  auto s = try_exact_sqrt(norm);
  if (!s) return std::nullopt;
  const Rat half(1, 2);
  for (int pm = 0; pm < 2; ++pm) {
    Real cc = (pm == 0 ? a + *s : a - *s) * Real(half);
    if (cc.sign() < 0) continue;
    auto c = try_exact_sqrt(cc);
    if (!c || c->sign() == 0) continue;
    Real d = b / (*c * Real(2));
    Real cand(make_quad(c->node(), d.node(), n->level, tw), x.tower());
    return cand.sign() < 0 ? -cand : cand;
  }
  return std::nullopt;
}

}  // namespace

Real Real::sqrt(const Real& x, const TowerPtr& hint) {
  const int s = x.sign();
  if (s < 0) throw NegativeRadicand();
  if (s == 0) return Real(leaf_zero(), x.tower());
  try {
    if (auto r = try_exact_sqrt(x)) return *r;
  } catch (const BudgetExceeded&) {
  }
  TowerPtr tw = x.tower() ? x.tower() : hint;
  if (!tw) throw TowerRequired();
  Real hosted(x.node(), tw);
  Tower::Reuse reuse = tw->intern_radicand(hosted);
  NodePtr coeff = reuse.factor == Rat(1) ? leaf_one() : make_leaf(reuse.factor);
  return Real(make_quad(leaf_zero(), coeff, reuse.level, tw.get()), tw);
}

std::string Real::serialize() const { return serialize_n(node_, tower_.get()); }

std::ostream& operator<<(std::ostream& os, const Real& x) { return os << x.serialize(); }

}  // namespace sclab
