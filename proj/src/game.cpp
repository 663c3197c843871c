#include "sclab/game.hpp"

#include <map>

#include "sclab/closure.hpp"

namespace sclab {

bool contains_strict(const OpenSet& u, const HPoint& p, const Configuration& cfg) {
  if (p.is_infinite()) return false;
  for (const OpenAtom& atom : u.atoms) {
    if (const auto* d = std::get_if<DiscAtom>(&atom)) {
      const Real dx = p.affine_x() - d->cx;
      const Real dy = p.affine_y() - d->cy;
      const Real rr = Real(d->radius) * Real(d->radius);
      if ((dx * dx + dy * dy - rr).sign() >= 0) return false;
    } else {
      const auto& h = std::get<HalfplaneAtom>(atom);
      const auto* l = std::get_if<HLine>(&cfg.object(h.line));
      if (!l) return false;
      if (affine_side(*l, p) != h.side) return false;
    }
  }
  return true;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Won: return "won";
    case Outcome::Lost: return "lost";
    default: return "budget";
  }
}

// ---- Session ----

Session::Session(Configuration initial, GeomObject target, Adversary& adv, long max_moves,
                 PlayHooks* hooks)
    : cfg_(std::move(initial)),
      target_(std::move(target)),
      adv_(&adv),
      max_moves_(max_moves),
      hooks_(hooks) {
  if (max_moves_ < 1) throw std::invalid_argument("max_moves must be at least 1");
  initial_size_ = cfg_.size();
  if (cfg_.contains(target_)) won_at_ = 0;
}

const GeomObject& Session::arg(int id) const { return cfg_.object(id); }

void Session::require_active() const {
  if (moves_played_ >= max_moves_) throw std::logic_error("move budget exhausted");
}

int Session::insert_one(const GeomObject& obj, Provenance prov) {
  return cfg_.insert(obj, std::move(prov)).id;
}

void Session::commit(Move m) {
  ++moves_played_;
  if (!won() && cfg_.contains(target_)) won_at_ = static_cast<int>(moves_played_);
  moves_.push_back(std::move(m));
  if (hooks_) hooks_->on_move(moves_.back(), cfg_);
}

int Session::join_line(int p, int q) {
  require_active();
  const auto* a = std::get_if<HPoint>(&arg(p));
  const auto* b = std::get_if<HPoint>(&arg(q));
  if (!a || !b) throw KernelError("join needs two points");
  const int step = static_cast<int>(moves_played_) + 1;
  const int id = insert_one(join(*a, *b), {OpKind::Join, {p, q}, 0, step});
  commit(Move{Move::Kind::Join, {p, q}, {}, {id}});
  return id;
}

int Session::meet_point(int l, int m) {
  require_active();
  const auto* a = std::get_if<HLine>(&arg(l));
  const auto* b = std::get_if<HLine>(&arg(m));
  if (!a || !b) throw KernelError("meet needs two lines");
  const int step = static_cast<int>(moves_played_) + 1;
  const int id = insert_one(meet(*a, *b), {OpKind::Meet, {l, m}, 0, step});
  commit(Move{Move::Kind::Meet, {l, m}, {}, {id}});
  return id;
}

std::vector<int> Session::intersect(int a, int b) {
  require_active();
  const GeomObject& oa = arg(a);
  const GeomObject& ob = arg(b);
  if (std::holds_alternative<HPoint>(oa) || std::holds_alternative<HPoint>(ob))
    throw KernelError("intersect needs lines or circles");
  const int step = static_cast<int>(moves_played_) + 1;
  std::vector<int> out;
  if (std::holds_alternative<HLine>(oa) && std::holds_alternative<HLine>(ob)) {
    const int id =
        insert_one(meet(std::get<HLine>(oa), std::get<HLine>(ob)), {OpKind::Meet, {a, b}, 0, step});
    out.push_back(id);
  } else if (std::holds_alternative<Conic>(oa) && std::holds_alternative<Conic>(ob)) {
    std::vector<HPoint> pts;
    try {
      pts = circle_circle_intersections(std::get<Conic>(oa), std::get<Conic>(ob), cfg_.tower());
    } catch (const ConcentricCircles&) {
      // no common point; a legal move with an empty response
    }
    const std::vector<int> parents = {std::min(a, b), std::max(a, b)};
    for (std::size_t i = 0; i < pts.size(); ++i)
      out.push_back(insert_one(pts[i], {OpKind::ConicConic, parents, static_cast<int>(i), step}));
  } else {
    const bool a_is_line = std::holds_alternative<HLine>(oa);
    const int lid = a_is_line ? a : b, cid = a_is_line ? b : a;
    const HLine& l = std::get<HLine>(a_is_line ? oa : ob);
    const Conic& c = std::get<Conic>(a_is_line ? ob : oa);
    const std::vector<HPoint> pts = line_conic_intersections(l, c, cfg_.tower());
    for (std::size_t i = 0; i < pts.size(); ++i)
      out.push_back(insert_one(pts[i], {OpKind::LineConic, {lid, cid}, static_cast<int>(i), step}));
  }
  commit(Move{Move::Kind::Intersect, {a, b}, {}, out});
  return out;
}

int Session::draw_circle(int center, int radius_from, int radius_to) {
  require_active();
  const auto* c = std::get_if<HPoint>(&arg(center));
  const auto* f = std::get_if<HPoint>(&arg(radius_from));
  const auto* t = std::get_if<HPoint>(&arg(radius_to));
  if (!c || !f || !t) throw KernelError("circle needs three points");
  const int step = static_cast<int>(moves_played_) + 1;
  const int id = insert_one(circle_from(*c, *f, *t),
                            {OpKind::Compass, {center, radius_from, radius_to}, 0, step});
  commit(Move{Move::Kind::Circle, {center, radius_from, radius_to}, {}, {id}});
  return id;
}

int Session::request(const OpenSet& u) {
  require_active();
  if (u.atoms.empty()) throw std::invalid_argument("request needs at least one set atom");
  for (const OpenAtom& atom : u.atoms)
    if (const auto* h = std::get_if<HalfplaneAtom>(&atom))
      if (!std::holds_alternative<HLine>(arg(h->line)))
        throw KernelError("halfplane carrier must be a line");
  const HPoint p = adv_->choose_point(u, cfg_);
  if (!contains_strict(u, p, cfg_))
    throw AdversaryViolation("move " + std::to_string(moves_played_ + 1) + " returned " +
                             to_text(p) + ", outside the requested set");
  const int step = static_cast<int>(moves_played_) + 1;
  const int id = insert_one(p, {OpKind::Arbitrary, {}, 0, step});
  commit(Move{Move::Kind::Request, {}, u, {id}});
  return id;
}

void Session::record_output(int id) {
  cfg_.object(id);  // bounds check
  outputs_.push_back(id);
}

Trace Session::finish(std::string note) {
  const Outcome outcome =
      won() ? Outcome::Won : (moves_played_ >= max_moves_ ? Outcome::Budget : Outcome::Lost);
  return Trace{std::move(cfg_), initial_size_,       std::move(target_), std::move(moves_),
               std::move(outputs_), outcome,         won_at_,            adv_->name(),
               max_moves_,          std::move(note)};
}

// ---- test evaluation ----

bool eval_test(lang::TestKind kind, const std::vector<int>& ids, const Configuration& cfg) {
  const auto pt = [&](int i) -> const HPoint& {
    const auto* p = std::get_if<HPoint>(&cfg.object(i));
    if (!p) throw std::invalid_argument("test operand must be a point");
    return *p;
  };
  const auto ln = [&](int i) -> const HLine& {
    const auto* l = std::get_if<HLine>(&cfg.object(i));
    if (!l) throw std::invalid_argument("test operand must be a line");
    return *l;
  };
  switch (kind) {
    case lang::TestKind::Incident: {
      const HPoint& p = pt(ids[0]);
      const GeomObject& c = cfg.object(ids[1]);
      if (const auto* l = std::get_if<HLine>(&c)) return incident(p, *l);
      if (const auto* k = std::get_if<Conic>(&c)) return incident(p, *k);
      throw std::invalid_argument("incident carrier must be a line or circle");
    }
    case lang::TestKind::Equal:
      return geom_equal(cfg.object(ids[0]), cfg.object(ids[1]));
    case lang::TestKind::Parallel:
      return parallel(ln(ids[0]), ln(ids[1]));
    case lang::TestKind::Between: {
      const HPoint& a = pt(ids[0]);
      const HPoint& m = pt(ids[1]);
      const HPoint& b = pt(ids[2]);
      if (!collinear(a, m, b)) throw std::invalid_argument("between of non-collinear points");
      return between(a, m, b);
    }
    default:
      return same_side(ln(ids[2]), pt(ids[0]), pt(ids[1]));
  }
}

// ---- playing ----

Trace play(Strategy& strategy, Configuration initial, const GeomObject& target, Adversary& adv,
           long max_moves, PlayHooks* hooks) {
  Session s(std::move(initial), target, adv, max_moves, hooks);
  if (!s.done()) strategy.run(s);
  return s.finish();
}

namespace {

struct ScriptAbort {
  std::string reason;
};

class ScriptRunner {
 public:
  ScriptRunner(Session& s, PlayHooks* hooks) : s_(s), hooks_(hooks) {}

  void run(const lang::Script& sc, int initial_size) {
    if (static_cast<int>(sc.givens.size()) != initial_size)
      throw std::invalid_argument("script declares " + std::to_string(sc.givens.size()) +
                                  " givens but the initial configuration has " +
                                  std::to_string(initial_size) + " objects");
    for (std::size_t i = 0; i < sc.givens.size(); ++i)
      env_[sc.givens[i]] = static_cast<int>(i);
    exec_block(sc.body);
  }

 private:
  int lookup(const std::string& id) const {
    const auto it = env_.find(id);
    if (it == env_.end()) throw ScriptAbort{"undefined identifier '" + id + "'"};
    return it->second;
  }

  bool eval(const lang::Test& t) {
    std::vector<int> ids;
    for (const std::string& a : t.args) ids.push_back(lookup(a));
    bool v = false;
    try {
      v = eval_test(t.kind, ids, s_.cfg());
    } catch (const std::invalid_argument& e) {
      throw ScriptAbort{e.what()};
    }
    if (hooks_) hooks_->on_test(t, ids, v, s_.cfg());
    return v;
  }

  bool exec_block(const lang::Block& b) {
    for (const lang::Stmt& st : b)
      if (!exec_stmt(st)) return false;
    return true;
  }

  bool exec_stmt(const lang::Stmt& st) {
    try {
      return std::visit([&](const auto& node) { return exec(node); }, st.node);
    } catch (const KernelError& e) {
      throw ScriptAbort{e.what()};
    }
  }

  bool exec(const lang::StLet& st) {
    int id = -1;
    if (const auto* j = std::get_if<lang::ExprJoin>(&st.expr)) {
      id = s_.join_line(lookup(j->p), lookup(j->q));
    } else if (const auto* m = std::get_if<lang::ExprMeet>(&st.expr)) {
      id = s_.meet_point(lookup(m->l), lookup(m->m));
    } else if (const auto* c = std::get_if<lang::ExprCircle>(&st.expr)) {
      id = s_.draw_circle(lookup(c->center), lookup(c->from), lookup(c->to));
    } else {
      const auto& x = std::get<lang::ExprIntersect>(st.expr);
      const std::vector<int> ids = s_.intersect(lookup(x.a), lookup(x.b));
      if (static_cast<std::size_t>(x.index) >= ids.size())
        throw ScriptAbort{"intersection label [" + std::to_string(x.index) +
                          "] selects a point that does not exist"};
      id = ids[x.index];
    }
    env_[st.id] = id;
    return !s_.done();
  }

  bool exec(const lang::StRequest& st) {
    OpenSet u;
    for (const lang::SetAtom& atom : st.set.atoms) {
      if (const auto* d = std::get_if<lang::SetAtomDisc>(&atom)) {
        u.atoms.push_back(DiscAtom{Real::parse(d->cx, s_.cfg().tower()),
                                   Real::parse(d->cy, s_.cfg().tower()), d->radius});
      } else {
        const auto& h = std::get<lang::SetAtomHalfplane>(atom);
        u.atoms.push_back(HalfplaneAtom{lookup(h.line), h.side});
      }
    }
    env_[st.id] = s_.request(u);
    return !s_.done();
  }

  bool exec(const lang::StIf& st) {
    return exec_block(eval(st.test) ? st.then_block : st.else_block);
  }

  bool exec(const lang::StRepeat& st) {
    for (long i = 0; i < st.count; ++i)
      if (!exec_block(st.body)) return false;
    return true;
  }

  bool exec(const lang::StOutput& st) {
    s_.record_output(lookup(st.id));
    return true;
  }

  bool exec(const lang::StAssert& st) {
    if (!eval(st.test)) throw ScriptAbort{"assert failed"};
    return true;
  }

  Session& s_;
  PlayHooks* hooks_;
  std::map<std::string, int> env_;
};

}  // namespace

Trace play(const lang::Script& script, Configuration initial, const GeomObject& target,
           Adversary& adv, long max_moves, PlayHooks* hooks) {
  Session s(std::move(initial), target, adv, max_moves, hooks);
  const int initial_size = s.cfg().size();
  std::string note;
  if (!s.done()) {
    ScriptRunner runner(s, hooks);
    try {
      runner.run(script, initial_size);
    } catch (const ScriptAbort& a) {
      note = "script failed: " + a.reason;
    }
  }
  return s.finish(std::move(note));
}

// ---- forcing fragments ----

namespace {

// Largest k-bit dyadic strictly below sqrt(v), for v > 0.
Rat dyadic_below_sqrt(const Rat& v) {
  for (long k = 12;; k += 12) {
    const mpz_class scaled = (v.num() << (2 * k)) / v.den();
    const mpz_class root = sqrt(scaled);
    if (root >= 2) return Rat(root - 1, mpz_class(1) << k);
  }
}

Rat dyadic_above_sqrt(const Rat& v) {
  const long k = 12;
  const mpz_class scaled = ((v.num() << (2 * k)) + v.den() - 1) / v.den();
  const mpz_class root = sqrt(scaled);
  return Rat(root + 1, mpz_class(1) << k);
}

}  // namespace

int force_point_on_curve(Session& s, int curve_id) {
  const GeomObject& obj = s.cfg().object(curve_id);
  if (std::holds_alternative<HLine>(obj)) {
    OpenSet above, below;
    above.atoms.push_back(HalfplaneAtom{curve_id, 1});
    below.atoms.push_back(HalfplaneAtom{curve_id, -1});
    const int p1 = s.request(above);
    const int p2 = s.request(below);
    return s.meet_point(s.join_line(p1, p2), curve_id);
  }
  const auto* c = std::get_if<Conic>(&obj);
  if (!c || !is_circle(*c)) throw KernelError("forcing needs a line or circle");
  const HPoint center = circle_center(*c);
  const Real r2 = circle_radius2(*c);
  Rat inner, outer;
  for (unsigned prec = 16;; prec *= 2) {
    const DyadicInterval iv = r2.approx(prec);
    if (iv.lo.sign() > 0) {
      inner = dyadic_below_sqrt(iv.lo);
      outer = dyadic_above_sqrt(iv.hi);
      break;
    }
  }
  OpenSet inside;
  inside.atoms.push_back(DiscAtom{center.affine_x(), center.affine_y(), inner});
  const int p1 = s.request(inside);
  OpenSet outside;
  outside.atoms.push_back(
      DiscAtom{center.affine_x() + Real(outer) + Real(1), center.affine_y(), Rat(1, 2)});
  const int p2 = s.request(outside);
  const std::vector<int> pts = s.intersect(s.join_line(p1, p2), curve_id);
  if (pts.empty()) throw std::logic_error("a line through an interior point must cross the circle");
  return pts[0];
}

std::array<int, 4> force_generic_quadruple(Session& s) {
  const std::array<std::pair<long, long>, 4> seeds = {{{0, 0}, {1, 0}, {0, 1}, {2, 3}}};
  std::array<int, 4> ids{};
  for (int i = 0; i < 4; ++i) {
    OpenSet u;
    u.atoms.push_back(DiscAtom{Real(Rat(seeds[i].first)), Real(Rat(seeds[i].second)), Rat(1, 100)});
    ids[i] = s.request(u);
  }
  const auto pt = [&](int id) { return std::get<HPoint>(s.cfg().object(id)); };
  if (!generic_quadruple_check(pt(ids[0]), pt(ids[1]), pt(ids[2]), pt(ids[3])))
    throw std::logic_error("responses inside the certified discs must form a generic quadruple");
  return ids;
}

}  // namespace sclab
