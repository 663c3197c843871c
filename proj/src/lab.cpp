#include "sclab/lab.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace sclab {

namespace {

GeomObject map_object(const ProjMap& t, const GeomObject& g) {
  return std::visit([&](const auto& o) -> GeomObject { return GeomObject(apply_map(t, o)); }, g);
}

std::string object_text(const GeomObject& g) {
  return std::visit([](const auto& o) { return to_text(o); }, g);
}

// Image of a play under a projective map, maintained move by move. In verify
// mode every deterministic move is recomputed from the image objects and
// checked against the transported original result; in structural mode the
// moves are only recomputed, and multi-point intersections keep the index
// labeling of the image world (labels are a coordinate convention, so they
// may pair up differently than in the original play).
struct ImageReplay {
  const ProjMap& t;
  bool verify;
  Configuration img;
  std::vector<int> phi;                     // original id -> image id
  std::vector<std::vector<int>> responses;  // image response ids per move

  ImageReplay(const ProjMap& map, const Configuration& orig, int prefix, bool verify_mode)
      : t(map), verify(verify_mode), img(orig.tower()) {
    for (int id = 0; id < prefix; ++id)
      set_phi(id, img.insert(map_object(t, orig.object(id)), orig.provenance(id)).id);
  }

  void set_phi(int orig_id, int img_id) {
    if (orig_id >= static_cast<int>(phi.size())) phi.resize(orig_id + 1, -1);
    if (phi[orig_id] >= 0 && phi[orig_id] != img_id)
      throw StepInvalid("object " + std::to_string(orig_id) + " maps to two distinct images");
    phi[orig_id] = img_id;
  }

  int at(int orig_id) const {
    if (orig_id < 0 || orig_id >= static_cast<int>(phi.size()) || phi[orig_id] < 0)
      throw StepInvalid("move references object " + std::to_string(orig_id) + " with no image");
    return phi[orig_id];
  }

  const HPoint& ipt(int orig_id) const {
    const auto* p = std::get_if<HPoint>(&img.object(at(orig_id)));
    if (!p) throw StepInvalid("expected a point image");
    return *p;
  }
  const HLine& iln(int orig_id) const {
    const auto* l = std::get_if<HLine>(&img.object(at(orig_id)));
    if (!l) throw StepInvalid("expected a line image");
    return *l;
  }

  Provenance remap(const Provenance& pr) const {
    Provenance out = pr;
    for (int& p : out.parents) p = at(p);
    return out;
  }

  // Recomputes one original move in the image world. Returns "" on success
  // or a mismatch description (verify mode); structural breakdowns throw.
  std::string step(const Move& mv, const Configuration& orig) {
    responses.emplace_back();
    std::vector<int>& out_ids = responses.back();

    const auto transported = [&](int orig_id) { return map_object(t, orig.object(orig_id)); };
    const auto record = [&](const GeomObject& value, int orig_id) {
      const Provenance pr = remap(orig.provenance(orig_id));
      const int id = img.insert(value, pr).id;
      set_phi(orig_id, id);
      out_ids.push_back(id);
    };

    try {
      switch (mv.kind) {
        case Move::Kind::Join: {
          const GeomObject ln{join(ipt(mv.args[0]), ipt(mv.args[1]))};
          if (verify && !geom_equal(ln, transported(mv.response.at(0))))
            return "joined image differs from the transported line";
          record(ln, mv.response.at(0));
          return {};
        }
        case Move::Kind::Meet: {
          const GeomObject p{meet(iln(mv.args[0]), iln(mv.args[1]))};
          if (verify && !geom_equal(p, transported(mv.response.at(0))))
            return "met image differs from the transported point";
          record(p, mv.response.at(0));
          return {};
        }
        case Move::Kind::Circle: {
          const GeomObject c{circle_from(ipt(mv.args[0]), ipt(mv.args[1]), ipt(mv.args[2]))};
          if (verify && !geom_equal(c, transported(mv.response.at(0))))
            return "compass move does not transport: the drawn image circle is "
                   "not the image of the drawn circle";
          record(c, mv.response.at(0));
          return {};
        }
        case Move::Kind::Intersect: {
          const GeomObject& a = img.object(at(mv.args[0]));
          const GeomObject& b = img.object(at(mv.args[1]));
          if (std::holds_alternative<HLine>(a) && std::holds_alternative<HLine>(b)) {
            const GeomObject p{meet(std::get<HLine>(a), std::get<HLine>(b))};
            if (verify && !geom_equal(p, transported(mv.response.at(0))))
              return "met image differs from the transported point";
            record(p, mv.response.at(0));
            return {};
          }
          std::vector<HPoint> pts;
          if (const auto* l = std::get_if<HLine>(&a))
            pts = line_conic_intersections(*l, std::get<Conic>(b), img.tower());
          else if (const auto* l2 = std::get_if<HLine>(&b))
            pts = line_conic_intersections(*l2, std::get<Conic>(a), img.tower());
          else {
            try {
              pts = circle_circle_intersections(std::get<Conic>(a), std::get<Conic>(b),
                                                img.tower());
            } catch (const ConcentricCircles&) {
              pts.clear();
            }
          }
          if (pts.size() != mv.response.size()) {
            const std::string msg = "intersection count changes under the map";
            if (verify) return msg;
            throw StepInvalid(msg);
          }
          if (!verify) {
            // image-world labeling: index k of the original pairs with index
            // k of the image
            for (size_t k = 0; k < pts.size(); ++k)
              record(GeomObject(pts[k]), mv.response[k]);
            return {};
          }
          // verify mode: match transported originals against the image
          // points by value, then insert in image order
          std::vector<int> orig_of(pts.size(), -1);
          for (int r : mv.response) {
            const GeomObject want = transported(r);
            int hit = -1;
            for (size_t j = 0; j < pts.size(); ++j) {
              if (!geom_equal(GeomObject(pts[j]), want)) continue;
              if (hit >= 0) throw StepInvalid("two image intersection points coincide");
              hit = static_cast<int>(j);
            }
            if (hit < 0) return "an intersection point's image is missing from the recomputation";
            if (orig_of[hit] >= 0)
              throw StepInvalid("two originals transport to one intersection point");
            orig_of[hit] = r;
          }
          for (size_t j = 0; j < pts.size(); ++j) {
            Provenance pr = remap(orig.provenance(orig_of[j]));
            pr.output_index = static_cast<int>(j);
            const int id = img.insert(GeomObject(pts[j]), pr).id;
            set_phi(orig_of[j], id);
            out_ids.push_back(id);
          }
          return {};
        }
        case Move::Kind::Request: {
          record(transported(mv.response.at(0)), mv.response.at(0));
          return {};
        }
      }
    } catch (const KernelError& e) {
      const std::string msg = std::string("image recomputation failed: ") + e.what();
      if (verify) return msg;
      throw StepInvalid(msg);
    }
    throw StepInvalid("unknown move kind");
  }
};

}  // namespace

TransformReport transform_trace(const Trace& trace, const ProjMap& t) {
  TransformReport rep;
  ImageReplay ir(t, trace.cfg, trace.initial_size, /*verify=*/true);
  for (size_t i = 0; i < trace.moves.size(); ++i) {
    const std::string err = ir.step(trace.moves[i], trace.cfg);
    if (!err.empty()) {
      rep.failed_move = static_cast<int>(i);
      rep.message = "move " + std::to_string(i) + ": " + err;
      rep.mapped = std::move(ir.phi);
      return rep;
    }
  }

  Trace out;
  out.cfg = std::move(ir.img);
  out.initial_size = trace.initial_size;
  out.target = map_object(t, trace.target);
  out.moves = trace.moves;
  for (size_t i = 0; i < out.moves.size(); ++i) {
    for (int& a : out.moves[i].args) a = ir.phi[a];
    out.moves[i].response = ir.responses[i];
  }
  out.outputs = trace.outputs;
  for (int& o : out.outputs) o = ir.phi[o];
  out.outcome = trace.outcome;
  out.won_at = trace.won_at;
  out.adversary = trace.adversary;
  out.max_moves = trace.max_moves;
  out.note = trace.note;

  rep.ok = true;
  rep.trace = std::move(out);
  rep.mapped = std::move(ir.phi);
  return rep;
}

namespace {

bool block_has_test(const lang::Block& b);

bool stmt_has_test(const lang::Stmt& s) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, lang::StIf> || std::is_same_v<T, lang::StAssert>)
          return true;
        else if constexpr (std::is_same_v<T, lang::StRepeat>)
          return block_has_test(n.body);
        else
          return false;
      },
      s.node);
}

bool block_has_test(const lang::Block& b) {
  return std::any_of(b.begin(), b.end(), stmt_has_test);
}

struct TwinHooks final : PlayHooks {
  ImageReplay ir;
  int evals = 0;
  std::optional<DivergenceWitness> witness;

  TwinHooks(const ProjMap& t, const Configuration& initial)
      : ir(t, initial, initial.size(), /*verify=*/false) {}

  void on_move(const Move& mv, const Configuration& cfg) override {
    if (witness) return;
    ir.step(mv, cfg);
  }

  void on_test(const lang::Test& test, const std::vector<int>& ids, bool value,
               const Configuration& cfg) override {
    if (witness) return;
    const int index = evals++;
    std::vector<int> img_ids;
    img_ids.reserve(ids.size());
    for (int id : ids) img_ids.push_back(ir.at(id));
    bool image_value = false;
    try {
      image_value = eval_test(test.kind, img_ids, ir.img);
    } catch (const std::invalid_argument& e) {
      throw StepInvalid(std::string("twin test evaluation failed: ") + e.what());
    }
    if (image_value == value) return;

    DivergenceWitness w;
    w.test = test.kind;
    w.pos = test.pos;
    w.eval_index = index;
    w.original_value = value;
    w.transformed_value = image_value;
    w.operands = ids;
    std::ostringstream os;
    os << lang::test_kind_name(test.kind) << " at line " << test.pos.line << ": original "
       << (value ? "true" : "false") << ", image " << (image_value ? "true" : "false");
    for (int id : ids)
      os << "\n  " << object_text(cfg.object(id)) << "  ->  "
         << object_text(ir.img.object(ir.at(id)));
    w.detail = os.str();
    witness = std::move(w);
  }
};

}  // namespace

std::optional<DivergenceWitness> find_test_divergence(const lang::Script& script,
                                                      Configuration initial, const ProjMap& t,
                                                      Adversary& adversary, long max_moves) {
  if (!block_has_test(script.body))
    throw std::invalid_argument("divergence search needs a script with at least one test");
  TwinHooks hooks(t, initial);
  const GeomObject unreachable{
      HPoint::affine(Real(Rat(999999937)), Real(Rat(999999937)))};
  play(script, std::move(initial), unreachable, adversary, max_moves, &hooks);
  return hooks.witness;
}

namespace {

struct DefeatHooks final : PlayHooks {
  ImageReplay ir;
  const ProjMap& t;
  int checked = 0;

  DefeatHooks(const ProjMap& map, const Configuration& initial)
      : ir(map, initial, initial.size(), /*verify=*/true), t(map) {}

  void on_move(const Move& mv, const Configuration& cfg) override {
    const std::string err = ir.step(mv, cfg);
    if (!err.empty())
      throw InvariantViolation("move " + std::to_string(checked) + ": " + err);
    if (mv.kind == Move::Kind::Request) {
      const auto& p = std::get<HPoint>(cfg.object(mv.response.at(0)));
      const HPoint w = apply_map(t, p);
      if (w.is_infinite())
        throw InvariantViolation("adversary answer has an infinite image");
      if (!w.affine_x().as_rational() || !w.affine_y().as_rational())
        throw InvariantViolation("adversary answer has an irrational image");
    }
    ++checked;
  }
};

}  // namespace

DefeatReport defeat_strategy(const lang::Script& script, const HPoint& target, const Real& u,
                             const Real& t, long max_moves, TowerPtr tower) {
  Configuration initial(std::move(tower));
  Mat3<Real> m;
  m << Real(Rat(1)), Real(Rat(0)), Real(Rat(0)), Real(Rat(0)), Real(Rat(1)), Real(Rat(0)),
      Real(Rat(0)), Real(Rat(0)), Real(Rat(-1));
  initial.insert(GeomObject(Conic::from_matrix(m)), Provenance{});

  const ProjMap map = circle_preserving_map(u, t, initial.tower());
  auto adversary = pullback_adversary(map);
  DefeatHooks hooks(map, initial);
  Trace tr = play(script, initial, GeomObject(target), *adversary, max_moves, &hooks);

  DefeatReport rep;
  rep.won = tr.outcome == Outcome::Won;
  rep.center_absent = !tr.cfg.contains(GeomObject(target));
  rep.moves_played = static_cast<int>(tr.moves.size());
  rep.checked_moves = hooks.checked;

  std::ostringstream os;
  os << "pullback run: outcome " << outcome_name(tr.outcome) << " after " << rep.moves_played
     << " of " << max_moves << " moves; " << rep.checked_moves
     << " moves commute with the map and every adversary answer has a finite rational image; "
     << "target " << object_text(GeomObject(target))
     << (rep.center_absent ? " is absent from" : " appears in") << " the final configuration of "
     << tr.cfg.size() << " objects.";
  if (!tr.note.empty()) os << " Note: " << tr.note << ".";
  os << " This certifies the finite play only, not an unbounded impossibility.";
  rep.summary = os.str();
  rep.trace = std::move(tr);
  return rep;
}

// ---- rational-plane derivability ----

namespace {

using Triple = std::array<mpz_class, 3>;

Triple cross_t(const Triple& u, const Triple& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

bool is_zero(const Triple& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

mpz_class dot_t(const Triple& u, const Triple& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

Triple canon(Triple v) {
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), v[0].get_mpz_t(), v[1].get_mpz_t());
  mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v[2].get_mpz_t());
  if (g != 0)
    for (auto& c : v) c /= g;
  for (const auto& c : v) {
    if (c == 0) continue;
    if (c < 0)
      for (auto& x : v) x = -x;
    break;
  }
  return v;
}

std::string key_of(const Triple& v, bool line) {
  std::string k = line ? "L" : "P";
  for (const auto& c : v) {
    k += c.get_str();
    k += ',';
  }
  return k;
}

struct RObj {
  Triple v;
  bool line = false;
  int op = 0;  // 0 given, 1 join, 2 meet
  int pa = -1, pb = -1;
  int depth = 0;
};

Triple point_triple(const HPoint& p) {
  if (p.is_infinite()) throw std::invalid_argument("derivability needs finite points");
  const auto x = p.affine_x().as_rational();
  const auto y = p.affine_y().as_rational();
  if (!x || !y) throw std::invalid_argument("derivability needs rational coordinates");
  return canon({x->num() * y->den(), y->num() * x->den(), x->den() * y->den()});
}

std::string triple_text(const RObj& o) {
  if (!o.line) return "(" + Rat(o.v[0], o.v[2]).str() + ", " + Rat(o.v[1], o.v[2]).str() + ")";
  std::string s = "[";
  for (int i = 0; i < 3; ++i) s += (i ? " " : "") + o.v[i].get_str();
  return s + "]";
}

struct DeriveSearch {
  std::vector<RObj> objs;
  std::unordered_map<std::string, int> index;
  std::vector<int> points, lines;
  long max_objects;
  bool exhausted = false;

  explicit DeriveSearch(long budget) : max_objects(budget) {}

  int add(RObj o) {
    const std::string k = key_of(o.v, o.line);
    const auto it = index.find(k);
    if (it != index.end()) return -1;
    const int id = static_cast<int>(objs.size());
    objs.push_back(std::move(o));
    index.emplace(k, id);
    (objs[id].line ? lines : points).push_back(id);
    if (static_cast<long>(objs.size()) > max_objects) exhausted = true;
    return id;
  }

  std::string name(int id) const { return (objs[id].line ? "L" : "P") + std::to_string(id); }

  Derivation chain_for(int target_id) const {
    std::vector<int> want{target_id};
    std::vector<char> seen(objs.size(), 0);
    for (size_t i = 0; i < want.size(); ++i) {
      const int id = want[i];
      if (seen[id]) continue;
      seen[id] = 1;
      if (objs[id].pa >= 0) want.push_back(objs[id].pa);
      if (objs[id].pb >= 0) want.push_back(objs[id].pb);
    }
    std::sort(want.begin(), want.end());
    want.erase(std::unique(want.begin(), want.end()), want.end());
    Derivation d;
    d.depth = objs[target_id].depth;
    for (int id : want) {
      const RObj& o = objs[id];
      std::string line = name(id);
      if (o.op == 0)
        line += " = given " + triple_text(o);
      else
        line += std::string(" = ") + (o.op == 1 ? "join" : "meet") + "(" + name(o.pa) + ", " +
                name(o.pb) + ") = " + triple_text(o);
      d.steps.push_back(std::move(line));
    }
    return d;
  }
};

}  // namespace

DeriveResult rational_plane_derivability(const std::array<HPoint, 4>& seeds, const HPoint& target,
                                         long max_objects) {
  if (max_objects < 8) throw std::invalid_argument("derivability budget too small");
  DeriveSearch s(max_objects);
  for (const auto& p : seeds) {
    if (s.add(RObj{point_triple(p), false, 0, -1, -1, 0}) < 0)
      throw std::invalid_argument("seed points must be distinct");
  }
  const Triple goal = point_triple(target);
  const std::string goal_key = key_of(goal, false);

  DeriveResult res;
  const auto finish = [&](int id) {
    res.chain = s.chain_for(id);
    res.objects = static_cast<long>(s.objs.size());
    return res;
  };
  if (const auto it = s.index.find(goal_key); it != s.index.end()) return finish(it->second);

  // Tries to close the derivation through the pencil of lines at the target:
  // two distinct constructible lines through the target meet exactly there.
  // Candidate lines are the known ones incident with the target plus joins
  // of known point pairs collinear with it.
  const auto completion = [&]() -> int {
    struct Cand {
      int depth;
      std::string key;
      int id;  // existing line id, or -1
      int pa = -1, pb = -1;
    };
    std::vector<Cand> cands;
    for (int id : s.lines)
      if (dot_t(s.objs[id].v, goal) == 0)
        cands.push_back({s.objs[id].depth, key_of(s.objs[id].v, true), id});
    std::unordered_map<std::string, int> pencil;  // line key -> first point id
    for (int id : s.points) {
      const Triple l = canon(cross_t(s.objs[id].v, goal));
      if (is_zero(l)) continue;  // the target itself cannot occur here
      const std::string k = key_of(l, true);
      const auto it = pencil.find(k);
      if (it == pencil.end()) {
        pencil.emplace(k, id);
        continue;
      }
      if (s.index.count(k)) continue;  // already a known line
      if (it->second < 0) continue;    // this pencil line has its candidate
      const int q = it->second;
      const int depth = std::max(s.objs[q].depth, s.objs[id].depth) + 1;
      cands.push_back({depth, k, -1, q, id});
      it->second = -2;  // one candidate per pencil line
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      return a.depth != b.depth ? a.depth < b.depth : a.key < b.key;
    });
    // distinct keys, take the two shallowest
    std::vector<const Cand*> pick;
    for (const Cand& c : cands) {
      if (!pick.empty() && pick.back()->key == c.key) continue;
      if (std::any_of(pick.begin(), pick.end(),
                      [&](const Cand* p) { return p->key == c.key; }))
        continue;
      pick.push_back(&c);
      if (pick.size() == 2) break;
    }
    if (pick.size() < 2) return -1;
    std::array<int, 2> line_ids{};
    for (int i = 0; i < 2; ++i) {
      const Cand& c = *pick[i];
      if (c.id >= 0) {
        line_ids[i] = c.id;
        continue;
      }
      line_ids[i] = s.add(RObj{canon(cross_t(s.objs[c.pa].v, s.objs[c.pb].v)), true, 1, c.pa,
                               c.pb, c.depth});
    }
    const int d = std::max(s.objs[line_ids[0]].depth, s.objs[line_ids[1]].depth) + 1;
    return s.add(RObj{goal, false, 2, std::min(line_ids[0], line_ids[1]),
                      std::max(line_ids[0], line_ids[1]), d});
  };

  std::vector<int> frontier{0, 1, 2, 3};
  for (int depth = 1; !s.exhausted; ++depth) {
    if (const int hit = completion(); hit >= 0) return finish(hit);

    std::vector<int> fresh;
    const auto emit = [&](Triple v, bool line, int op, int pa, int pb) -> int {
      const int id =
          s.add(RObj{std::move(v), line, op, std::min(pa, pb), std::max(pa, pb), depth});
      if (id >= 0) fresh.push_back(id);
      return id;
    };
    for (int f : frontier) {
      if (s.exhausted) break;
      // copied: emit() grows s.objs, which may reallocate under a reference.
      // peers stays valid: joins grow lines while iterating points, meets
      // grow points while iterating lines.
      const RObj fo = s.objs[f];
      const auto& peers = fo.line ? s.lines : s.points;
      for (int other : peers) {
        if (other >= f) break;  // ids ascend; each pair once
        const Triple v = canon(cross_t(fo.v, s.objs[other].v));
        if (is_zero(v)) continue;
        if (fo.line) {
          if (v[2] == 0) continue;  // parallel lines: no affine meet
          const int id = emit(std::move(v), false, 2, other, f);
          if (id >= 0 && s.objs[id].v == goal) return finish(id);
        } else {
          emit(std::move(v), true, 1, other, f);
        }
        if (s.exhausted) break;
      }
    }
    if (fresh.empty() && !s.exhausted) {
      res.fixed_point = true;
      break;
    }
    frontier = std::move(fresh);
  }
  res.budget_exhausted = s.exhausted;
  if (s.exhausted) {
    // the truncated round may still have produced lines through the target
    if (const int hit = completion(); hit >= 0) return finish(hit);
  }
  res.objects = static_cast<long>(s.objs.size());
  return res;
}

}  // namespace sclab
