#include "sclab/closure.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <queue>
#include <sstream>

namespace sclab {

std::string OpSet::str() const {
  std::string out;
  auto put = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  put(join, "joins");
  put(meet, "meets");
  put(line_conic, "lineconic");
  put(conic_conic, "conicconic");
  put(compass, "compass");
  return out;
}

std::optional<OpSet> OpSet::parse(std::string_view flags) {
  OpSet ops{false, false, false, false, false};
  std::size_t start = 0;
  while (start <= flags.size()) {
    std::size_t comma = flags.find(',', start);
    if (comma == std::string_view::npos) comma = flags.size();
    std::string_view tok = flags.substr(start, comma - start);
    if (tok == "joins") ops.join = true;
    else if (tok == "meets") ops.meet = true;
    else if (tok == "lineconic") ops.line_conic = true;
    else if (tok == "conicconic") ops.conic_conic = true;
    else if (tok == "compass") ops.compass = true;
    else if (tok == "all") ops = OpSet::all();
    else if (!tok.empty()) return std::nullopt;
    start = comma + 1;
  }
  if (!ops.any()) return std::nullopt;
  return ops;
}

Budget Budget::from_env() {
  Budget b;
  auto read = [](const char* name, std::size_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0' || parsed == 0) return fallback;
    return static_cast<std::size_t>(parsed);
  };
  b.max_objects = read("SCLAB_MAX_OBJECTS", b.max_objects);
  b.max_tower_levels = read("SCLAB_MAX_TOWER_LEVELS", b.max_tower_levels);
  b.max_expr_nodes = read("SCLAB_MAX_EXPR_NODES", b.max_expr_nodes);
  return b;
}

std::string GrowthStats::csv() const {
  std::ostringstream os;
  os << "depth,points,lines,conics\n";
  for (const DepthCounts& row : per_depth)
    os << row.depth << "," << row.points << "," << row.lines << "," << row.conics << "\n";
  return os.str();
}

namespace {

// Applies budget limits to the configuration's tower for the duration of an
// engine call, restoring the previous limits afterwards.
struct TowerLimitGuard {
  TowerPtr tower;
  std::size_t old_nodes, old_levels;
  TowerLimitGuard(const TowerPtr& t, const Budget& b)
      : tower(t), old_nodes(t->node_limit()), old_levels(t->level_limit()) {
    tower->set_node_limit(b.max_expr_nodes);
    tower->set_level_limit(b.max_tower_levels);
  }
  ~TowerLimitGuard() {
    tower->set_node_limit(old_nodes);
    tower->set_level_limit(old_levels);
  }
};

// One closure round over cfg. Only candidates with at least one parent id
// >= frontier are evaluated; with frontier 0 that is every candidate. The
// enumeration order is fixed (joins, meets, line-conic, conic-conic,
// compass, each in ascending id order), which pins object ids and makes
// closure output deterministic.
std::size_t run_round(Configuration& cfg, const OpSet& ops, const Budget& budget, int frontier,
                      int step_index) {
  const int n = cfg.size();
  std::size_t added = 0;
  auto pts = cfg.point_ids();
  auto lns = cfg.line_ids();
  auto cns = cfg.conic_ids();
  auto below_n = [&](std::vector<int>& ids) {
    while (!ids.empty() && ids.back() >= n) ids.pop_back();
  };
  below_n(pts);
  below_n(lns);
  below_n(cns);

  auto add = [&](const GeomObject& obj, OpKind op, std::vector<int> parents, int idx) {
    auto res = cfg.insert(obj, Provenance{op, std::move(parents), idx, step_index});
    if (res.inserted) {
      ++added;
      if (static_cast<std::size_t>(cfg.size()) > budget.max_objects)
        throw BudgetExceeded("closure object budget exceeded");
    }
  };
  auto point_at = [&](int id) { return std::get<HPoint>(cfg.object(id)); };
  auto line_at = [&](int id) { return std::get<HLine>(cfg.object(id)); };
  auto conic_at = [&](int id) { return std::get<Conic>(cfg.object(id)); };

  if (ops.join)
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (pts[j] < frontier) continue;
        try {
          add(join(point_at(pts[i]), point_at(pts[j])), OpKind::Join, {pts[i], pts[j]}, 0);
        } catch (const KernelError&) {
        }
      }
  if (ops.meet)
    for (std::size_t i = 0; i < lns.size(); ++i)
      for (std::size_t j = i + 1; j < lns.size(); ++j) {
        if (lns[j] < frontier) continue;
        try {
          add(meet(line_at(lns[i]), line_at(lns[j])), OpKind::Meet, {lns[i], lns[j]}, 0);
        } catch (const KernelError&) {
        }
      }
  if (ops.line_conic)
    for (int l : lns)
      for (int c : cns) {
        if (l < frontier && c < frontier) continue;
        try {
          auto hits = line_conic_intersections(line_at(l), conic_at(c), cfg.tower());
          for (std::size_t k = 0; k < hits.size(); ++k)
            add(hits[k], OpKind::LineConic, {l, c}, static_cast<int>(k));
        } catch (const KernelError&) {
        }
      }
  if (ops.conic_conic)
    for (std::size_t i = 0; i < cns.size(); ++i)
      for (std::size_t j = i + 1; j < cns.size(); ++j) {
        if (cns[j] < frontier) continue;
        try {
          auto hits = circle_circle_intersections(conic_at(cns[i]), conic_at(cns[j]), cfg.tower());
          for (std::size_t k = 0; k < hits.size(); ++k)
            add(hits[k], OpKind::ConicConic, {cns[i], cns[j]}, static_cast<int>(k));
        } catch (const KernelError&) {
        }
      }
  if (ops.compass)
    for (int o : pts)
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          if (o < frontier && pts[j] < frontier) continue;
          try {
            add(circle_from(point_at(o), point_at(pts[i]), point_at(pts[j])), OpKind::Compass,
                {o, pts[i], pts[j]}, 0);
          } catch (const KernelError&) {
          }
        }
  return added;
}

int max_step(const Configuration& cfg) {
  int m = 0;
  for (int i = 0; i < cfg.size(); ++i) m = std::max(m, cfg.provenance(i).step);
  return m;
}

}  // namespace

StepResult closure_step(const Configuration& cfg, const OpSet& ops, const Budget& budget) {
  Configuration next = cfg;
  TowerLimitGuard guard(next.tower(), budget);
  const std::size_t added = run_round(next, ops, budget, 0, max_step(cfg) + 1);
  return {std::move(next), added == 0};
}

std::pair<Configuration, GrowthStats> closure_to_depth(const Configuration& cfg, int depth,
                                                       const OpSet& ops, const Budget& budget) {
  Configuration cur = cfg;
  TowerLimitGuard guard(cur.tower(), budget);
  GrowthStats stats;
  auto record = [&](int d) {
    auto c = cur.counts();
    stats.per_depth.push_back({d, c.points, c.lines, c.conics});
  };
  record(0);
  int frontier = 0;
  const int base_step = max_step(cfg);
  for (int d = 1; d <= depth; ++d) {
    const int before = cur.size();
    const std::size_t added = run_round(cur, ops, budget, frontier, base_step + d);
    frontier = before;
    record(d);
    stats.depth_completed = d;
    if (added == 0) {
      stats.reached_fixed_point = true;
      break;
    }
  }
  return {std::move(cur), std::move(stats)};
}

bool generic_quadruple_check(const HPoint& p1, const HPoint& p2, const HPoint& p3,
                             const HPoint& p4) {
  const HPoint pts[4] = {p1, p2, p3, p4};
  for (int i = 0; i < 4; ++i) {
    if (pts[i].is_infinite()) return false;
    for (int j = i + 1; j < 4; ++j)
      if (pts[i] == pts[j]) return false;
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (collinear(pts[i], pts[j], pts[k])) return false;
  std::vector<HLine> lines;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) lines.push_back(join(pts[i], pts[j]));
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j)
      if (parallel(lines[i], lines[j])) return false;
  return true;
}

// ---- density probe ----

namespace {

constexpr double kInf = 1e300;

// float snapshot of an object, for candidate scoring only
struct FObj {
  int type = 0;  // 0 point, 1 line, 2 conic
  double x = 0, y = 0;
  bool finite = false;
  double l[3] = {0, 0, 0};
  double cx = 0, cy = 0, r = -1;  // circles; r < 0 for other conics
};

FObj float_snapshot(const GeomObject& obj) {
  FObj f;
  if (const auto* p = std::get_if<HPoint>(&obj)) {
    f.type = 0;
    f.finite = !p->is_infinite();
    if (f.finite) {
      f.x = p->affine_x().to_double();
      f.y = p->affine_y().to_double();
    }
  } else if (const auto* l = std::get_if<HLine>(&obj)) {
    f.type = 1;
    for (int i = 0; i < 3; ++i) f.l[i] = l->h()[i].to_double();
  } else {
    const auto& c = std::get<Conic>(obj);
    f.type = 2;
    if (is_circle(c)) {
      f.cx = -c.m()(0, 2).to_double();
      f.cy = -c.m()(1, 2).to_double();
      f.r = std::sqrt(std::max(0.0, circle_radius2(c).to_double()));
    }
  }
  return f;
}

double line_target_dist(const double l[3], double tx, double ty) {
  const double denom = std::hypot(l[0], l[1]);
  if (denom < 1e-12) return kInf;
  return std::abs(l[0] * tx + l[1] * ty + l[2]) / denom;
}

double circle_target_dist(const FObj& c, double tx, double ty) {
  if (c.r < 0) return kInf / 2;  // non-circle conic: weak signal, try late
  return std::abs(std::hypot(tx - c.cx, ty - c.cy) - c.r);
}

struct Cand {
  double score;
  std::uint64_t seq;
  OpKind op;
  int a, b, c;
};
struct CandWorse {
  bool operator()(const Cand& x, const Cand& y) const {
    if (x.score != y.score) return x.score > y.score;
    return x.seq > y.seq;
  }
};

}  // namespace

ProbeResult density_probe(const Configuration& cfg, const HPoint& target, const Rat& epsilon,
                          const OpSet& ops, const Budget& budget) {
  if (epsilon.sign() <= 0) throw std::invalid_argument("density_probe: epsilon must be positive");
  target.require_finite();

  ProbeResult result;
  Configuration work = cfg;
  TowerLimitGuard guard(work.tower(), budget);

  const Real tx = target.affine_x(), ty = target.affine_y();
  const Real eps = Real(epsilon);
  const double ftx = tx.to_double(), fty = ty.to_double();

  auto box_hit = [&](const HPoint& p) {
    if (p.is_infinite()) return false;
    return (eps - (p.affine_x() - tx).abs()).sign() > 0 &&
           (eps - (p.affine_y() - ty).abs()).sign() > 0;
  };

  std::vector<FObj> floats;
  std::vector<Cand> cands;
  std::priority_queue<Cand, std::vector<Cand>, CandWorse> best;
  std::size_t fifo_next = 0;
  const std::size_t max_cands = 64 * budget.max_objects;

  auto push_cand = [&](OpKind op, int a, int b, int c, double score) {
    if (cands.size() >= max_cands) return;
    Cand cd{score, cands.size(), op, a, b, c};
    cands.push_back(cd);
    best.push(cd);
  };

  // candidates pairing `id` with everything older
  auto gen_for = [&](int id) {
    const FObj& fn = floats[id];
    for (int o = 0; o < id; ++o) {
      const FObj& fo = floats[o];
      if (ops.join && fn.type == 0 && fo.type == 0) {
        double l0 = 0, l1 = 0, l2 = 0, score = kInf;
        if (fn.finite && fo.finite) {
          l0 = fo.y - fn.y;
          l1 = fn.x - fo.x;
          l2 = fo.x * fn.y - fn.x * fo.y;
          const double l[3] = {l0, l1, l2};
          score = line_target_dist(l, ftx, fty);
        }
        push_cand(OpKind::Join, o, id, -1, score);
      }
      if (ops.meet && fn.type == 1 && fo.type == 1) {
        const double px = fn.l[1] * fo.l[2] - fn.l[2] * fo.l[1];
        const double py = fn.l[2] * fo.l[0] - fn.l[0] * fo.l[2];
        const double pz = fn.l[0] * fo.l[1] - fn.l[1] * fo.l[0];
        double score = kInf;
        if (std::abs(pz) > 1e-12) score = std::hypot(px / pz - ftx, py / pz - fty);
        push_cand(OpKind::Meet, o, id, -1, score);
      }
      if (ops.line_conic && ((fn.type == 1 && fo.type == 2) || (fn.type == 2 && fo.type == 1))) {
        const FObj& fl = fn.type == 1 ? fn : fo;
        const FObj& fc = fn.type == 2 ? fn : fo;
        const int lid = fn.type == 1 ? static_cast<int>(id) : o;
        const int cid = fn.type == 2 ? static_cast<int>(id) : o;
        const double score =
            std::max(line_target_dist(fl.l, ftx, fty), circle_target_dist(fc, ftx, fty));
        push_cand(OpKind::LineConic, lid, cid, -1, score);
      }
      if (ops.conic_conic && fn.type == 2 && fo.type == 2)
        push_cand(OpKind::ConicConic, o, id, -1,
                  std::max(circle_target_dist(fn, ftx, fty), circle_target_dist(fo, ftx, fty)));
    }
    if (ops.compass && fn.type == 0) {
      auto compass_score = [&](int cen, int a, int b) {
        const FObj &fc = floats[cen], &fa = floats[a], &fb = floats[b];
        if (!fc.finite || !fa.finite || !fb.finite) return kInf;
        const double r = std::hypot(fa.x - fb.x, fa.y - fb.y);
        return std::abs(std::hypot(ftx - fc.x, fty - fc.y) - r);
      };
      std::vector<int> older;
      for (int o = 0; o < id; ++o)
        if (floats[o].type == 0) older.push_back(o);
      // center = id, radius pair among older points
      for (std::size_t i = 0; i < older.size(); ++i)
        for (std::size_t j = i + 1; j < older.size(); ++j)
          push_cand(OpKind::Compass, id, older[i], older[j],
                    compass_score(id, older[i], older[j]));
      // radius pair (a, id): every point (older or id itself) as center
      for (int a : older) {
        for (int cen : older)
          push_cand(OpKind::Compass, cen, a, id, compass_score(cen, a, id));
        push_cand(OpKind::Compass, id, a, id, compass_score(id, a, id));
      }
    }
  };

  // returns witness id or -1
  auto note_insert = [&](Configuration::InsertResult res) -> int {
    if (!res.inserted) return -1;
    floats.push_back(float_snapshot(work.object(res.id)));
    if (const auto* p = std::get_if<HPoint>(&work.object(res.id)))
      if (box_hit(*p)) return res.id;
    gen_for(res.id);
    return -1;
  };

  // seed: existing objects participate like fresh insertions
  for (int id = 0; id < work.size(); ++id) {
    floats.push_back(float_snapshot(work.object(id)));
    if (const auto* p = std::get_if<HPoint>(&work.object(id)))
      if (box_hit(*p)) {
        result.witness = *p;
        result.witness_depth = work.provenance(id).step;
        result.objects_explored = work.size();
        return result;
      }
  }
  for (int id = 0; id < work.size(); ++id) gen_for(id);

  auto depth_of = [&](const std::vector<int>& parents) {
    int d = 0;
    for (int p : parents) d = std::max(d, work.provenance(p).step);
    return d + 1;
  };

  auto execute = [&](const Cand& cd) -> int {
    auto point_at = [&](int i) { return std::get<HPoint>(work.object(i)); };
    auto line_at = [&](int i) { return std::get<HLine>(work.object(i)); };
    auto conic_at = [&](int i) { return std::get<Conic>(work.object(i)); };
    try {
      switch (cd.op) {
        case OpKind::Join: {
          std::vector<int> ps{cd.a, cd.b};
          return note_insert(work.insert(join(point_at(cd.a), point_at(cd.b)),
                                         Provenance{cd.op, ps, 0, depth_of(ps)}));
        }
        case OpKind::Meet: {
          std::vector<int> ps{cd.a, cd.b};
          return note_insert(work.insert(meet(line_at(cd.a), line_at(cd.b)),
                                         Provenance{cd.op, ps, 0, depth_of(ps)}));
        }
        case OpKind::LineConic: {
          std::vector<int> ps{cd.a, cd.b};
          auto hits = line_conic_intersections(line_at(cd.a), conic_at(cd.b), work.tower());
          for (std::size_t k = 0; k < hits.size(); ++k) {
            int w = note_insert(work.insert(
                hits[k], Provenance{cd.op, ps, static_cast<int>(k), depth_of(ps)}));
            if (w >= 0) return w;
          }
          return -1;
        }
        case OpKind::ConicConic: {
          std::vector<int> ps{cd.a, cd.b};
          auto hits = circle_circle_intersections(conic_at(cd.a), conic_at(cd.b), work.tower());
          for (std::size_t k = 0; k < hits.size(); ++k) {
            int w = note_insert(work.insert(
                hits[k], Provenance{cd.op, ps, static_cast<int>(k), depth_of(ps)}));
            if (w >= 0) return w;
          }
          return -1;
        }
        case OpKind::Compass: {
          std::vector<int> ps{cd.a, cd.b, cd.c};
          return note_insert(work.insert(circle_from(point_at(cd.a), point_at(cd.b),
                                                     point_at(cd.c)),
                                         Provenance{cd.op, ps, 0, depth_of(ps)}));
        }
        default:
          return -1;
      }
    } catch (const KernelError&) {
      return -1;
    }
  };

  std::vector<bool> executed;
  auto run_cand = [&](const Cand& cd) -> int {
    if (cd.seq < executed.size() && executed[cd.seq]) return -1;
    if (executed.size() <= cd.seq) executed.resize(cd.seq + 1, false);
    executed[cd.seq] = true;
    return execute(cd);
  };

  try {
    std::size_t pops = 0;
    while (!best.empty() || fifo_next < cands.size()) {
      if (static_cast<std::size_t>(work.size()) >= budget.max_objects) {
        result.budget_exhausted = true;
        break;
      }
      int witness_id = -1;
      // every fourth pop comes from the breadth lane so distant candidates
      // cannot starve
      if (++pops % 4 == 0 && fifo_next < cands.size()) {
        witness_id = run_cand(cands[fifo_next++]);
      } else if (!best.empty()) {
        Cand cd = best.top();
        best.pop();
        witness_id = run_cand(cd);
      } else {
        witness_id = run_cand(cands[fifo_next++]);
      }
      if (witness_id >= 0) {
        result.witness = std::get<HPoint>(work.object(witness_id));
        result.witness_depth = work.provenance(witness_id).step;
        break;
      }
    }
  } catch (const BudgetExceeded&) {
    result.budget_exhausted = true;
  }
  if (!result.witness && !result.budget_exhausted && cands.size() >= max_cands)
    result.budget_exhausted = true;
  result.objects_explored = work.size();
  return result;
}

}  // namespace sclab
