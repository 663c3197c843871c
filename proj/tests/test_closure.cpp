#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <sstream>

#include "sclab/closure.hpp"

using namespace sclab;

namespace {

HPoint pt(long x, long y) { return HPoint::affine(Real(Rat(x)), Real(Rat(y))); }
HPoint ptq(const Rat& x, const Rat& y) { return HPoint::affine(Real(x), Real(y)); }

Configuration seed_points(std::initializer_list<HPoint> pts, TowerPtr tower = nullptr) {
  Configuration cfg(std::move(tower));
  for (const HPoint& p : pts) cfg.insert(p, Provenance{});
  return cfg;
}

Configuration quadruple_seed() {
  return seed_points({pt(0, 0), pt(1, 0), pt(0, 1), pt(2, 3)});
}

std::string saved(const Configuration& cfg) {
  std::ostringstream os;
  cfg.save(os);
  return os.str();
}

}  // namespace

TEST_CASE("opset flags") {
  CHECK(OpSet::all().str() == "joins,meets,lineconic,conicconic,compass");
  CHECK(OpSet::straightedge().str() == "joins,meets,lineconic,conicconic");
  CHECK(!OpSet::straightedge().compass);
  CHECK(OpSet{false, false, false, false, false}.any() == false);

  auto parsed = OpSet::parse("joins,meets");
  REQUIRE(parsed.has_value());
  CHECK(parsed->join);
  CHECK(parsed->meet);
  CHECK(!parsed->line_conic);
  CHECK(!parsed->conic_conic);
  CHECK(!parsed->compass);
  CHECK(OpSet::parse("all")->compass);
  CHECK(OpSet::parse(OpSet::straightedge().str())->str() == OpSet::straightedge().str());
  CHECK(!OpSet::parse("lasers").has_value());
  CHECK(!OpSet::parse("").has_value());
}

TEST_CASE("budget from environment") {
  setenv("SCLAB_MAX_OBJECTS", "123", 1);
  setenv("SCLAB_MAX_TOWER_LEVELS", "7", 1);
  setenv("SCLAB_MAX_EXPR_NODES", "oops", 1);
  Budget b = Budget::from_env();
  CHECK(b.max_objects == 123);
  CHECK(b.max_tower_levels == 7);
  CHECK(b.max_expr_nodes == Budget{}.max_expr_nodes);
  unsetenv("SCLAB_MAX_OBJECTS");
  unsetenv("SCLAB_MAX_TOWER_LEVELS");
  unsetenv("SCLAB_MAX_EXPR_NODES");
  b = Budget::from_env();
  CHECK(b.max_objects == Budget{}.max_objects);
}

TEST_CASE("triangle closes under joins and meets") {
  Configuration cfg = seed_points({pt(0, 0), pt(1, 0), pt(0, 1)});
  const OpSet ops = *OpSet::parse("joins,meets");

  auto r1 = closure_step(cfg, ops);
  CHECK(!r1.fixed_point);
  CHECK(r1.cfg.counts().points == 3);
  CHECK(r1.cfg.counts().lines == 3);

  auto r2 = closure_step(r1.cfg, ops);
  CHECK(r2.fixed_point);
  CHECK(r2.cfg.size() == r1.cfg.size());

  auto [closed, stats] = closure_to_depth(cfg, 10, ops);
  CHECK(stats.reached_fixed_point);
  CHECK(stats.depth_completed == 2);
  CHECK(closed.counts().points == 3);
  CHECK(closed.counts().lines == 3);
}

TEST_CASE("quadruple growth counts") {
  auto [closed, stats] = closure_to_depth(quadruple_seed(), 2, *OpSet::parse("joins,meets"));
  REQUIRE(stats.per_depth.size() == 3);
  CHECK(stats.per_depth[0].points == 4);
  CHECK(stats.per_depth[0].lines == 0);
  CHECK(stats.per_depth[1].points == 4);
  CHECK(stats.per_depth[1].lines == 6);
  CHECK(stats.per_depth[2].points == 7);
  CHECK(stats.per_depth[2].lines == 6);
  CHECK(!stats.reached_fixed_point);
  CHECK(stats.csv() ==
        "depth,points,lines,conics\n0,4,0,0\n1,4,6,0\n2,7,6,0\n");

  // the three diagonal points of the complete quadrilateral
  CHECK(closed.contains(pt(-1, 0)));
  CHECK(closed.contains(pt(0, -3)));
  CHECK(closed.contains(ptq(Rat(2, 5), Rat(3, 5))));
  CHECK(!closed.contains(pt(1, 1)));
}

TEST_CASE("closure step equals stepwise depth closure") {
  const OpSet ops = *OpSet::parse("joins,meets");
  Configuration byhand = quadruple_seed();
  for (int i = 0; i < 3; ++i) byhand = closure_step(byhand, ops).cfg;
  auto [bydepth, stats] = closure_to_depth(quadruple_seed(), 3, ops);
  CHECK(saved(byhand) == saved(bydepth));
}

TEST_CASE("straightedge cannot leave an initial circle") {
  auto tower = Tower::create();
  Configuration cfg(tower);
  cfg.insert(circle_from(pt(0, 0), pt(0, 0), pt(1, 0)), Provenance{});
  cfg.insert(pt(0, 0), Provenance{});
  cfg.insert(ptq(Rat(1, 2), Rat(0)), Provenance{});

  auto [closed, stats] = closure_to_depth(cfg, 8, OpSet::straightedge());
  CHECK(stats.reached_fixed_point);
  // join gives y = 0, which meets the circle in two new points; after that
  // everything is collinear and the set is stuck
  CHECK(closed.counts().points == 4);
  CHECK(closed.counts().lines == 1);
  CHECK(closed.counts().conics == 1);
  CHECK(closed.contains(pt(-1, 0)));
  CHECK(closed.contains(pt(1, 0)));

  // a bare circle with no points is already a fixed point
  Configuration bare(tower);
  bare.insert(circle_from(pt(0, 0), pt(0, 0), pt(1, 0)), Provenance{});
  CHECK(closure_step(bare, OpSet::straightedge()).fixed_point);
}

TEST_CASE("compass reaches the vesica points") {
  auto [closed, stats] = closure_to_depth(seed_points({pt(0, 0), pt(1, 0)}), 2, OpSet::all());
  CHECK(stats.per_depth[1].points == 2);
  CHECK(stats.per_depth[1].lines == 1);
  CHECK(stats.per_depth[1].conics == 2);
  const Real h = Real::sqrt(Real(Rat(3, 4)), closed.tower());
  CHECK(closed.contains(HPoint::affine(Real(Rat(1, 2)), h)));
  CHECK(closed.contains(HPoint::affine(Real(Rat(1, 2)), -h)));
  CHECK(closed.contains(pt(-1, 0)));
  CHECK(closed.contains(pt(2, 0)));
}

TEST_CASE("insertion order does not change the closed set") {
  Configuration a = seed_points({pt(0, 0), pt(1, 0), pt(0, 1), pt(2, 3)});
  Configuration b = seed_points({pt(2, 3), pt(0, 1), pt(1, 0), pt(0, 0)});
  const OpSet ops = *OpSet::parse("joins,meets");
  Configuration ca = closure_to_depth(a, 2, ops).first;
  Configuration cb = closure_to_depth(b, 2, ops).first;
  REQUIRE(ca.size() == cb.size());
  for (int id = 0; id < ca.size(); ++id) CHECK(cb.contains(ca.object(id)));
}

TEST_CASE("provenance replays") {
  auto [closed, stats] = closure_to_depth(quadruple_seed(), 2, *OpSet::parse("joins,meets"));
  for (int id = 0; id < closed.size(); ++id)
    CHECK(geom_equal(closed.replay_provenance(id), closed.object(id)));

  auto [compassed, s2] = closure_to_depth(seed_points({pt(0, 0), pt(1, 0)}), 2, OpSet::all());
  for (int id = 0; id < compassed.size(); ++id)
    CHECK(geom_equal(compassed.replay_provenance(id), compassed.object(id)));

  // parents precede children and steps are the derivation depth
  for (int id = 0; id < compassed.size(); ++id) {
    const Provenance& pv = compassed.provenance(id);
    for (int p : pv.parents) CHECK(p < id);
    if (pv.op == OpKind::Given) CHECK(pv.step == 0);
    if (pv.op != OpKind::Given) CHECK(pv.step > 0);
  }
}

TEST_CASE("generic quadruples") {
  CHECK(generic_quadruple_check(pt(0, 0), pt(1, 0), pt(0, 1), pt(2, 3)));
  CHECK(generic_quadruple_check(pt(-1, -1), pt(5, 0), pt(2, 7), pt(3, 1)));
  // parallelogram: opposite sides parallel
  CHECK(!generic_quadruple_check(pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1)));
  // collinear triple
  CHECK(!generic_quadruple_check(pt(0, 0), pt(1, 1), pt(2, 2), pt(5, 0)));
  // repeated point
  CHECK(!generic_quadruple_check(pt(0, 0), pt(1, 0), pt(0, 1), pt(0, 0)));
  // trapezoid: one pair of the six joins is parallel
  CHECK(!generic_quadruple_check(pt(0, 0), pt(2, 0), pt(3, 5), pt(1, 5)));
  const HPoint far = meet(join(pt(0, 0), pt(0, 1)), join(pt(1, 0), pt(1, 1)));
  CHECK(!generic_quadruple_check(pt(0, 0), pt(1, 0), pt(0, 1), far));
}

TEST_CASE("object budget trips") {
  Budget tiny;
  tiny.max_objects = 8;
  CHECK_THROWS_AS(closure_to_depth(quadruple_seed(), 3, *OpSet::parse("joins,meets"), tiny),
                  BudgetExceeded);
  // budget equal to the reachable set is fine
  Budget ok;
  ok.max_objects = 13;
  CHECK(closure_to_depth(quadruple_seed(), 2, *OpSet::parse("joins,meets"), ok).first.size() ==
        13);
}

TEST_CASE("save and load round trip") {
  auto [closed, stats] = closure_to_depth(seed_points({pt(0, 0), pt(1, 0)}), 2, OpSet::all());
  const std::string text = saved(closed);

  std::istringstream is(text);
  Configuration back = Configuration::load(is, closed.tower());
  CHECK(back.size() == closed.size());
  for (int id = 0; id < closed.size(); ++id) {
    CHECK(geom_equal(back.object(id), closed.object(id)));
    CHECK(back.provenance(id).op == closed.provenance(id).op);
    CHECK(back.provenance(id).parents == closed.provenance(id).parents);
    CHECK(back.provenance(id).step == closed.provenance(id).step);
  }
  CHECK(saved(back) == text);

  // loading into a fresh tower still reproduces the same bytes
  std::istringstream is2(text);
  CHECK(saved(Configuration::load(is2)) == text);

  std::istringstream junk("configuration v2\nend\n");
  CHECK_THROWS_AS(Configuration::load(junk), FormatError);
}

TEST_CASE("deterministic rerun") {
  auto run = [] {
    return saved(closure_to_depth(quadruple_seed(), 2, *OpSet::parse("joins,meets")).first);
  };
  CHECK(run() == run());
}

TEST_CASE("probe finds nearby rational points") {
  Budget budget;
  budget.max_objects = 3000;
  const HPoint target = ptq(Rat(1, 3), Rat(1, 7));
  ProbeResult res =
      density_probe(quadruple_seed(), target, Rat(1, 1000), *OpSet::parse("joins,meets"), budget);
  REQUIRE(res.witness.has_value());
  CHECK(!res.budget_exhausted);
  CHECK(res.witness_depth > 0);
  CHECK(res.objects_explored > 4);
  const Real eps = Real(Rat(1, 1000));
  CHECK((eps - (res.witness->affine_x() - Real(Rat(1, 3))).abs()).sign() > 0);
  CHECK((eps - (res.witness->affine_y() - Real(Rat(1, 7))).abs()).sign() > 0);
}

TEST_CASE("probe returns an existing hit immediately") {
  Configuration cfg = quadruple_seed();
  ProbeResult res = density_probe(cfg, pt(2, 3), Rat(1, 100), *OpSet::parse("joins,meets"));
  REQUIRE(res.witness.has_value());
  CHECK(res.witness_depth == 0);
  CHECK(res.objects_explored == 4);
  CHECK(*res.witness == pt(2, 3));
}

TEST_CASE("probe reports exhaustion honestly") {
  Budget tiny;
  tiny.max_objects = 12;
  ProbeResult res = density_probe(quadruple_seed(), ptq(Rat(355, 1000), Rat(117, 1000)),
                                  Rat(1, 100000), *OpSet::parse("joins,meets"), tiny);
  CHECK(!res.witness.has_value());
  CHECK(res.budget_exhausted);
  CHECK_THROWS_AS(
      density_probe(quadruple_seed(), pt(0, 0), Rat(0), *OpSet::parse("joins,meets")),
      std::invalid_argument);
}
