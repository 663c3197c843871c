#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "sclab/lab.hpp"

using namespace sclab;

namespace {

Real R(long n, long d = 1) { return Real(Rat(n, d)); }
HPoint pt(long x, long y) { return HPoint::affine(R(x), R(y)); }

Conic unit_circle() {
  Mat3<Real> m;
  m << R(1), R(0), R(0), R(0), R(1), R(0), R(0), R(0), R(-1);
  return Conic::from_matrix(m);
}

lang::Script parse(const std::string& src) {
  lang::ParseResult r = lang::parse_script(src);
  REQUIRE_MESSAGE(r.errors.empty(), src << ": " << r.errors[0].message);
  return *r.script;
}

std::string data_dir() {
  if (const char* env = std::getenv("SCLAB_DATA_DIR")) return env;
  return "scripts";
}

lang::Script load_script(const std::string& rel) {
  std::ifstream in(data_dir() + "/" + rel);
  REQUIRE_MESSAGE(in.good(), "cannot open " << rel);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

Configuration circle_config() {
  Configuration cfg;
  cfg.insert(GeomObject(unit_circle()), Provenance{});
  return cfg;
}

// straightedge-only randomized play over the unit circle and four forced
// generic points
struct RandomStraightedge final : Strategy {
  unsigned seed;
  int extra_moves;
  RandomStraightedge(unsigned s, int m) : seed(s), extra_moves(m) {}

  void run(Session& s) override {
    std::mt19937 rng(seed);
    force_generic_quadruple(s);
    std::vector<int> pts, lns;
    const int conic = 0;
    for (int i = 0; i < s.cfg().size(); ++i) {
      if (std::holds_alternative<HPoint>(s.cfg().object(i))) pts.push_back(i);
      if (std::holds_alternative<HLine>(s.cfg().object(i))) lns.push_back(i);
    }
    const auto pick = [&](const std::vector<int>& v) {
      return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
    };
    for (int k = 0; k < extra_moves && !s.done(); ++k) {
      const int what = lns.size() < 2 ? 0 : int(rng() % 3);
      if (what == 0) {
        const int a = pick(pts);
        int b = pick(pts);
        if (a == b) continue;
        lns.push_back(s.join_line(a, b));
      } else if (what == 1) {
        const int a = pick(lns);
        int b = pick(lns);
        if (a == b) continue;
        const auto got = s.intersect(a, b);
        for (int id : got)
          if (std::holds_alternative<HPoint>(s.cfg().object(id))) pts.push_back(id);
      } else {
        for (int id : s.intersect(pick(lns), conic)) pts.push_back(id);
      }
    }
  }
};

}  // namespace

TEST_CASE("identity transform reproduces the trace byte for byte") {
  auto adv = rational_adversary();
  const lang::Script sc = parse(
      "given K;\n"
      "request P in disc((-1/2, 0), 1/8);\n"
      "request Q in disc((1/2, 0), 1/8);\n"
      "let l = join(P, Q);\n"
      "let A = intersect(l, K)[0];\n"
      "output A;\n");
  Trace t = play(sc, circle_config(), GeomObject(pt(9, 9)), *adv, 50);
  CHECK(t.moves.size() == 4);

  TransformReport rep = transform_trace(t, ProjMap::identity());
  REQUIRE(rep.ok);
  CHECK(trace_to_text(rep.trace) == trace_to_text(t));
  for (size_t i = 0; i < rep.mapped.size(); ++i) CHECK(rep.mapped[i] == int(i));
}

TEST_CASE("straightedge traces replay under the circle-preserving maps") {
  Configuration cfg = circle_config();
  const ProjMap h = circle_preserving_map(R(3, 5), R(0), cfg.tower());
  const ProjMap hr = compose(circle_preserving_map(R(3, 5), R(0), cfg.tower()),
                             circle_preserving_map(R(0), R(1, 2), cfg.tower()));
  auto adv = rational_adversary();

  for (unsigned seed = 1; seed <= 10; ++seed) {
    RandomStraightedge strat(seed, 11);
    Trace t = play(strat, cfg, GeomObject(pt(9, 9)), *adv, 40);
    CHECK(t.moves.size() >= 4);
    for (const ProjMap* map : {&h, &hr}) {
      TransformReport rep = transform_trace(t, *map);
      REQUIRE_MESSAGE(rep.ok, "seed " << seed << ": " << rep.message);
      // the given circle transports to itself
      CHECK(geom_equal(rep.trace.cfg.object(0), GeomObject(unit_circle())));
      CHECK(rep.trace.cfg.size() == t.cfg.size());
    }
  }
}

TEST_CASE("a trace ending on the center transports to one ending elsewhere") {
  auto adv = rational_adversary();
  const lang::Script sc = parse(
      "given K;\n"
      "request C in disc((0, 0), 1/100);\n"
      "output C;\n");
  Trace t = play(sc, circle_config(), GeomObject(pt(0, 0)), *adv, 10);
  REQUIRE(t.outcome == Outcome::Won);
  const int center_id = t.moves.back().response.at(0);
  CHECK(std::get<HPoint>(t.cfg.object(center_id)) == pt(0, 0));

  const ProjMap h = circle_preserving_map(R(3, 5), R(0), t.cfg.tower());
  TransformReport rep = transform_trace(t, h);
  REQUIRE(rep.ok);
  const auto& image = std::get<HPoint>(rep.trace.cfg.object(rep.mapped[center_id]));
  CHECK(image == HPoint::affine(R(3, 5), R(0)));
  CHECK(image != pt(0, 0));
  CHECK(geom_equal(rep.trace.target, GeomObject(HPoint::affine(R(3, 5), R(0)))));
}

TEST_CASE("compass moves do not transport") {
  auto adv = rational_adversary();
  Configuration cfg;
  cfg.insert(GeomObject(pt(0, 0)), Provenance{});
  cfg.insert(GeomObject(pt(1, 0)), Provenance{});
  const lang::Script sc = parse(
      "given A, B;\n"
      "let k = circle(A, A, B);\n"
      "output k;\n");
  Trace t = play(sc, cfg, GeomObject(pt(9, 9)), *adv, 10);
  REQUIRE(t.moves.size() == 1);
  CHECK(t.moves[0].kind == Move::Kind::Circle);

  const ProjMap h = circle_preserving_map(R(3, 5), R(0), t.cfg.tower());
  TransformReport rep = transform_trace(t, h);
  CHECK(!rep.ok);
  CHECK(rep.failed_move == 0);
  CHECK(rep.message.find("compass") != std::string::npos);
}

TEST_CASE("divergence: parallelism flips under the map") {
  const lang::Script sc = parse(
      "given K;\n"
      "request A in disc((0, 0), 1/1000);\n"
      "request B in disc((1, 0), 1/1000);\n"
      "request C in disc((0, 1), 1/1000);\n"
      "request D in disc((1, 1), 1/1000);\n"
      "let l = join(A, B);\n"
      "let m = join(C, D);\n"
      "if parallel(l, m) {\n"
      "  output l;\n"
      "} else {\n"
      "  output m;\n"
      "}\n");
  Configuration cfg = circle_config();
  const ProjMap h = circle_preserving_map(R(3, 5), R(0), cfg.tower());
  auto adv = rational_adversary();
  auto w = find_test_divergence(sc, cfg, h, *adv, 50);
  REQUIRE(w.has_value());
  CHECK(w->test == lang::TestKind::Parallel);
  CHECK(w->eval_index == 0);
  CHECK(w->original_value == true);
  CHECK(w->transformed_value == false);
  CHECK(w->detail.find("parallel") != std::string::npos);
}

TEST_CASE("divergence: betweenness flips across the pullback of infinity") {
  Configuration cfg = circle_config();
  const ProjMap h = circle_preserving_map(R(3, 5), R(0), cfg.tower());
  auto adv = rational_adversary();

  const lang::Script flip = parse(
      "given K;\n"
      "request A in disc((-3, 0), 1/1000);\n"
      "request M in disc((-2, 0), 1/1000);\n"
      "request B in disc((0, 0), 1/1000);\n"
      "assert between(A, M, B);\n"
      "output M;\n");
  auto w = find_test_divergence(flip, cfg, h, *adv, 50);
  REQUIRE(w.has_value());
  CHECK(w->test == lang::TestKind::Between);
  CHECK(w->original_value == true);
  CHECK(w->transformed_value == false);

  // a segment inside the circle keeps its order
  const lang::Script keep = parse(
      "given K;\n"
      "request A in disc((-9/10, 0), 1/1000);\n"
      "request M in disc((0, 0), 1/1000);\n"
      "request B in disc((9/10, 0), 1/1000);\n"
      "assert between(A, M, B);\n"
      "output M;\n");
  CHECK(!find_test_divergence(keep, cfg, h, *adv, 50).has_value());
}

TEST_CASE("divergence needs a test to watch") {
  const lang::Script sc = parse("given K;\nrequest P in disc((0, 0), 1/2);\noutput P;\n");
  Configuration cfg = circle_config();
  const ProjMap h = circle_preserving_map(R(3, 5), R(0), cfg.tower());
  auto adv = rational_adversary();
  CHECK_THROWS_AS(find_test_divergence(sc, cfg, h, *adv, 10), std::invalid_argument);
}

TEST_CASE("center scripts are defeated by the pullback adversary") {
  const char* files[] = {"corpus/21_center_diameter_chord.scl", "corpus/22_center_midline.scl",
                         "corpus/23_center_two_chord.scl"};
  for (const char* f : files) {
    const lang::Script sc = load_script(f);
    DefeatReport rep = defeat_strategy(sc, pt(0, 0), R(3, 5), R(0), 200);
    CHECK_MESSAGE(!rep.won, f);
    CHECK_MESSAGE(rep.center_absent, f);
    CHECK(rep.checked_moves == rep.moves_played);
    CHECK(rep.summary.find("finite play") != std::string::npos);
  }
}

TEST_CASE("the pullback adversary only blocks the center") {
  const lang::Script sc = parse(
      "given K;\n"
      "request P in disc((-1/2, 0), 1/8);\n"
      "request Q in disc((1/2, 0), 1/8);\n"
      "let l = join(P, Q);\n"
      "let A = intersect(l, K)[0];\n"
      "output A;\n");
  DefeatReport probe = defeat_strategy(sc, pt(9, 9), R(3, 5), R(0), 50);
  CHECK(!probe.won);
  REQUIRE(probe.trace.outputs.size() == 1);
  const int a_id = probe.trace.outputs[0];
  const HPoint a = std::get<HPoint>(probe.trace.cfg.object(a_id));
  CHECK(incident(a, unit_circle()));

  DefeatReport rep =
      defeat_strategy(sc, a, R(3, 5), R(0), 50, probe.trace.cfg.tower());
  CHECK(rep.won);
  CHECK(!rep.center_absent);
}

TEST_CASE("derivability: seeds and immediate meets") {
  const std::array<HPoint, 4> seeds{pt(0, 0), pt(1, 0), pt(0, 1), pt(2, 3)};

  DeriveResult self = rational_plane_derivability(seeds, pt(2, 3));
  REQUIRE(self.chain.has_value());
  CHECK(self.chain->depth == 0);
  CHECK(self.chain->steps.size() == 1);

  DeriveResult cross = rational_plane_derivability(seeds, HPoint::affine(R(-1), R(0)));
  REQUIRE(cross.chain.has_value());
  CHECK(cross.chain->depth == 2);
  CHECK(cross.chain->steps.back().find("meet") != std::string::npos);
}

TEST_CASE("derivability: the midpoint is reachable and its depth is pinned") {
  const std::array<HPoint, 4> seeds{pt(0, 0), pt(1, 0), pt(0, 1), pt(2, 3)};
  DeriveResult mid = rational_plane_derivability(seeds, HPoint::affine(R(1, 2), R(0)));
  REQUIRE(mid.chain.has_value());
  CHECK(mid.chain->depth == 8);  // golden value, see the note in the README
  CHECK(!mid.fixed_point);
  // every step names only objects introduced earlier
  for (const std::string& step : mid.chain->steps) CHECK(!step.empty());
}

TEST_CASE("derivability: parallelogram seeds") {
  const std::array<HPoint, 4> seeds{pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)};

  // the center of the parallelogram is simply the met diagonals
  DeriveResult center = rational_plane_derivability(seeds, HPoint::affine(R(1, 2), R(1, 2)));
  REQUIRE(center.chain.has_value());
  CHECK(center.chain->depth == 2);

  // everything else is out of reach: the closure is a fixed point
  DeriveResult off = rational_plane_derivability(seeds, HPoint::affine(R(1, 3), R(0)));
  CHECK(!off.chain.has_value());
  CHECK(off.fixed_point);
  CHECK(!off.budget_exhausted);
  CHECK(off.objects == 11);  // 5 points and 6 lines
}

TEST_CASE("derivability: budget exhaustion is reported") {
  const std::array<HPoint, 4> seeds{pt(0, 0), pt(1, 0), pt(0, 1), pt(2, 3)};
  DeriveResult r = rational_plane_derivability(seeds, HPoint::affine(R(1, 7), R(22, 7)), 10);
  CHECK(!r.chain.has_value());
  CHECK(r.budget_exhausted);
}

TEST_CASE("derivability rejects irrational input") {
  Configuration cfg;
  const Real root2 = Real::sqrt(R(2), cfg.tower());
  const std::array<HPoint, 4> seeds{pt(0, 0), pt(1, 0), pt(0, 1),
                                    HPoint::affine(root2, R(3))};
  CHECK_THROWS_AS(rational_plane_derivability(seeds, pt(5, 5)), std::invalid_argument);
}
