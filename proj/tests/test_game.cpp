#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "sclab/game.hpp"

using namespace sclab;

namespace {

Real R(long n, long d = 1) { return Real(Rat(n, d)); }
HPoint pt(long x, long y) { return HPoint::affine(R(x), R(y)); }

Conic unit_circle() {
  Mat3<Real> m;
  m << R(1), R(0), R(0), R(0), R(1), R(0), R(0), R(0), R(-1);
  return Conic::from_matrix(m);
}

Configuration two_points() {
  Configuration cfg;
  cfg.insert(pt(0, 0), Provenance{});
  cfg.insert(pt(1, 0), Provenance{});
  return cfg;
}

lang::Script parse(const std::string& src) {
  lang::ParseResult r = lang::parse_script(src);
  REQUIRE_MESSAGE(r.errors.empty(), src << ": " << r.errors[0].message);
  return *r.script;
}

OpenSet disc(const Real& cx, const Real& cy, const Rat& r) {
  OpenSet u;
  u.atoms.push_back(DiscAtom{cx, cy, r});
  return u;
}

}  // namespace

TEST_CASE("strict membership") {
  Configuration cfg = two_points();
  const int l = cfg.insert(join(pt(0, 0), pt(1, 0)), Provenance{}).id;  // y = 0

  OpenSet u = disc(R(0), R(0), Rat(1));
  CHECK(contains_strict(u, pt(0, 0), cfg));
  CHECK(contains_strict(u, HPoint::affine(R(1, 2), R(1, 2)), cfg));
  CHECK(!contains_strict(u, pt(1, 0), cfg));  // boundary is outside
  CHECK(!contains_strict(u, HPoint::from_h(Vec3<Real>(R(1), R(0), R(0))), cfg));

  OpenSet h;
  h.atoms.push_back(HalfplaneAtom{l, 1});
  const int side = affine_side(std::get<HLine>(cfg.object(l)), pt(0, 1));
  h.atoms.back() = HalfplaneAtom{l, side};
  CHECK(contains_strict(h, pt(0, 1), cfg));
  CHECK(!contains_strict(h, pt(0, -1), cfg));
  CHECK(!contains_strict(h, pt(5, 0), cfg));  // on the line

  u.atoms.push_back(HalfplaneAtom{l, side});
  CHECK(contains_strict(u, HPoint::affine(R(0), R(1, 2)), cfg));
  CHECK(!contains_strict(u, HPoint::affine(R(0), R(-1, 2)), cfg));
}

TEST_CASE("rational adversary picks minimal denominators") {
  Configuration cfg = two_points();
  auto adv = rational_adversary();

  CHECK(adv->choose_point(disc(R(0), R(0), Rat(1)), cfg) == pt(0, 0));
  CHECK(adv->choose_point(disc(R(1, 2), R(1, 2), Rat(1, 10)), cfg) ==
        HPoint::affine(R(1, 2), R(1, 2)));

  // center sqrt(2): the sweep must land on (17/12, 0)
  const Real root2 = Real::sqrt(R(2), cfg.tower());
  const HPoint got = adv->choose_point(disc(root2, R(0), Rat(1, 100)), cfg);
  CHECK(got == HPoint::affine(R(17, 12), R(0)));

  // independent cross-check: no feasible x with a smaller denominator
  for (long q = 1; q < 12; ++q) {
    for (long p = q; p <= 2 * q; ++p) {
      const Real dx = R(p, q) - root2;
      CHECK((dx * dx - R(1, 10000)).sign() >= 0);
    }
  }
}

TEST_CASE("rational adversary honours halfplanes and conjunctions") {
  Configuration cfg = two_points();
  const int l = cfg.insert(join(pt(0, 0), pt(1, 0)), Provenance{}).id;
  auto adv = rational_adversary();

  OpenSet u;
  u.atoms.push_back(HalfplaneAtom{l, affine_side(std::get<HLine>(cfg.object(l)), pt(0, 1))});
  const HPoint p = adv->choose_point(u, cfg);
  CHECK(contains_strict(u, p, cfg));
  CHECK(p == pt(0, 1));  // x = 0 first, then the smallest positive side value

  u.atoms.push_back(DiscAtom{R(4), R(4), Rat(3)});
  const HPoint q = adv->choose_point(u, cfg);
  CHECK(contains_strict(u, q, cfg));
  CHECK(q == pt(2, 2));
}

TEST_CASE("pullback adversary answers with rational images and guards the center") {
  Configuration cfg = two_points();
  const ProjMap t = circle_preserving_map(R(3, 5), R(0), cfg.tower());
  auto adv = pullback_adversary(t);

  const HPoint p = adv->choose_point(disc(R(0), R(1, 2), Rat(1, 20)), cfg);
  CHECK(contains_strict(disc(R(0), R(1, 2), Rat(1, 20)), p, cfg));
  const HPoint img = apply_map(t, p);
  CHECK(img.affine_x().as_rational().has_value());
  CHECK(img.affine_y().as_rational().has_value());

  // tiny disc around the circle's center: the center itself is never chosen
  const HPoint c = adv->choose_point(disc(R(0), R(0), Rat(1, 100)), cfg);
  CHECK(c != pt(0, 0));
  CHECK(c == HPoint::affine(R(0), R(1, 101)));
  CHECK(apply_map(t, c).affine_y().as_rational().has_value());
}

TEST_CASE("pullback with the identity behaves like a guarded rational enumerator") {
  Configuration cfg = two_points();
  auto adv = pullback_adversary(ProjMap::identity());
  CHECK(adv->choose_point(disc(R(1, 2), R(1, 2), Rat(1, 10)), cfg) ==
        HPoint::affine(R(1, 2), R(1, 2)));
  CHECK(adv->choose_point(disc(R(0), R(0), Rat(1)), cfg) == HPoint::affine(R(0), R(1, 2)));
}

TEST_CASE("pullback survives an irrational map") {
  Configuration cfg = two_points();
  const Real u = Real::sqrt(R(1, 2), cfg.tower());
  const ProjMap t = circle_preserving_map(u, R(0), cfg.tower());
  auto adv = pullback_adversary(t);

  const OpenSet set = disc(R(0), R(0), Rat(1, 2));
  const HPoint p = adv->choose_point(set, cfg);
  CHECK(contains_strict(set, p, cfg));
  CHECK(apply_map(t, p) == HPoint::affine(R(1, 2), R(0)));
}

TEST_CASE("violating adversaries are caught") {
  struct Liar final : Adversary {
    std::string name() const override { return "liar"; }
    HPoint choose_point(const OpenSet&, const Configuration&) override { return pt(50, 50); }
  } liar;
  Session s(two_points(), pt(9, 9), liar, 10);
  CHECK_THROWS_AS(s.request(disc(R(0), R(0), Rat(1))), AdversaryViolation);
}

TEST_CASE("session plays and wins stick") {
  auto adv = rational_adversary();
  const HLine goal = join(pt(0, 0), pt(1, 0));

  Session s(two_points(), goal, *adv, 10);
  CHECK(!s.won());
  const int l = s.join_line(0, 1);
  CHECK(s.won());
  CHECK(s.done());
  s.request(disc(R(5), R(5), Rat(1)));  // allowed; the win sticks
  Trace t = s.finish();
  CHECK(t.outcome == Outcome::Won);
  CHECK(t.won_at == 1);
  CHECK(t.moves.size() == 2);
  CHECK(std::get<HLine>(t.cfg.object(l)) == goal);

  // target already present: won before any move
  Configuration start = two_points();
  start.insert(goal, Provenance{});
  Session s2(start, goal, *adv, 10);
  CHECK(s2.won());
  Trace t2 = s2.finish();
  CHECK(t2.outcome == Outcome::Won);
  CHECK(t2.won_at == 0);
}

TEST_CASE("empty intersections are spent moves, not errors") {
  auto adv = rational_adversary();
  Configuration cfg = two_points();
  cfg.insert(pt(5, 0), Provenance{});
  Session s(cfg, pt(9, 9), *adv, 10);
  const int k1 = s.draw_circle(0, 0, 1);
  const int k2 = s.draw_circle(2, 0, 1);
  CHECK(s.intersect(k1, k2).empty());
  CHECK(s.moves_played() == 3);
  Trace t = s.finish();
  CHECK(t.outcome == Outcome::Lost);
  CHECK(t.moves.back().response.empty());
}

TEST_CASE("script play reports wins, losses and budgets") {
  auto adv = rational_adversary();

  const lang::Script won_script = parse("given A, B;\nlet l = join(A, B);\noutput l;\n");
  Trace won = play(won_script, two_points(), join(pt(0, 0), pt(1, 0)), *adv, 10);
  CHECK(won.outcome == Outcome::Won);
  CHECK(won.won_at == 1);
  CHECK(won.outputs.empty());  // the game ends at the winning move

  const lang::Script idle = parse("given A, B;\noutput A;\n");
  Trace lost = play(idle, two_points(), pt(9, 9), *adv, 10);
  CHECK(lost.outcome == Outcome::Lost);
  CHECK(lost.note.empty());
  CHECK(lost.outputs == std::vector<int>{0});

  const lang::Script churn = parse("given A, B;\nrepeat 5 {\n  let l = join(A, B);\n}\n");
  Trace budget = play(churn, two_points(), pt(9, 9), *adv, 3);
  CHECK(budget.outcome == Outcome::Budget);
  CHECK(budget.moves.size() == 3);

  Configuration three = two_points();
  three.insert(pt(5, 0), Provenance{});
  const lang::Script missing = parse(
      "given A, B, C;\n"
      "let k = circle(A, A, B);\n"
      "let j = circle(C, A, B);\n"
      "let P = intersect(k, j)[0];\n"
      "output P;\n");
  Trace failed = play(missing, three, pt(9, 9), *adv, 10);
  CHECK(failed.outcome == Outcome::Lost);
  CHECK(failed.note.find("does not exist") != std::string::npos);

  const lang::Script bad_assert = parse("given A, B;\nassert incident(A, A);\n");
  Trace aborted = play(bad_assert, two_points(), pt(9, 9), *adv, 10);
  CHECK(aborted.outcome == Outcome::Lost);
  CHECK(aborted.note.find("script failed") != std::string::npos);
}

TEST_CASE("script requests and tests run exactly") {
  auto adv = rational_adversary();
  const lang::Script sc = parse(
      "given A, B;\n"
      "let l = join(A, B);\n"
      "request P in disc((0, 1/2), 1/4) and halfplane(l, +);\n"
      "if incident(P, l) {\n"
      "  output A;\n"
      "} else {\n"
      "  let m = join(A, P);\n"
      "  output m;\n"
      "}\n"
      "assert sameside(P, P, l);\n");
  Trace t = play(sc, two_points(), pt(9, 9), *adv, 20);
  CHECK(t.outcome == Outcome::Lost);
  CHECK(t.note.empty());  // assert holds, script just never constructs the target
  REQUIRE(t.outputs.size() == 1);
  CHECK(std::holds_alternative<HLine>(t.cfg.object(t.outputs[0])));
  const auto& p = std::get<HPoint>(t.cfg.object(3));
  CHECK(affine_side(std::get<HLine>(t.cfg.object(2)), p) == 1);
}

TEST_CASE("forcing a point onto a curve takes four moves") {
  auto adv = rational_adversary();

  Configuration cfg = two_points();
  const int l = cfg.insert(join(pt(0, 0), pt(1, 0)), Provenance{}).id;
  Session s(cfg, pt(9, 9), *adv, 20);
  const int on_line = force_point_on_curve(s, l);
  CHECK(s.moves_played() == 4);
  CHECK(incident(std::get<HPoint>(s.cfg().object(on_line)), std::get<HLine>(s.cfg().object(l))));

  Configuration cfg2;
  const int k = cfg2.insert(unit_circle(), Provenance{}).id;
  Session s2(cfg2, pt(9, 9), *adv, 20);
  const int on_circle = force_point_on_curve(s2, k);
  CHECK(s2.moves_played() == 4);
  CHECK(incident(std::get<HPoint>(s2.cfg().object(on_circle)),
                 std::get<Conic>(s2.cfg().object(k))));
}

TEST_CASE("forced circle points transport to circle points") {
  Configuration cfg;
  const int k = cfg.insert(unit_circle(), Provenance{}).id;
  const ProjMap t = circle_preserving_map(R(3, 5), R(0), cfg.tower());
  auto adv = pullback_adversary(t);
  Session s(cfg, pt(9, 9), *adv, 20);
  const int id = force_point_on_curve(s, k);
  const auto& p = std::get<HPoint>(s.cfg().object(id));
  CHECK(incident(p, unit_circle()));
  CHECK(incident(apply_map(t, p), unit_circle()));
}

TEST_CASE("generic quadruple forcing works against both adversaries") {
  auto rat = rational_adversary();
  Configuration cfg;
  cfg.insert(unit_circle(), Provenance{});
  Session s(cfg, pt(9, 9), *rat, 20);
  const auto ids = force_generic_quadruple(s);
  CHECK(s.moves_played() == 4);
  const auto& first = std::get<HPoint>(s.cfg().object(ids[0]));
  CHECK((first.affine_x() * first.affine_x() +
         first.affine_y() * first.affine_y() - R(1, 10000)).sign() < 0);

  Configuration cfg2;
  cfg2.insert(unit_circle(), Provenance{});
  const ProjMap t = circle_preserving_map(R(3, 5), R(1, 2), cfg2.tower());
  auto pull = pullback_adversary(t);
  Session s2(cfg2, pt(9, 9), *pull, 20);
  force_generic_quadruple(s2);  // throws if the responses were not generic
  CHECK(s2.moves_played() == 4);
}

TEST_CASE("traces round trip and replay bit-exactly") {
  auto adv = rational_adversary();
  const lang::Script sc = parse(
      "given A, B;\n"
      "let l = join(A, B);\n"
      "let k = circle(A, A, B);\n"
      "request P in disc((0, 1/2), 1/4);\n"
      "let m = join(P, B);\n"
      "let Q = intersect(m, k)[0];\n"
      "output Q;\n");
  Trace t = play(sc, two_points(), pt(9, 9), *adv, 20);
  CHECK(t.outcome == Outcome::Lost);
  CHECK(t.moves.size() == 5);

  const std::string text = trace_to_text(t);
  CHECK(text.rfind("sclab-trace v1\n", 0) == 0);

  Trace loaded = trace_from_text(text);
  CHECK(trace_to_text(loaded) == text);

  Configuration replayed = replay_trace(loaded);
  std::ostringstream a, b;
  replayed.save(a);
  loaded.cfg.save(b);
  CHECK(a.str() == b.str());

  // deterministic rerun gives byte-identical traces
  Trace again = play(sc, two_points(), pt(9, 9), *rational_adversary(), 20);
  CHECK(trace_to_text(again) == text);
}

TEST_CASE("replay rejects tampered traces") {
  auto adv = rational_adversary();
  const lang::Script sc = parse("given A, B;\nlet l = join(A, B);\n");
  Trace t = play(sc, two_points(), pt(9, 9), *adv, 20);

  Trace broken = trace_from_text(trace_to_text(t));
  broken.moves[0].args = {1, 0};  // join arguments swapped: same line, same id
  CHECK_NOTHROW(replay_trace(broken));
  broken.moves[0].response = {1};  // claims the line was an existing object
  CHECK_THROWS_AS(replay_trace(broken), ReplayMismatch);
}
