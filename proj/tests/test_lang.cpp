#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sclab/script.hpp"

using namespace sclab;
using namespace sclab::lang;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
  const char* env = std::getenv("SCLAB_DATA_DIR");
  return fs::path(env && *env ? env : "scripts");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<fs::path> scl_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".scl") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Configuration points_config(int n) {
  Configuration cfg;
  for (int i = 0; i < n; ++i)
    cfg.insert(HPoint::affine(Real(Rat(i)), Real(Rat(i * i + 1))), Provenance{});
  return cfg;
}

int count_errors(const std::vector<Diagnostic>& ds) {
  int n = 0;
  for (const auto& d : ds) n += d.error ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("corpus scripts round trip") {
  auto files = scl_files(data_dir() / "corpus");
  REQUIRE(files.size() >= 20);
  for (const auto& f : files) {
    CAPTURE(f.string());
    ParseResult first = parse_script(slurp(f));
    REQUIRE_MESSAGE(first.errors.empty(), f.string() << ": " << first.errors[0].message << " at "
                                                     << first.errors[0].line << ":"
                                                     << first.errors[0].col);
    REQUIRE(first.script.has_value());
    const std::string printed = pretty_print(*first.script);
    ParseResult second = parse_script(printed);
    REQUIRE_MESSAGE(second.errors.empty(), f.string() << " reprint: "
                                                      << second.errors[0].message);
    CHECK(*second.script == *first.script);
    CHECK(pretty_print(*second.script) == printed);
  }
}

TEST_CASE("mutant scripts fail with positioned errors") {
  auto files = scl_files(data_dir() / "mutants");
  REQUIRE(files.size() >= 20);
  for (const auto& f : files) {
    CAPTURE(f.string());
    const std::string src = slurp(f);
    // first line: "# expect-error-line: N[,N...]"
    const std::string tag = "# expect-error-line:";
    REQUIRE(src.rfind(tag, 0) == 0);
    std::vector<int> expect;
    {
      std::istringstream nums(src.substr(tag.size(), src.find('\n') - tag.size()));
      std::string piece;
      while (std::getline(nums, piece, ',')) expect.push_back(std::stoi(piece));
    }
    REQUIRE(!expect.empty());
    ParseResult res = parse_script(src);
    CHECK(!res.script.has_value());
    REQUIRE(!res.errors.empty());
    bool hit = false;
    for (const ParseError& e : res.errors) {
      CHECK(e.line >= 1);
      CHECK(e.col >= 1);
      for (int want : expect) hit = hit || e.line == want;
    }
    CHECK_MESSAGE(hit, f.string() << ": first error '" << res.errors[0].message << "' at line "
                                  << res.errors[0].line << ", expected line "
                                  << expect[0]);
  }
}

TEST_CASE("basic parses") {
  ParseResult r = parse_script("given A, B; let l = join(A, B); output l;");
  REQUIRE(r.script.has_value());
  CHECK(r.script->givens == std::vector<std::string>{"A", "B"});
  REQUIRE(r.script->body.size() == 2);
  CHECK(std::holds_alternative<StLet>(r.script->body[0].node));
  CHECK(std::holds_alternative<StOutput>(r.script->body[1].node));

  // arity error is reported at the call site
  ParseResult bad = parse_script("given A;\nlet l = join(A);");
  CHECK(!bad.script.has_value());
  REQUIRE(!bad.errors.empty());
  CHECK(bad.errors[0].line == 2);
  CHECK(bad.errors[0].col > 8);

  // a bare intersect label defaults to [0] and prints canonically
  ParseResult impl = parse_script("given K, l;\nlet P = intersect(l, K);\noutput P;");
  REQUIRE(impl.script.has_value());
  const auto& let = std::get<StLet>(impl.script->body[0].node);
  CHECK(std::get<ExprIntersect>(let.expr).index == 0);
  CHECK(pretty_print(*impl.script).find("intersect(l, K)[0]") != std::string::npos);
}

TEST_CASE("parser recovers at statement boundaries") {
  ParseResult r = parse_script(
      "given A, B;\n"
      "let l = join(A;\n"
      "let m = jion(A, B);\n"
      "output A;\n");
  CHECK(!r.script.has_value());
  CHECK(r.errors.size() == 2);
  CHECK(r.errors[0].line == 2);
  CHECK(r.errors[1].line == 3);
}

TEST_CASE("empty script prints as header only") {
  Script empty;
  CHECK(pretty_print(empty) == "given;\n");
  ParseResult r = parse_script("given;\n");
  REQUIRE(r.script.has_value());
  CHECK(*r.script == empty);
}

TEST_CASE("checker accepts a clean script") {
  ParseResult r = parse_script(
      "given A, B;\n"
      "let l = join(A, B);\n"
      "request P in disc((0, 0), 1) and halfplane(l, +);\n"
      "if incident(P, l) {\n"
      "  output P;\n"
      "} else {\n"
      "  let m = join(A, P);\n"
      "  output m;\n"
      "}\n"
      "output l;\n");
  REQUIRE(r.script.has_value());
  CHECK(check_script(*r.script, points_config(2)).empty());
}

TEST_CASE("checker flags undefined identifiers") {
  ParseResult r = parse_script("given A, B;\nlet l = join(A, C);\noutput l;\n");
  REQUIRE(r.script.has_value());
  auto ds = check_script(*r.script, points_config(2));
  REQUIRE(count_errors(ds) == 1);
  CHECK(ds[0].message.find("'C'") != std::string::npos);
  CHECK(ds[0].pos.line == 2);
}

TEST_CASE("checker flags type misuse") {
  ParseResult r = parse_script(
      "given A, B;\n"
      "let l = join(A, B);\n"
      "let m = join(l, A);\n"
      "let X = meet(l, A);\n"
      "let k = circle(A, B, l);\n"
      "let Y = intersect(A, k)[0];\n"
      "assert parallel(l, A);\n"
      "assert equal(l, A);\n"
      "output l;\n");
  REQUIRE(r.script.has_value());
  auto ds = check_script(*r.script, points_config(2));
  CHECK(count_errors(ds) == 6);

  ParseResult two = parse_script("given l, m;\nlet P = intersect(l, m)[0];\noutput P;\n");
  REQUIRE(two.script.has_value());
  Configuration lines;
  lines.insert(join(HPoint::affine(Real(Rat(0)), Real(Rat(0))),
                    HPoint::affine(Real(Rat(1)), Real(Rat(0)))),
               Provenance{});
  lines.insert(join(HPoint::affine(Real(Rat(0)), Real(Rat(0))),
                    HPoint::affine(Real(Rat(0)), Real(Rat(1)))),
               Provenance{});
  auto ds2 = check_script(*two.script, lines);
  REQUIRE(count_errors(ds2) == 1);
  CHECK(ds2[0].message.find("meet") != std::string::npos);
}

TEST_CASE("checker tracks branches and loops") {
  // bound in one branch only: use after the if is an error
  ParseResult r = parse_script(
      "given A, B, l;\n"
      "if incident(A, l) {\n"
      "  let m = join(A, B);\n"
      "}\n"
      "output m;\n");
  REQUIRE(r.script.has_value());
  Configuration cfg = points_config(2);
  cfg.insert(join(HPoint::affine(Real(Rat(0)), Real(Rat(0))),
                  HPoint::affine(Real(Rat(1)), Real(Rat(1)))),
             Provenance{});
  auto ds = check_script(*r.script, cfg);
  REQUIRE(count_errors(ds) == 1);
  CHECK(ds[0].message.find("branch") != std::string::npos);
  CHECK(ds[0].pos.line == 5);

  // both branches bind it: fine
  ParseResult ok = parse_script(
      "given A, B, l;\n"
      "if incident(A, l) {\n"
      "  let m = join(A, B);\n"
      "} else {\n"
      "  let m = join(B, A);\n"
      "}\n"
      "output m;\n");
  REQUIRE(ok.script.has_value());
  CHECK(check_script(*ok.script, cfg).empty());

  // repeat 0 warns and its body still gets checked
  ParseResult rep = parse_script(
      "given A, B;\n"
      "repeat 0 {\n"
      "  let l = join(A, C);\n"
      "}\n"
      "output A;\n");
  REQUIRE(rep.script.has_value());
  auto ds3 = check_script(*rep.script, points_config(2));
  CHECK(count_errors(ds3) == 1);
  REQUIRE(ds3.size() == 2);
  CHECK(!ds3[0].error);
  CHECK(ds3[0].message.find("never runs") != std::string::npos);

  // a loop body's bindings persist after the loop when it runs
  ParseResult loop = parse_script(
      "given A, B;\n"
      "repeat 3 {\n"
      "  let l = join(A, B);\n"
      "}\n"
      "output l;\n");
  REQUIRE(loop.script.has_value());
  CHECK(check_script(*loop.script, points_config(2)).empty());
}

TEST_CASE("checker flags rebinding type changes and given mismatches") {
  ParseResult r = parse_script(
      "given A, B;\n"
      "let l = join(A, B);\n"
      "let l = meet(l, l);\n"
      "output l;\n");
  REQUIRE(r.script.has_value());
  auto ds = check_script(*r.script, points_config(2));
  bool rebind = false;
  for (const auto& d : ds) rebind = rebind || d.message.find("rebinding") != std::string::npos;
  CHECK(rebind);

  ParseResult dup = parse_script("given A, A;\noutput A;\n");
  REQUIRE(dup.script.has_value());
  auto ds2 = check_script(*dup.script, points_config(2));
  REQUIRE(count_errors(ds2) == 1);
  CHECK(ds2[0].message.find("duplicate") != std::string::npos);

  ParseResult arity = parse_script("given A, B, C;\noutput A;\n");
  REQUIRE(arity.script.has_value());
  auto ds3 = check_script(*arity.script, points_config(2));
  REQUIRE(count_errors(ds3) == 1);
  CHECK(ds3[0].message.find("3 givens") != std::string::npos);
}

TEST_CASE("center attempt scripts are clean") {
  Configuration cfg;
  cfg.insert(circle_from(HPoint::affine(Real(Rat(0)), Real(Rat(0))),
                         HPoint::affine(Real(Rat(0)), Real(Rat(0))),
                         HPoint::affine(Real(Rat(1)), Real(Rat(0)))),
             Provenance{});
  int center_scripts = 0;
  for (const auto& f : scl_files(data_dir() / "corpus")) {
    if (f.filename().string().find("center") == std::string::npos) continue;
    ++center_scripts;
    ParseResult r = parse_script(slurp(f));
    REQUIRE(r.script.has_value());
    CHECK(r.script->givens.size() == 1);
    auto ds = check_script(*r.script, cfg);
    CHECK_MESSAGE(count_errors(ds) == 0,
                  f.string() << ": " << (ds.empty() ? "" : ds[0].message));
  }
  CHECK(center_scripts >= 3);
}

namespace {

struct AstGen {
  std::mt19937 rng{20260817};
  TowerPtr scratch = Tower::create();
  const std::vector<std::string> names = {"A", "B", "C", "l", "m", "P", "Q", "k", "w2", "x_1"};

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  std::string name() { return names[pick(static_cast<int>(names.size()))]; }

  Rat rat() {
    const int num = pick(41) - 20;
    const int den = 1 + pick(12);
    return Rat(num, den);
  }

  std::string real_lit() {
    Real v{rat()};
    if (pick(3) == 0) v = v * v + Real::sqrt(Real(Rat(1 + pick(9))), scratch);
    return v.serialize();
  }

  Test test() {
    Test t;
    t.kind = static_cast<TestKind>(pick(5));
    const int arity = t.kind == TestKind::Between || t.kind == TestKind::SameSide ? 3 : 2;
    for (int i = 0; i < arity; ++i) t.args.push_back(name());
    return t;
  }

  LetExpr expr() {
    switch (pick(4)) {
      case 0: return ExprJoin{name(), name()};
      case 1: return ExprMeet{name(), name()};
      case 2: return ExprIntersect{name(), name(), pick(2)};
      default: return ExprCircle{name(), name(), name()};
    }
  }

  OpenSetExpr open_set() {
    OpenSetExpr s;
    const int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) {
      if (pick(2))
        s.atoms.push_back(SetAtomDisc{real_lit(), real_lit(), rat().abs() + Rat(1, 7)});
      else
        s.atoms.push_back(SetAtomHalfplane{name(), pick(2) ? 1 : -1});
    }
    return s;
  }

  Block block(int depth) {
    Block b;
    const int n = pick(4);
    for (int i = 0; i < n; ++i) b.push_back(stmt(depth));
    return b;
  }

  Stmt stmt(int depth) {
    const int lim = depth >= 2 ? 4 : 6;
    switch (pick(lim)) {
      case 0: return {StLet{name(), expr()}, {}};
      case 1: return {StRequest{name(), open_set()}, {}};
      case 2: return {StOutput{name()}, {}};
      case 3: return {StAssert{test()}, {}};
      case 4: {
        const bool has_else = pick(2) == 1;
        return {StIf{test(), block(depth + 1), has_else ? block(depth + 1) : Block{}, has_else},
                {}};
      }
      default: return {StRepeat{pick(5), block(depth + 1)}, {}};
    }
  }

  Script script() {
    Script s;
    const int g = pick(4);
    for (int i = 0; i < g; ++i) {
      std::string n = name() + std::to_string(i);
      s.givens.push_back(n);
    }
    s.body = block(0);
    return s;
  }
};

}  // namespace

TEST_CASE("random asts round trip") {
  AstGen gen;
  for (int i = 0; i < 300; ++i) {
    const Script s = gen.script();
    const std::string printed = pretty_print(s);
    CAPTURE(printed);
    ParseResult r = parse_script(printed);
    REQUIRE_MESSAGE(r.errors.empty(),
                    "iteration " << i << ": " << r.errors[0].message << " at "
                                 << r.errors[0].line << ":" << r.errors[0].col);
    CHECK(*r.script == s);
  }
}
