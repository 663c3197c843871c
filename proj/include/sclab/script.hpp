#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sclab/configuration.hpp"

namespace sclab::lang {

struct SourcePos {
  int line = 0, col = 0;  // 1-based; 0 means unknown
};

// ---- expressions bindable with `let` ----

struct ExprJoin {
  std::string p, q;
  friend bool operator==(const ExprJoin&, const ExprJoin&) = default;
};
struct ExprMeet {
  std::string l, m;
  friend bool operator==(const ExprMeet&, const ExprMeet&) = default;
};
// `intersect(a, b)[k]`; a bare intersect(a, b) parses as k = 0. Results are
// labeled in point_less order, so [0] is the smaller point of a pair.
struct ExprIntersect {
  std::string a, b;
  int index = 0;
  friend bool operator==(const ExprIntersect&, const ExprIntersect&) = default;
};
struct ExprCircle {
  std::string center, from, to;
  friend bool operator==(const ExprCircle&, const ExprCircle&) = default;
};
using LetExpr = std::variant<ExprJoin, ExprMeet, ExprIntersect, ExprCircle>;

// ---- tests ----

enum class TestKind { Incident, Equal, Parallel, Between, SameSide };

const char* test_kind_name(TestKind k);

struct Test {
  TestKind kind = TestKind::Incident;
  std::vector<std::string> args;
  SourcePos pos;
  friend bool operator==(const Test& x, const Test& y) {
    return x.kind == y.kind && x.args == y.args;
  }
};

// ---- open sets for arbitrary-point requests ----

// Coordinates of a disc center are stored in canonical exact-number
// serialization; they are re-evaluated against the session tower when the
// request is played.
struct SetAtomDisc {
  std::string cx, cy;
  Rat radius;  // positive
  friend bool operator==(const SetAtomDisc&, const SetAtomDisc&) = default;
};
struct SetAtomHalfplane {
  std::string line;
  int side = 1;  // +1 / -1, the affine_side sign
  friend bool operator==(const SetAtomHalfplane&, const SetAtomHalfplane&) = default;
};
using SetAtom = std::variant<SetAtomDisc, SetAtomHalfplane>;

struct OpenSetExpr {
  std::vector<SetAtom> atoms;  // conjunction; never empty
  friend bool operator==(const OpenSetExpr&, const OpenSetExpr&) = default;
};

// ---- statements ----

struct Stmt;
using Block = std::vector<Stmt>;

struct StLet {
  std::string id;
  LetExpr expr;
  friend bool operator==(const StLet&, const StLet&) = default;
};
struct StRequest {
  std::string id;
  OpenSetExpr set;
  friend bool operator==(const StRequest&, const StRequest&) = default;
};
struct StIf {
  Test test;
  Block then_block;
  Block else_block;
  bool has_else = false;
  friend bool operator==(const StIf&, const StIf&) = default;
};
struct StRepeat {
  long count = 0;
  Block body;
  friend bool operator==(const StRepeat&, const StRepeat&) = default;
};
struct StOutput {
  std::string id;
  friend bool operator==(const StOutput&, const StOutput&) = default;
};
struct StAssert {
  Test test;
  friend bool operator==(const StAssert&, const StAssert&) = default;
};

struct Stmt {
  std::variant<StLet, StRequest, StIf, StRepeat, StOutput, StAssert> node;
  SourcePos pos;
  friend bool operator==(const Stmt& a, const Stmt& b) { return a.node == b.node; }
};

struct Script {
  std::vector<std::string> givens;
  Block body;
  friend bool operator==(const Script&, const Script&) = default;
};

// ---- parsing ----

struct ParseError {
  std::string message;
  int line = 0, col = 0;  // 1-based
  std::string expected;   // token summary, may be empty
};

struct ParseResult {
  std::optional<Script> script;  // present iff errors is empty
  std::vector<ParseError> errors;
};

// Whitespace-insensitive, `#` starts a line comment. Recovers at statement
// boundaries, so several errors can be reported from one pass.
ParseResult parse_script(std::string_view source);

// Canonical formatting; parse_script(pretty_print(s)) reproduces s exactly.
std::string pretty_print(const Script& s);

// ---- static checks ----

enum class ObjType { Unknown, Point, Line, Circle };

struct Diagnostic {
  bool error = true;  // false: warning
  std::string message;
  SourcePos pos;
};

// Identifier and type discipline against the declared givens; `inputs`
// supplies the given objects positionally. No geometry is evaluated.
std::vector<Diagnostic> check_script(const Script& s, const Configuration& inputs);

// Same checks with every given bound as Unknown, for callers with no
// configuration at hand. Type errors are reported only where provable.
std::vector<Diagnostic> check_script(const Script& s);

}  // namespace sclab::lang
