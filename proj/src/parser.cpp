#include <cctype>
#include <cstdlib>
#include <set>

#include "sclab/script.hpp"

namespace sclab::lang {

namespace {

const char* const kKeywords[] = {"given",    "let",   "request", "in",       "if",
                                 "else",     "repeat", "output",  "assert",   "join",
                                 "meet",     "intersect", "circle", "incident", "equal",
                                 "parallel", "between", "sameside", "disc",    "halfplane",
                                 "and"};

bool is_keyword(std::string_view s) {
  for (const char* k : kKeywords)
    if (s == k) return true;
  return false;
}

struct Token {
  enum Kind { End, Ident, Keyword, Int, Sym } kind = End;
  std::string text;
  std::size_t offset = 0;
};

struct Lexer {
  std::string_view src;
  std::size_t pos = 0;
  std::optional<Token> ahead;

  void skip_ws() {
    while (pos < src.size()) {
      const char c = src[pos];
      if (c == '#') {
        while (pos < src.size() && src[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  Token lex() {
    skip_ws();
    Token t;
    t.offset = pos;
    if (pos >= src.size()) return t;
    const char c = src[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      t.text = std::string(src.substr(start, pos - start));
      t.kind = is_keyword(t.text) ? Token::Keyword : Token::Ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      t.kind = Token::Int;
      t.text = std::string(src.substr(start, pos - start));
      return t;
    }
    t.kind = Token::Sym;
    t.text = std::string(1, c);
    ++pos;
    return t;
  }

  const Token& peek() {
    if (!ahead) ahead = lex();
    return *ahead;
  }
  Token next() {
    if (ahead) {
      Token t = *ahead;
      ahead.reset();
      return t;
    }
    return lex();
  }
  // source offset where the next token starts
  std::size_t lookahead_offset() {
    peek();
    return ahead->offset;
  }
  void reset_to(std::size_t off) {
    pos = off;
    ahead.reset();
  }
};

struct Parser {
  std::string_view src;
  Lexer lex;
  std::vector<ParseError> errors;
  std::vector<std::size_t> line_starts;
  TowerPtr scratch = Tower::create();  // literal validation only

  explicit Parser(std::string_view s) : src(s), lex{s} {
    line_starts.push_back(0);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == '\n') line_starts.push_back(i + 1);
  }

  SourcePos pos_of(std::size_t off) const {
    std::size_t lo = 0, hi = line_starts.size();
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      (line_starts[mid] <= off ? lo : hi) = mid;
    }
    return {static_cast<int>(lo + 1), static_cast<int>(off - line_starts[lo] + 1)};
  }

  struct Bail {};  // unwinds to the statement recovery point

  [[noreturn]] void fail(const Token& at, std::string msg, std::string expected = "") {
    const SourcePos p = pos_of(at.offset);
    errors.push_back({std::move(msg), p.line, p.col, std::move(expected)});
    throw Bail{};
  }

  std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::End: return "end of input";
      case Token::Int: return "number '" + t.text + "'";
      case Token::Sym: return "'" + t.text + "'";
      default: return "'" + t.text + "'";
    }
  }

  Token expect_sym(char c) {
    const Token t = lex.next();
    if (t.kind != Token::Sym || t.text[0] != c)
      fail(t, std::string("expected '") + c + "', found " + describe(t), std::string(1, c));
    return t;
  }
  Token expect_kw(const char* kw) {
    const Token t = lex.next();
    if (t.kind != Token::Keyword || t.text != kw)
      fail(t, std::string("expected '") + kw + "', found " + describe(t), kw);
    return t;
  }
  std::string expect_ident() {
    const Token t = lex.next();
    if (t.kind != Token::Ident) {
      if (t.kind == Token::Keyword)
        fail(t, "'" + t.text + "' is a reserved word, not an identifier", "identifier");
      fail(t, "expected an identifier, found " + describe(t), "identifier");
    }
    return t.text;
  }

  bool peek_sym(char c) {
    const Token& t = lex.peek();
    return t.kind == Token::Sym && t.text[0] == c;
  }
  bool peek_kw(const char* kw) {
    const Token& t = lex.peek();
    return t.kind == Token::Keyword && t.text == kw;
  }
  bool eat_sym(char c) {
    if (!peek_sym(c)) return false;
    lex.next();
    return true;
  }

  // skip to just past the next ';', or stop before '}' / end of input
  void recover() {
    static const std::set<std::string> starts = {"let",    "request", "if",
                                                 "repeat", "output",  "assert"};
    for (;;) {
      const Token& t = lex.peek();
      if (t.kind == Token::End) return;
      if (t.kind == Token::Sym && t.text[0] == '}') return;
      if (t.kind == Token::Keyword && starts.count(t.text)) return;
      const Token taken = lex.next();
      if (taken.kind == Token::Sym && taken.text[0] == ';') return;
    }
  }

  // exact-number literal, canonicalized
  std::string real_literal() {
    const std::size_t start = lex.lookahead_offset();
    std::size_t off = start;
    try {
      const Real v = parse_real_prefix(src, off, scratch);
      lex.reset_to(off);
      return v.serialize();
    } catch (const std::exception& e) {
      Token t;
      t.offset = start;
      fail(t, std::string("bad number literal: ") + e.what(), "exact number");
    }
  }

  Rat rational_literal() {
    bool neg = false;
    if (peek_sym('-')) {
      lex.next();
      neg = true;
    }
    Token t = lex.next();
    if (t.kind != Token::Int) fail(t, "expected a rational literal, found " + describe(t), "number");
    std::string text = t.text;
    if (peek_sym('/')) {
      lex.next();
      Token d = lex.next();
      if (d.kind != Token::Int)
        fail(d, "expected denominator digits, found " + describe(d), "number");
      text += "/" + d.text;
    }
    std::optional<Rat> r = Rat::from_string(text);
    if (!r) fail(t, "malformed rational literal '" + text + "'", "number");
    return neg ? -*r : *r;
  }

  std::vector<std::string> id_args(int arity, const char* what) {
    expect_sym('(');
    std::vector<std::string> out;
    for (int i = 0; i < arity; ++i) {
      if (i) {
        const Token t = lex.next();
        if (t.kind != Token::Sym || t.text[0] != ',') {
          if (t.kind == Token::Sym && t.text[0] == ')')
            fail(t, std::string(what) + " takes " + std::to_string(arity) + " arguments", ",");
          fail(t, "expected ',', found " + describe(t), ",");
        }
      }
      out.push_back(expect_ident());
    }
    const Token t = lex.next();
    if (t.kind != Token::Sym || t.text[0] != ')') {
      if (t.kind == Token::Sym && t.text[0] == ',')
        fail(t, std::string(what) + " takes " + std::to_string(arity) + " arguments", ")");
      fail(t, "expected ')', found " + describe(t), ")");
    }
    return out;
  }

  LetExpr let_expr() {
    const Token t = lex.next();
    if (t.kind != Token::Keyword)
      fail(t, "expected join/meet/intersect/circle, found " + describe(t), "expression");
    if (t.text == "join") {
      auto a = id_args(2, "join");
      return ExprJoin{a[0], a[1]};
    }
    if (t.text == "meet") {
      auto a = id_args(2, "meet");
      return ExprMeet{a[0], a[1]};
    }
    if (t.text == "circle") {
      auto a = id_args(3, "circle");
      return ExprCircle{a[0], a[1], a[2]};
    }
    if (t.text == "intersect") {
      auto a = id_args(2, "intersect");
      int index = 0;
      if (eat_sym('[')) {
        const Token i = lex.next();
        if (i.kind != Token::Int || (i.text != "0" && i.text != "1"))
          fail(i, "intersection label must be 0 or 1", "0 or 1");
        index = i.text[0] - '0';
        expect_sym(']');
      }
      return ExprIntersect{a[0], a[1], index};
    }
    fail(t, "expected join/meet/intersect/circle, found " + describe(t), "expression");
  }

  Test test_expr() {
    const Token t = lex.next();
    const SourcePos p = pos_of(t.offset);
    if (t.kind != Token::Keyword)
      fail(t, "expected a test, found " + describe(t), "test");
    TestKind kind;
    int arity;
    if (t.text == "incident") { kind = TestKind::Incident; arity = 2; }
    else if (t.text == "equal") { kind = TestKind::Equal; arity = 2; }
    else if (t.text == "parallel") { kind = TestKind::Parallel; arity = 2; }
    else if (t.text == "between") { kind = TestKind::Between; arity = 3; }
    else if (t.text == "sameside") { kind = TestKind::SameSide; arity = 3; }
    else fail(t, "expected a test, found " + describe(t), "test");
    return Test{kind, id_args(arity, t.text.c_str()), p};
  }

  OpenSetExpr open_set() {
    OpenSetExpr set;
    for (;;) {
      const Token t = lex.next();
      if (t.kind == Token::Keyword && t.text == "disc") {
        expect_sym('(');
        expect_sym('(');
        std::string cx = real_literal();
        expect_sym(',');
        std::string cy = real_literal();
        expect_sym(')');
        expect_sym(',');
        const Token rt = lex.peek();
        Rat r = rational_literal();
        if (r.sign() <= 0) fail(rt, "disc radius must be positive", "positive rational");
        expect_sym(')');
        set.atoms.push_back(SetAtomDisc{std::move(cx), std::move(cy), std::move(r)});
      } else if (t.kind == Token::Keyword && t.text == "halfplane") {
        expect_sym('(');
        std::string id = expect_ident();
        expect_sym(',');
        const Token s = lex.next();
        if (s.kind != Token::Sym || (s.text[0] != '+' && s.text[0] != '-'))
          fail(s, "halfplane side must be + or -", "+ or -");
        expect_sym(')');
        set.atoms.push_back(SetAtomHalfplane{std::move(id), s.text[0] == '+' ? 1 : -1});
      } else {
        fail(t, "expected disc or halfplane, found " + describe(t), "set atom");
      }
      if (!peek_kw("and")) break;
      lex.next();
    }
    return set;
  }

  Block block() {
    expect_sym('{');
    Block b;
    while (!peek_sym('}') && lex.peek().kind != Token::End) {
      if (auto s = statement()) b.push_back(std::move(*s));
    }
    expect_sym('}');
    return b;
  }

  std::optional<Stmt> statement() {
    const Token head = lex.peek();
    const SourcePos p = pos_of(head.offset);
    try {
      const Token t = lex.next();
      if (t.kind != Token::Keyword)
        fail(t, "expected a statement, found " + describe(t), "statement");
      if (t.text == "let") {
        std::string id = expect_ident();
        {
          const Token eq = lex.next();
          if (eq.kind != Token::Sym || eq.text[0] != '=')
            fail(eq, "expected '=', found " + describe(eq), "=");
        }
        LetExpr e = let_expr();
        expect_sym(';');
        return Stmt{StLet{std::move(id), std::move(e)}, p};
      }
      if (t.text == "request") {
        std::string id = expect_ident();
        expect_kw("in");
        OpenSetExpr set = open_set();
        expect_sym(';');
        return Stmt{StRequest{std::move(id), std::move(set)}, p};
      }
      if (t.text == "if") {
        Test test = test_expr();
        Block then_block = block();
        Block else_block;
        bool has_else = false;
        if (peek_kw("else")) {
          lex.next();
          else_block = block();
          has_else = true;
        }
        return Stmt{StIf{std::move(test), std::move(then_block), std::move(else_block), has_else},
                    p};
      }
      if (t.text == "repeat") {
        const Token n = lex.next();
        if (n.kind != Token::Int) fail(n, "repeat bound must be a literal natural", "number");
        errno = 0;
        char* end = nullptr;
        const long count = std::strtol(n.text.c_str(), &end, 10);
        if (errno != 0 || count < 0 || n.text.size() > 9)
          fail(n, "repeat bound out of range", "number");
        Block body = block();
        return Stmt{StRepeat{count, std::move(body)}, p};
      }
      if (t.text == "output") {
        std::string id = expect_ident();
        expect_sym(';');
        return Stmt{StOutput{std::move(id)}, p};
      }
      if (t.text == "assert") {
        Test test = test_expr();
        expect_sym(';');
        return Stmt{StAssert{std::move(test)}, p};
      }
      fail(t, "expected a statement, found " + describe(t), "statement");
    } catch (Bail&) {
      recover();
      return std::nullopt;
    }
  }

  ParseResult run() {
    Script s;
    try {
      expect_kw("given");
      if (!peek_sym(';')) {
        s.givens.push_back(expect_ident());
        while (eat_sym(',')) s.givens.push_back(expect_ident());
      }
      expect_sym(';');
    } catch (Bail&) {
      recover();
    }
    while (lex.peek().kind != Token::End) {
      if (peek_sym('}')) {  // stray brace: report and skip
        const Token t = lex.next();
        const SourcePos p = pos_of(t.offset);
        errors.push_back({"unmatched '}'", p.line, p.col, "statement"});
        continue;
      }
      if (auto st = statement()) s.body.push_back(std::move(*st));
    }
    ParseResult res;
    res.errors = std::move(errors);
    if (res.errors.empty()) res.script = std::move(s);
    return res;
  }
};

}  // namespace

ParseResult parse_script(std::string_view source) { return Parser(source).run(); }

}  // namespace sclab::lang
