#include <cctype>
#include <stdexcept>

#include "sclab/real.hpp"

namespace sclab {

namespace {

// Grammar for exact-number text (fully parenthesized, as serialize() emits):
//   expr   := "(" expr op expr ")" | "sqrt" "(" expr ")" | number
//   op     := "+" | "-" | "*" | "/"
//   number := ["-"] digits ["/" digits]
// Whitespace and {...} comments may appear between tokens.
struct NumParser {
  std::string_view s;
  std::size_t pos = 0;
  TowerPtr tower;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("exact number parse error at offset " + std::to_string(pos) +
                                ": " + what);
  }

  void skip_ws() {
    while (pos < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[pos]))) {
        ++pos;
      } else if (s[pos] == '{') {
        const std::size_t close = s.find('}', pos);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos = close + 1;
      } else {
        break;
      }
    }
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  bool eat_word(std::string_view w) {
    skip_ws();
    if (s.substr(pos, w.size()) == w) {
      pos += w.size();
      return true;
    }
    return false;
  }

  Real number() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && s[pos] == '-') ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos, ++digits;
    if (digits == 0) fail("expected a number");
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      std::size_t d2 = 0;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos, ++d2;
      if (d2 == 0) fail("expected denominator digits");
    }
    auto r = Rat::from_string(s.substr(start, pos - start));
    if (!r) fail("malformed rational literal");
    return Real(*r);
  }

  Real expr() {
    skip_ws();
    if (eat_word("sqrt")) {
      expect('(');
      Real inner = expr();
      expect(')');
      return Real::sqrt(inner, tower);
    }
    if (eat('(')) {
      Real lhs = expr();
      skip_ws();
      if (pos >= s.size()) fail("expected an operator");
      const char op = s[pos];
      if (op != '+' && op != '-' && op != '*' && op != '/') fail("expected an operator");
      ++pos;
      Real rhs = expr();
      expect(')');
      switch (op) {
        case '+': return lhs + rhs;
        case '-': return lhs - rhs;
        case '*': return lhs * rhs;
        default: return lhs / rhs;
      }
    }
    return number();
  }

  Real run() {
    Real v = expr();
    skip_ws();
    if (pos != s.size()) fail("trailing input");
    return v;
  }
};

}  // namespace

Real Real::parse(std::string_view text, const TowerPtr& tower) {
  NumParser p{text, 0, tower};
  return p.run();
}

Real parse_real_prefix(std::string_view text, std::size_t& pos, const TowerPtr& tower) {
  NumParser p{text, pos, tower};
  Real v = p.expr();
  pos = p.pos;
  return v;
}

}  // namespace sclab
