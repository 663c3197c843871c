#include <sstream>

#include "sclab/script.hpp"

namespace sclab::lang {

const char* test_kind_name(TestKind k) {
  switch (k) {
    case TestKind::Incident: return "incident";
    case TestKind::Equal: return "equal";
    case TestKind::Parallel: return "parallel";
    case TestKind::Between: return "between";
    case TestKind::SameSide: return "sameside";
  }
  return "?";
}

namespace {

const char* test_name(TestKind k) { return test_kind_name(k); }

struct Printer {
  std::ostringstream os;

  void indent(int depth) {
    for (int i = 0; i < depth; ++i) os << "  ";
  }

  void put_test(const Test& t) {
    os << test_name(t.kind) << "(";
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) os << ", ";
      os << t.args[i];
    }
    os << ")";
  }

  void put_set(const OpenSetExpr& set) {
    for (std::size_t i = 0; i < set.atoms.size(); ++i) {
      if (i) os << " and ";
      if (const auto* d = std::get_if<SetAtomDisc>(&set.atoms[i]))
        os << "disc((" << d->cx << ", " << d->cy << "), " << d->radius.str() << ")";
      else {
        const auto& h = std::get<SetAtomHalfplane>(set.atoms[i]);
        os << "halfplane(" << h.line << ", " << (h.side > 0 ? "+" : "-") << ")";
      }
    }
  }

  void put_expr(const LetExpr& e) {
    if (const auto* j = std::get_if<ExprJoin>(&e))
      os << "join(" << j->p << ", " << j->q << ")";
    else if (const auto* m = std::get_if<ExprMeet>(&e))
      os << "meet(" << m->l << ", " << m->m << ")";
    else if (const auto* x = std::get_if<ExprIntersect>(&e))
      os << "intersect(" << x->a << ", " << x->b << ")[" << x->index << "]";
    else {
      const auto& c = std::get<ExprCircle>(e);
      os << "circle(" << c.center << ", " << c.from << ", " << c.to << ")";
    }
  }

  void put_block(const Block& b, int depth) {
    for (const Stmt& s : b) put_stmt(s, depth);
  }

  void put_stmt(const Stmt& s, int depth) {
    indent(depth);
    if (const auto* let = std::get_if<StLet>(&s.node)) {
      os << "let " << let->id << " = ";
      put_expr(let->expr);
      os << ";\n";
    } else if (const auto* req = std::get_if<StRequest>(&s.node)) {
      os << "request " << req->id << " in ";
      put_set(req->set);
      os << ";\n";
    } else if (const auto* iff = std::get_if<StIf>(&s.node)) {
      os << "if ";
      put_test(iff->test);
      os << " {\n";
      put_block(iff->then_block, depth + 1);
      indent(depth);
      if (iff->has_else) {
        os << "} else {\n";
        put_block(iff->else_block, depth + 1);
        indent(depth);
      }
      os << "}\n";
    } else if (const auto* rep = std::get_if<StRepeat>(&s.node)) {
      os << "repeat " << rep->count << " {\n";
      put_block(rep->body, depth + 1);
      indent(depth);
      os << "}\n";
    } else if (const auto* out = std::get_if<StOutput>(&s.node)) {
      os << "output " << out->id << ";\n";
    } else {
      os << "assert ";
      put_test(std::get<StAssert>(s.node).test);
      os << ";\n";
    }
  }
};

}  // namespace

std::string pretty_print(const Script& s) {
  Printer p;
  p.os << "given";
  for (std::size_t i = 0; i < s.givens.size(); ++i)
    p.os << (i ? ", " : " ") << s.givens[i];
  p.os << ";\n";
  p.put_block(s.body, 0);
  return p.os.str();
}

}  // namespace sclab::lang
