#include <map>
#include <set>

#include "sclab/script.hpp"

namespace sclab::lang {

namespace {

const char* type_name(ObjType t) {
  switch (t) {
    case ObjType::Point: return "point";
    case ObjType::Line: return "line";
    case ObjType::Circle: return "circle";
    default: return "unknown";
  }
}

struct Checker {
  std::vector<Diagnostic> out;
  using Env = std::map<std::string, ObjType>;
  std::set<std::string> partial;  // bound on some execution paths only

  void err(SourcePos p, std::string msg) { out.push_back({true, std::move(msg), p}); }
  void warn(SourcePos p, std::string msg) { out.push_back({false, std::move(msg), p}); }

  ObjType lookup(const Env& env, const std::string& id, SourcePos p) {
    auto it = env.find(id);
    if (it != env.end()) return it->second;
    if (partial.count(id))
      err(p, "identifier '" + id + "' may be undefined here (bound on only one branch)");
    else
      err(p, "use of undefined identifier '" + id + "'");
    return ObjType::Unknown;
  }

  void need(const Env& env, const std::string& id, ObjType want, SourcePos p, const char* role) {
    const ObjType got = lookup(env, id, p);
    if (got != ObjType::Unknown && got != want)
      err(p, std::string(role) + " '" + id + "' must be a " + type_name(want) + ", but it is a " +
                 type_name(got));
  }

  void bind(Env& env, const std::string& id, ObjType type, SourcePos p) {
    auto it = env.find(id);
    if (it != env.end() && it->second != ObjType::Unknown && type != ObjType::Unknown &&
        it->second != type)
      err(p, "rebinding '" + id + "' changes its type from " + type_name(it->second) + " to " +
                 type_name(type));
    env[id] = type;
    partial.erase(id);
  }

  void check_test(const Env& env, const Test& t) {
    switch (t.kind) {
      case TestKind::Incident: {
        need(env, t.args[0], ObjType::Point, t.pos, "incident argument");
        const ObjType c = lookup(env, t.args[1], t.pos);
        if (c == ObjType::Point)
          err(t.pos, "incident carrier '" + t.args[1] + "' must be a line or circle");
        break;
      }
      case TestKind::Equal: {
        const ObjType a = lookup(env, t.args[0], t.pos);
        const ObjType b = lookup(env, t.args[1], t.pos);
        if (a != ObjType::Unknown && b != ObjType::Unknown && a != b)
          err(t.pos, "equal compares a " + std::string(type_name(a)) + " with a " + type_name(b));
        break;
      }
      case TestKind::Parallel:
        need(env, t.args[0], ObjType::Line, t.pos, "parallel argument");
        need(env, t.args[1], ObjType::Line, t.pos, "parallel argument");
        break;
      case TestKind::Between:
        for (const std::string& a : t.args) need(env, a, ObjType::Point, t.pos, "between argument");
        break;
      case TestKind::SameSide:
        need(env, t.args[0], ObjType::Point, t.pos, "sameside argument");
        need(env, t.args[1], ObjType::Point, t.pos, "sameside argument");
        need(env, t.args[2], ObjType::Line, t.pos, "sameside argument");
        break;
    }
  }

  void check_stmt(Env& env, const Stmt& s) {
    if (const auto* let = std::get_if<StLet>(&s.node)) {
      ObjType result = ObjType::Unknown;
      if (const auto* j = std::get_if<ExprJoin>(&let->expr)) {
        need(env, j->p, ObjType::Point, s.pos, "join argument");
        need(env, j->q, ObjType::Point, s.pos, "join argument");
        result = ObjType::Line;
      } else if (const auto* m = std::get_if<ExprMeet>(&let->expr)) {
        need(env, m->l, ObjType::Line, s.pos, "meet argument");
        need(env, m->m, ObjType::Line, s.pos, "meet argument");
        result = ObjType::Point;
      } else if (const auto* x = std::get_if<ExprIntersect>(&let->expr)) {
        const ObjType a = lookup(env, x->a, s.pos);
        const ObjType b = lookup(env, x->b, s.pos);
        for (auto [ty, id] : {std::pair{a, &x->a}, std::pair{b, &x->b}})
          if (ty == ObjType::Point)
            err(s.pos, "intersect argument '" + *id + "' must be a line or circle");
        if (a == ObjType::Line && b == ObjType::Line)
          err(s.pos, "intersect of two lines: use meet instead");
        result = ObjType::Point;
      } else {
        const auto& c = std::get<ExprCircle>(let->expr);
        need(env, c.center, ObjType::Point, s.pos, "circle argument");
        need(env, c.from, ObjType::Point, s.pos, "circle argument");
        need(env, c.to, ObjType::Point, s.pos, "circle argument");
        result = ObjType::Circle;
      }
      bind(env, let->id, result, s.pos);
    } else if (const auto* req = std::get_if<StRequest>(&s.node)) {
      for (const SetAtom& atom : req->set.atoms)
        if (const auto* h = std::get_if<SetAtomHalfplane>(&atom))
          need(env, h->line, ObjType::Line, s.pos, "halfplane argument");
      bind(env, req->id, ObjType::Point, s.pos);
    } else if (const auto* iff = std::get_if<StIf>(&s.node)) {
      check_test(env, iff->test);
      Env then_env = env;
      check_block(then_env, iff->then_block);
      Env else_env = env;
      check_block(else_env, iff->else_block);
      Env merged;
      for (const auto& [id, ty] : then_env) {
        auto it = else_env.find(id);
        if (it != else_env.end() && it->second == ty) merged[id] = ty;
      }
      for (const auto& [id, ty] : then_env)
        if (!merged.count(id)) partial.insert(id);
      for (const auto& [id, ty] : else_env)
        if (!merged.count(id)) partial.insert(id);
      env = std::move(merged);
    } else if (const auto* rep = std::get_if<StRepeat>(&s.node)) {
      if (rep->count == 0) {
        warn(s.pos, "repeat 0: block never runs");
        Env scratch = env;
        check_block(scratch, rep->body);
      } else {
        check_block(env, rep->body);
      }
    } else if (const auto* outp = std::get_if<StOutput>(&s.node)) {
      lookup(env, outp->id, s.pos);
    } else {
      check_test(env, std::get<StAssert>(s.node).test);
    }
  }

  void check_block(Env& env, const Block& b) {
    for (const Stmt& s : b) check_stmt(env, s);
  }
};

ObjType type_of(const GeomObject& obj) {
  if (std::holds_alternative<HPoint>(obj)) return ObjType::Point;
  if (std::holds_alternative<HLine>(obj)) return ObjType::Line;
  return ObjType::Circle;
}

}  // namespace

std::vector<Diagnostic> check_script(const Script& s, const Configuration& inputs) {
  Checker ck;
  Checker::Env env;
  if (s.givens.size() != static_cast<std::size_t>(inputs.size()))
    ck.err({1, 1}, "script declares " + std::to_string(s.givens.size()) +
                       " givens but the configuration has " + std::to_string(inputs.size()) +
                       " objects");
  for (std::size_t i = 0; i < s.givens.size(); ++i) {
    if (env.count(s.givens[i]))
      ck.err({1, 1}, "duplicate given '" + s.givens[i] + "'");
    env[s.givens[i]] = i < static_cast<std::size_t>(inputs.size())
                           ? type_of(inputs.object(static_cast<int>(i)))
                           : ObjType::Unknown;
  }
  ck.check_block(env, s.body);
  return ck.out;
}

std::vector<Diagnostic> check_script(const Script& s) {
  Checker ck;
  Checker::Env env;
  for (const std::string& g : s.givens) {
    if (env.count(g)) ck.err({1, 1}, "duplicate given '" + g + "'");
    env[g] = ObjType::Unknown;
  }
  ck.check_block(env, s.body);
  return ck.out;
}

}  // namespace sclab::lang
