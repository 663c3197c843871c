#include <cctype>
#include <fstream>
#include <sstream>

#include "sclab/game.hpp"

namespace sclab {

namespace {

const char* move_kind_name(Move::Kind k) {
  switch (k) {
    case Move::Kind::Join: return "join";
    case Move::Kind::Meet: return "meet";
    case Move::Kind::Intersect: return "intersect";
    case Move::Kind::Circle: return "circle";
    default: return "request";
  }
}

void put_set(std::ostream& os, const OpenSet& u) {
  bool first = true;
  for (const OpenAtom& atom : u.atoms) {
    if (!first) os << " and ";
    first = false;
    if (const auto* d = std::get_if<DiscAtom>(&atom)) {
      os << "disc((" << d->cx.serialize() << ", " << d->cy.serialize() << "), "
         << d->radius.str() << ")";
    } else {
      const auto& h = std::get<HalfplaneAtom>(atom);
      os << "halfplane(" << h.line << ", " << (h.side > 0 ? '+' : '-') << ")";
    }
  }
}

struct SetReader {
  std::string_view text;
  std::size_t pos = 0;
  const TowerPtr& tower;

  void expect(std::string_view s) {
    if (text.substr(pos, s.size()) != s)
      throw ReplayMismatch("bad set text near '" + std::string(text.substr(pos, 24)) + "'");
    pos += s.size();
  }

  bool try_eat(std::string_view s) {
    if (text.substr(pos, s.size()) != s) return false;
    pos += s.size();
    return true;
  }

  Real real() {
    const Real v = parse_real_prefix(text, pos, tower);
    return v;
  }

  Rat rat() {
    std::size_t end = pos;
    while (end < text.size() && text[end] != ')') ++end;
    const auto r = Rat::from_string(text.substr(pos, end - pos));
    if (!r) throw ReplayMismatch("bad rational in set text");
    pos = end;
    return *r;
  }

  long integer() {
    std::size_t end = pos;
    while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) ||
                                 text[end] == '-'))
      ++end;
    const long v = std::stol(std::string(text.substr(pos, end - pos)));
    pos = end;
    return v;
  }

  OpenSet run() {
    OpenSet u;
    for (;;) {
      if (try_eat("disc((")) {
        DiscAtom d{real(), Real(0), Rat(1)};
        expect(", ");
        d.cy = real();
        expect("), ");
        d.radius = rat();
        expect(")");
        u.atoms.push_back(std::move(d));
      } else {
        expect("halfplane(");
        HalfplaneAtom h;
        h.line = static_cast<int>(integer());
        expect(", ");
        h.side = try_eat("+") ? 1 : (expect("-"), -1);
        expect(")");
        u.atoms.push_back(h);
      }
      if (!try_eat(" and ")) break;
    }
    return u;
  }
};

}  // namespace

std::string trace_to_text(const Trace& t) {
  std::ostringstream os;
  os << "sclab-trace v1\n";
  os << "adversary " << t.adversary << "\n";
  os << "max-moves " << t.max_moves << "\n";
  os << "outcome " << outcome_name(t.outcome) << "\n";
  os << "won-at " << t.won_at << "\n";
  if (!t.note.empty()) os << "note " << t.note << "\n";
  os << "target " << to_text(t.target) << "\n";
  os << "initial " << t.initial_size << "\n";
  os << "outputs";
  for (int id : t.outputs) os << " " << id;
  os << "\n";
  os << "moves " << t.moves.size() << "\n";
  for (const Move& m : t.moves) {
    os << move_kind_name(m.kind);
    if (m.kind == Move::Kind::Request) {
      os << " ";
      put_set(os, m.set);
    } else {
      for (int a : m.args) os << " " << a;
    }
    os << " ->";
    for (int r : m.response) os << " " << r;
    os << "\n";
  }
  os << "configuration\n";
  t.cfg.save(os);
  return os.str();
}

Trace trace_from_text(std::string_view text, TowerPtr tower) {
  std::istringstream is{std::string(text)};
  std::string line;
  const auto next = [&](const char* what) -> std::string& {
    if (!std::getline(is, line)) throw ReplayMismatch(std::string("truncated trace: ") + what);
    return line;
  };
  const auto field = [&](const std::string& key) {
    next(key.c_str());
    if (line.rfind(key + " ", 0) != 0 && line != key)
      throw ReplayMismatch("expected '" + key + "', got '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  };

  if (next("header") != "sclab-trace v1") throw ReplayMismatch("missing trace header");
  Trace t;
  t.adversary = field("adversary");
  t.max_moves = std::stol(field("max-moves"));
  const std::string outcome = field("outcome");
  if (outcome == "won")
    t.outcome = Outcome::Won;
  else if (outcome == "lost")
    t.outcome = Outcome::Lost;
  else if (outcome == "budget")
    t.outcome = Outcome::Budget;
  else
    throw ReplayMismatch("unknown outcome: " + outcome);
  t.won_at = std::stoi(field("won-at"));
  next("note or target");
  if (line.rfind("note ", 0) == 0) {
    t.note = line.substr(5);
    next("target");
  }
  if (line.rfind("target ", 0) != 0)
    throw ReplayMismatch("expected 'target', got '" + line + "'");
  const std::string target_text = line.substr(7);
  t.initial_size = std::stoi(field("initial"));
  const std::string outs = field("outputs");
  {
    std::istringstream ls(outs);
    int id = 0;
    while (ls >> id) t.outputs.push_back(id);
  }
  const long nmoves = std::stol(field("moves"));
  std::vector<std::string> move_lines;
  for (long i = 0; i < nmoves; ++i) move_lines.push_back(next("move"));
  if (next("configuration marker") != "configuration")
    throw ReplayMismatch("missing configuration block");
  t.cfg = Configuration::load(is, std::move(tower));
  t.target = parse_geom_object(target_text, t.cfg.tower());

  for (const std::string& ml : move_lines) {
    Move m;
    const std::size_t arrow = ml.find(" ->");
    if (arrow == std::string::npos) throw ReplayMismatch("move line without response: " + ml);
    const std::string head = ml.substr(0, arrow);
    {
      std::istringstream ls(ml.substr(arrow + 3));
      int id = 0;
      while (ls >> id) m.response.push_back(id);
    }
    const std::size_t sp = head.find(' ');
    const std::string kind = head.substr(0, sp == std::string::npos ? head.size() : sp);
    const std::string rest = sp == std::string::npos ? "" : head.substr(sp + 1);
    if (kind == "request") {
      m.kind = Move::Kind::Request;
      SetReader reader{rest, 0, t.cfg.tower()};
      m.set = reader.run();
    } else {
      if (kind == "join")
        m.kind = Move::Kind::Join;
      else if (kind == "meet")
        m.kind = Move::Kind::Meet;
      else if (kind == "intersect")
        m.kind = Move::Kind::Intersect;
      else if (kind == "circle")
        m.kind = Move::Kind::Circle;
      else
        throw ReplayMismatch("unknown move kind: " + kind);
      std::istringstream ls(rest);
      int id = 0;
      while (ls >> id) m.args.push_back(id);
    }
    t.moves.push_back(std::move(m));
  }
  return t;
}

Trace load_trace_file(const std::string& path, TowerPtr tower) {
  std::ifstream f(path);
  if (!f) throw ReplayMismatch("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return trace_from_text(os.str(), std::move(tower));
}

void save_trace_file(const Trace& t, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ReplayMismatch("cannot open " + path + " for writing");
  f << trace_to_text(t);
}

Configuration replay_trace(const Trace& t) {
  Configuration out(t.cfg.tower());
  if (t.initial_size > t.cfg.size()) throw ReplayMismatch("initial size exceeds object count");
  for (int i = 0; i < t.initial_size; ++i) out.insert(t.cfg.object(i), t.cfg.provenance(i));

  int step = 0;
  const auto check = [&](int got, int want) {
    if (got != want)
      throw ReplayMismatch("move " + std::to_string(step) + " rebuilt id " + std::to_string(got) +
                           ", trace says " + std::to_string(want));
  };
  const auto pt = [&](int id) -> const HPoint& {
    const auto* p = std::get_if<HPoint>(&out.object(id));
    if (!p) throw ReplayMismatch("expected a point at id " + std::to_string(id));
    return *p;
  };
  const auto ln = [&](int id) -> const HLine& {
    const auto* l = std::get_if<HLine>(&out.object(id));
    if (!l) throw ReplayMismatch("expected a line at id " + std::to_string(id));
    return *l;
  };

  for (const Move& m : t.moves) {
    ++step;
    switch (m.kind) {
      case Move::Kind::Join: {
        const int id = out.insert(join(pt(m.args[0]), pt(m.args[1])),
                                  {OpKind::Join, m.args, 0, step}).id;
        check(id, m.response.at(0));
        break;
      }
      case Move::Kind::Meet: {
        const int id = out.insert(meet(ln(m.args[0]), ln(m.args[1])),
                                  {OpKind::Meet, m.args, 0, step}).id;
        check(id, m.response.at(0));
        break;
      }
      case Move::Kind::Circle: {
        const int id = out.insert(circle_from(pt(m.args[0]), pt(m.args[1]), pt(m.args[2])),
                                  {OpKind::Compass, m.args, 0, step}).id;
        check(id, m.response.at(0));
        break;
      }
      case Move::Kind::Intersect: {
        const int a = m.args.at(0), b = m.args.at(1);
        const GeomObject& oa = out.object(a);
        const GeomObject& ob = out.object(b);
        if (std::holds_alternative<HLine>(oa) && std::holds_alternative<HLine>(ob)) {
          const int id = out.insert(meet(std::get<HLine>(oa), std::get<HLine>(ob)),
                                    {OpKind::Meet, {a, b}, 0, step}).id;
          check(id, m.response.at(0));
          break;
        }
        std::vector<HPoint> pts;
        std::vector<int> parents;
        OpKind op = OpKind::LineConic;
        if (std::holds_alternative<Conic>(oa) && std::holds_alternative<Conic>(ob)) {
          op = OpKind::ConicConic;
          parents = {std::min(a, b), std::max(a, b)};
          try {
            pts = circle_circle_intersections(std::get<Conic>(oa), std::get<Conic>(ob),
                                              out.tower());
          } catch (const ConcentricCircles&) {
          }
        } else {
          const bool a_is_line = std::holds_alternative<HLine>(oa);
          parents = {a_is_line ? a : b, a_is_line ? b : a};
          pts = line_conic_intersections(ln(parents[0]),
                                         std::get<Conic>(out.object(parents[1])), out.tower());
        }
        if (pts.size() != m.response.size())
          throw ReplayMismatch("move " + std::to_string(step) + " rebuilt " +
                               std::to_string(pts.size()) + " points, trace says " +
                               std::to_string(m.response.size()));
        for (std::size_t i = 0; i < pts.size(); ++i)
          check(out.insert(pts[i], {op, parents, static_cast<int>(i), step}).id, m.response[i]);
        break;
      }
      case Move::Kind::Request: {
        const int want = m.response.at(0);
        const auto* p = std::get_if<HPoint>(&t.cfg.object(want));
        if (!p) throw ReplayMismatch("request response is not a point");
        if (!contains_strict(m.set, *p, out))
          throw ReplayMismatch("move " + std::to_string(step) +
                               " request response is outside the recorded set");
        check(out.insert(*p, {OpKind::Arbitrary, {}, 0, step}).id, want);
        break;
      }
    }
  }

  if (out.size() != t.cfg.size())
    throw ReplayMismatch("rebuilt " + std::to_string(out.size()) + " objects, trace has " +
                         std::to_string(t.cfg.size()));
  for (int i = 0; i < out.size(); ++i)
    if (!geom_equal(out.object(i), t.cfg.object(i)))
      throw ReplayMismatch("object " + std::to_string(i) + " differs after replay");
  return out;
}

}  // namespace sclab
