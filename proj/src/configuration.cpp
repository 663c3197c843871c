#include "sclab/configuration.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sclab {

bool geom_equal(const GeomObject& a, const GeomObject& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return x == std::get<T>(b);
      },
      a);
}

std::string to_text(const GeomObject& obj) {
  return std::visit([](const auto& x) { return to_text(x); }, obj);
}

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Given: return "given";
    case OpKind::Join: return "join";
    case OpKind::Meet: return "meet";
    case OpKind::LineConic: return "line_conic";
    case OpKind::ConicConic: return "conic_conic";
    case OpKind::Compass: return "compass";
    case OpKind::Arbitrary: return "arbitrary";
  }
  return "?";
}

std::optional<OpKind> op_kind_from_name(std::string_view name) {
  for (OpKind k : {OpKind::Given, OpKind::Join, OpKind::Meet, OpKind::LineConic,
                   OpKind::ConicConic, OpKind::Compass, OpKind::Arbitrary})
    if (name == op_kind_name(k)) return k;
  return std::nullopt;
}

// ---- interval signatures ----

namespace {

constexpr unsigned kSigBits = 64;   // interval width for signatures
constexpr unsigned kCellBits = 24;  // cell grid resolution

std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
  return h;
}

std::uint64_t hash_mpz64(const mpz_class& z) {
  std::uint64_t h = static_cast<std::uint64_t>(mpz_sgn(z.get_mpz_t()) + 2);
  const mp_size_t n = mpz_size(z.get_mpz_t());
  for (mp_size_t i = 0; i < n; ++i)
    h = mix64(h, static_cast<std::uint64_t>(mpz_getlimbn(z.get_mpz_t(), i)));
  return h;
}

struct CoordCell {
  mpz_class cell;
  bool also_below = false;  // true value may land one cell lower
  bool also_above = false;
};

CoordCell coord_cell(const Real& x) {
  const Rat scaled = x.approx(kSigBits).mid() * pow2(kCellBits);
  CoordCell out;
  out.cell = scaled.floor();
  const Rat frac = scaled - Rat(out.cell);
  const Rat tol = pow2(-20);
  out.also_below = frac < tol;
  out.also_above = frac > Rat(1) - tol;
  return out;
}

std::uint64_t combo_key(std::size_t type_tag, const std::vector<mpz_class>& cells) {
  std::uint64_t h = mix64(0x5c1ab000ULL + type_tag, cells.size());
  for (const mpz_class& c : cells) h = mix64(h, hash_mpz64(c));
  return h;
}

}  // namespace

std::vector<const Real*> Configuration::signature_coords(const GeomObject& obj) const {
  std::vector<const Real*> out;
  if (const auto* p = std::get_if<HPoint>(&obj)) {
    for (int i = 0; i < 3; ++i) out.push_back(&p->h()[i]);
  } else if (const auto* l = std::get_if<HLine>(&obj)) {
    for (int i = 0; i < 3; ++i) out.push_back(&l->h()[i]);
  } else {
    const auto& c = std::get<Conic>(obj);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) out.push_back(&c.m()(i, j));
  }
  return out;
}

Configuration::InsertResult Configuration::insert(const GeomObject& obj, Provenance prov) {
  if (auto id = find(obj)) return {*id, false};
  const int id = static_cast<int>(objects_.size());
  objects_.push_back(obj);
  prov_.push_back(std::move(prov));
  switch (obj.index()) {
    case 0: point_ids_.push_back(id); break;
    case 1: line_ids_.push_back(id); break;
    default: conic_ids_.push_back(id); break;
  }
  std::vector<mpz_class> cells;
  for (const Real* c : signature_coords(obj)) cells.push_back(coord_cell(*c).cell);
  buckets_[combo_key(obj.index(), cells)].push_back(id);
  return {id, true};
}

std::optional<int> Configuration::find(const GeomObject& obj) const {
  std::vector<CoordCell> coords;
  for (const Real* c : signature_coords(obj)) coords.push_back(coord_cell(*c));
  // enumerate every plausible cell combination (near-boundary coordinates
  // contribute two candidates)
  std::vector<std::vector<mpz_class>> options;
  for (const CoordCell& c : coords) {
    std::vector<mpz_class> opt{c.cell};
    if (c.also_below) opt.push_back(c.cell - 1);
    if (c.also_above) opt.push_back(c.cell + 1);
    options.push_back(std::move(opt));
  }
  std::vector<std::size_t> pick(options.size(), 0);
  for (;;) {
    std::vector<mpz_class> cells;
    cells.reserve(options.size());
    for (std::size_t i = 0; i < options.size(); ++i) cells.push_back(options[i][pick[i]]);
    auto it = buckets_.find(combo_key(obj.index(), cells));
    if (it != buckets_.end())
      for (int id : it->second)
        if (geom_equal(objects_[id], obj)) return id;
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  return std::nullopt;
}

GeomObject Configuration::replay_provenance(int id) const {
  const Provenance& pr = prov_.at(id);
  auto point_at = [&](int i) { return std::get<HPoint>(objects_.at(i)); };
  auto line_at = [&](int i) { return std::get<HLine>(objects_.at(i)); };
  auto conic_at = [&](int i) { return std::get<Conic>(objects_.at(i)); };
  switch (pr.op) {
    case OpKind::Given:
    case OpKind::Arbitrary:
      return objects_.at(id);
    case OpKind::Join:
      return join(point_at(pr.parents.at(0)), point_at(pr.parents.at(1)));
    case OpKind::Meet:
      return meet(line_at(pr.parents.at(0)), line_at(pr.parents.at(1)));
    case OpKind::LineConic: {
      auto pts = line_conic_intersections(line_at(pr.parents.at(0)), conic_at(pr.parents.at(1)),
                                          tower_);
      return pts.at(pr.output_index);
    }
    case OpKind::ConicConic: {
      auto pts = circle_circle_intersections(conic_at(pr.parents.at(0)),
                                             conic_at(pr.parents.at(1)), tower_);
      return pts.at(pr.output_index);
    }
    case OpKind::Compass:
      return circle_from(point_at(pr.parents.at(0)), point_at(pr.parents.at(1)),
                         point_at(pr.parents.at(2)));
  }
  throw std::logic_error("replay_provenance: bad op kind");
}

// ---- text format ----

void Configuration::save(std::ostream& os) const {
  os << "sclab-config v1\n";
  os << "objects " << objects_.size() << "\n";
  for (std::size_t i = 0; i < objects_.size(); ++i)
    os << i << " " << to_text(objects_[i]) << "\n";
  os << "provenance\n";
  for (std::size_t i = 0; i < prov_.size(); ++i) {
    const Provenance& p = prov_[i];
    os << i << " " << op_kind_name(p.op);
    for (int parent : p.parents) os << " " << parent;
    if (p.output_index != 0) os << " idx " << p.output_index;
    os << " step " << p.step << "\n";
  }
  os << "end\n";
}

namespace {

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) { ++pos; return true; }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) throw FormatError(std::string("expected '") + c + "' in object text");
  }
  bool eat_word(std::string_view w) {
    skip_ws();
    if (s.substr(pos, w.size()) == w) { pos += w.size(); return true; }
    return false;
  }
  bool at_end() {
    skip_ws();
    return pos == s.size();
  }
};

Vec3<Real> parse_vec3(Cursor& c, const TowerPtr& tower) {
  c.expect('[');
  Real x = parse_real_prefix(c.s, c.pos, tower);
  c.expect(':');
  Real y = parse_real_prefix(c.s, c.pos, tower);
  c.expect(':');
  Real z = parse_real_prefix(c.s, c.pos, tower);
  c.expect(']');
  return Vec3<Real>(x, y, z);
}

}  // namespace

GeomObject parse_geom_object(std::string_view text, const TowerPtr& tower) {
  Cursor c{text, 0};
  if (c.eat_word("point")) {
    Vec3<Real> v = parse_vec3(c, tower);
    if (!c.at_end()) throw FormatError("trailing text after point");
    return HPoint::from_h(v);
  }
  if (c.eat_word("line")) {
    Vec3<Real> v = parse_vec3(c, tower);
    if (!c.at_end()) throw FormatError("trailing text after line");
    return HLine::from_h(v);
  }
  if (c.eat_word("conic")) {
    c.expect('[');
    Real m11 = parse_real_prefix(c.s, c.pos, tower);
    Real m12 = parse_real_prefix(c.s, c.pos, tower);
    Real m13 = parse_real_prefix(c.s, c.pos, tower);
    c.expect(';');
    Real m22 = parse_real_prefix(c.s, c.pos, tower);
    Real m23 = parse_real_prefix(c.s, c.pos, tower);
    c.expect(';');
    Real m33 = parse_real_prefix(c.s, c.pos, tower);
    c.expect(']');
    if (!c.at_end()) throw FormatError("trailing text after conic");
    Mat3<Real> m;
    m << m11, m12, m13,
         m12, m22, m23,
         m13, m23, m33;
    return Conic::from_matrix(m);
  }
  throw FormatError("expected point/line/conic");
}

ProjMap parse_proj_map(std::string_view text, const TowerPtr& tower) {
  Cursor c{text, 0};
  if (!c.eat_word("map")) throw FormatError("expected map");
  c.expect('[');
  Mat3<Real> m;
  for (int i = 0; i < 3; ++i) {
    if (i) c.expect(';');
    for (int j = 0; j < 3; ++j) m(i, j) = parse_real_prefix(c.s, c.pos, tower);
  }
  c.expect(']');
  if (!c.at_end()) throw FormatError("trailing text after map");
  return ProjMap::from_matrix(m);
}

Configuration Configuration::load(std::istream& is, TowerPtr tower) {
  Configuration cfg(std::move(tower));
  std::string line;
  if (!std::getline(is, line) || line != "sclab-config v1")
    throw FormatError("missing header");
  if (!std::getline(is, line) || line.rfind("objects ", 0) != 0)
    throw FormatError("missing objects count");
  const std::size_t n = std::stoul(line.substr(8));
  std::vector<GeomObject> objs;
  objs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw FormatError("truncated object list");
    std::istringstream ls(line);
    std::size_t id = 0;
    ls >> id;
    if (!ls || id != i) throw FormatError("object ids must be sequential");
    std::string rest;
    std::getline(ls, rest);
    objs.push_back(parse_geom_object(rest, cfg.tower_));
  }
  std::vector<Provenance> provs(n);
  if (!std::getline(is, line) || line != "provenance") throw FormatError("missing provenance");
  while (std::getline(is, line) && line != "end") {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t id = 0;
    std::string kind;
    ls >> id >> kind;
    if (!ls || id >= n) throw FormatError("bad provenance id");
    auto op = op_kind_from_name(kind);
    if (!op) throw FormatError("unknown op kind: " + kind);
    Provenance p;
    p.op = *op;
    std::string tok;
    while (ls >> tok) {
      if (tok == "idx") {
        ls >> p.output_index;
      } else if (tok == "step") {
        ls >> p.step;
      } else {
        p.parents.push_back(std::stoi(tok));
      }
    }
    provs[id] = std::move(p);
  }
  if (line != "end") throw FormatError("missing end marker");
  for (std::size_t i = 0; i < n; ++i) {
    auto res = cfg.insert(objs[i], provs[i]);
    if (!res.inserted) throw FormatError("duplicate object in file");
  }
  return cfg;
}

Configuration Configuration::load_file(const std::string& path, TowerPtr tower) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  return load(f, std::move(tower));
}

}  // namespace sclab
