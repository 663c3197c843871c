#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sclab/geometry.hpp"

namespace sclab {

using GeomObject = std::variant<HPoint, HLine, Conic>;

bool geom_equal(const GeomObject& a, const GeomObject& b);
std::string to_text(const GeomObject& obj);

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& w) : std::runtime_error("configuration format: " + w) {}
};

enum class OpKind { Given, Join, Meet, LineConic, ConicConic, Compass, Arbitrary };
const char* op_kind_name(OpKind k);
std::optional<OpKind> op_kind_from_name(std::string_view name);

struct Provenance {
  OpKind op = OpKind::Given;
  std::vector<int> parents;  // ids of inputs, each smaller than the own id
  int output_index = 0;      // position within a multi-point result
  int step = 0;              // derivation depth (givens are 0)
};

// A finite, deduplicated collection of points, lines and conics over one
// shared tower, with provenance per object. Ids are insertion order, so
// iteration and serialization are deterministic. Lookup goes through
// interval-signature buckets (coarse dyadic cells of approx(64) midpoints)
// confirmed by exact comparison, which keeps insert/find near O(1) without
// ever trusting the approximation alone.
class Configuration {
 public:
  explicit Configuration(TowerPtr tower = nullptr)
      : tower_(tower ? tower : Tower::create()) {}

  const TowerPtr& tower() const { return tower_; }

  int size() const { return static_cast<int>(objects_.size()); }
  const GeomObject& object(int id) const { return objects_.at(id); }
  const Provenance& provenance(int id) const { return prov_.at(id); }

  const std::vector<int>& point_ids() const { return point_ids_; }
  const std::vector<int>& line_ids() const { return line_ids_; }
  const std::vector<int>& conic_ids() const { return conic_ids_; }

  struct Counts { std::size_t points = 0, lines = 0, conics = 0; };
  Counts counts() const {
    return {point_ids_.size(), line_ids_.size(), conic_ids_.size()};
  }

  struct InsertResult { int id; bool inserted; };
  InsertResult insert(const GeomObject& obj, Provenance prov);
  std::optional<int> find(const GeomObject& obj) const;
  bool contains(const GeomObject& obj) const { return find(obj).has_value(); }

  // Re-executes the producing operation of `id` on its parents; for givens
  // and arbitrary points, returns the stored object.
  GeomObject replay_provenance(int id) const;

  void save(std::ostream& os) const;
  static Configuration load(std::istream& is, TowerPtr tower = nullptr);
  static Configuration load_file(const std::string& path, TowerPtr tower = nullptr);

 private:
  std::vector<const Real*> signature_coords(const GeomObject& obj) const;

  TowerPtr tower_;
  std::vector<GeomObject> objects_;
  std::vector<Provenance> prov_;
  std::vector<int> point_ids_, line_ids_, conic_ids_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

// Parses one "point [..]" / "line [..]" / "conic [..]" form.
GeomObject parse_geom_object(std::string_view text, const TowerPtr& tower);
ProjMap parse_proj_map(std::string_view text, const TowerPtr& tower);

}  // namespace sclab
