#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sclab/configuration.hpp"

namespace sclab {

// Which construction operations a closure may apply.
struct OpSet {
  bool join = true;
  bool meet = true;
  bool line_conic = true;
  bool conic_conic = true;
  bool compass = true;

  static OpSet all() { return {}; }
  // Straightedge mode: initial circles stay usable as intersection carriers,
  // but no new circles can be drawn.
  static OpSet straightedge() { return {true, true, true, true, false}; }

  bool any() const { return join || meet || line_conic || conic_conic || compass; }
  std::string str() const;
  static std::optional<OpSet> parse(std::string_view flags);  // "joins,meets,..."
};

struct Budget {
  std::size_t max_objects = 20000;
  std::size_t max_tower_levels = Tower::kDefaultLevelLimit;
  std::size_t max_expr_nodes = Tower::kDefaultNodeLimit;

  // Reads SCLAB_MAX_OBJECTS / SCLAB_MAX_TOWER_LEVELS / SCLAB_MAX_EXPR_NODES,
  // keeping defaults for unset or malformed values.
  static Budget from_env();
};

struct DepthCounts {
  int depth = 0;
  std::size_t points = 0, lines = 0, conics = 0;
};

struct GrowthStats {
  std::vector<DepthCounts> per_depth;  // row 0 is the input configuration
  bool reached_fixed_point = false;
  int depth_completed = 0;
  std::string csv() const;  // "depth,points,lines,conics" rows
};

struct StepResult {
  Configuration cfg;
  bool fixed_point = false;
};

// One round: every object producible by one enabled operation from objects
// of cfg. Throws BudgetExceeded when a limit trips.
StepResult closure_step(const Configuration& cfg, const OpSet& ops, const Budget& budget = {});

std::pair<Configuration, GrowthStats> closure_to_depth(const Configuration& cfg, int depth,
                                                       const OpSet& ops,
                                                       const Budget& budget = {});

// No three collinear and the six connecting lines pairwise non-parallel.
bool generic_quadruple_check(const HPoint& p1, const HPoint& p2, const HPoint& p3,
                             const HPoint& p4);

struct ProbeResult {
  std::optional<HPoint> witness;
  int witness_depth = -1;          // provenance depth of the witness
  std::size_t objects_explored = 0;
  bool budget_exhausted = false;   // NotFound because limits tripped
};

// Searches the closure for a finite point within the open epsilon box around
// target, best-first (scored by fast float proximity) with a breadth-first
// fallback lane so nothing starves. The box test itself is exact. A failure
// is always inconclusive, never a disproof.
ProbeResult density_probe(const Configuration& cfg, const HPoint& target, const Rat& epsilon,
                          const OpSet& ops, const Budget& budget = {});

}  // namespace sclab
