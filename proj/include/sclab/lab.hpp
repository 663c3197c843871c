#pragma once

// Demonstration harness built on the game engine: transports recorded traces
// through projective maps, hunts for test evaluations that flip under a map,
// runs center-finding scripts against the pullback adversary with per-move
// invariant checks, and searches rational-plane straightedge derivations.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sclab/game.hpp"

namespace sclab {

// Internal inconsistency while transporting a trace (for example an
// invertible map sending two distinct objects to the same image). These
// indicate a bug, not a property of the input.
struct StepInvalid : std::logic_error {
  explicit StepInvalid(const std::string& what) : std::logic_error("step invalid: " + what) {}
};

// A per-move pullback invariant failed during defeat_strategy. Like
// StepInvalid this signals an engine defect, never a refutation of the run.
struct InvariantViolation : std::logic_error {
  explicit InvariantViolation(const std::string& what)
      : std::logic_error("invariant violation: " + what) {}
};

// Result of transporting a trace through a map. On success `trace` holds the
// image derivation: initial objects and request responses mapped, every
// deterministic move recomputed from the images and verified projectively
// equal to the image of the original result. Request set descriptions are
// carried over verbatim as annotations of the original play. On failure
// `failed_move` indexes the first move whose recomputation disagrees with
// the transported original (compass moves under a non-similarity, say).
struct TransformReport {
  bool ok = false;
  Trace trace;
  int failed_move = -1;
  std::string message;
  std::vector<int> mapped;  // original object id -> image object id
};

// The map's entries must be rational or live on the trace's tower.
TransformReport transform_trace(const Trace& trace, const ProjMap& t);

// First test evaluation whose truth value differs between a play and its
// image under a map.
struct DivergenceWitness {
  lang::TestKind test = lang::TestKind::Incident;
  lang::SourcePos pos;
  int eval_index = 0;  // position in evaluation order, 0-based
  bool original_value = false;
  bool transformed_value = false;
  std::vector<int> operands;  // original object ids
  std::string detail;
};

// Runs the script once against the adversary while maintaining a twin
// configuration: initial objects and adversary answers mapped through t,
// deterministic moves recomputed on the images (intersection labels follow
// the coordinate convention in each world). Every test is evaluated in both
// worlds; control flow follows the original values. Returns the first
// disagreement, or nullopt when every evaluation matches.
std::optional<DivergenceWitness> find_test_divergence(const lang::Script& script,
                                                      Configuration initial, const ProjMap& t,
                                                      Adversary& adversary, long max_moves = 1000);

// Outcome of running a center-finding script against the pullback adversary
// for circle_preserving_map(u, t). `won` reports exact membership of the
// target in the final configuration; the per-move checks (deterministic
// steps commute with the map, every adversary answer has a finite rational
// image, the target never appears) throw InvariantViolation instead of
// being recorded, so a returned report always passed them.
struct DefeatReport {
  Trace trace;
  bool won = false;
  bool center_absent = false;
  int moves_played = 0;
  int checked_moves = 0;
  std::string summary;
};

// Plays `script` on the initial configuration {unit circle} against
// pullback_adversary(circle_preserving_map(u, t)). The script sees exactly
// one given. A shared tower may be supplied so that targets discovered in an
// earlier run compare exactly.
DefeatReport defeat_strategy(const lang::Script& script, const HPoint& target, const Real& u,
                             const Real& t, long max_moves = 200, TowerPtr tower = nullptr);

// One straightedge derivation in the rational affine plane.
struct Derivation {
  std::vector<std::string> steps;  // ancestors of the target, creation order
  int depth = 0;                   // search round that produced the target
};

struct DeriveResult {
  std::optional<Derivation> chain;
  bool budget_exhausted = false;
  bool fixed_point = false;  // closure completed without reaching the target
  long objects = 0;          // distinct points and lines examined
};

// Breadth-first closure of four rational seed points under join of distinct
// points and meet of non-parallel lines, entirely in the rational affine
// plane (meets at infinity are discarded). Stops when the target point
// appears, the closure stops growing, or `max_objects` is exceeded.
DeriveResult rational_plane_derivability(const std::array<HPoint, 4>& seeds, const HPoint& target,
                                         long max_objects = 200000);

}  // namespace sclab
