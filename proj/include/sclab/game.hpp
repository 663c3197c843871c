#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sclab/configuration.hpp"
#include "sclab/script.hpp"

namespace sclab {

// ---- open sets, resolved against a configuration ----
//
// The request surface of the game. Unlike lang::OpenSetExpr, coordinates are
// evaluated numbers and halfplane carriers are object ids, so a request is
// meaningful without any identifier environment.

struct DiscAtom {
  Real cx, cy;
  Rat radius;  // positive
};
struct HalfplaneAtom {
  int line = -1;
  int side = 1;  // the affine_side sign, +1 or -1
};
using OpenAtom = std::variant<DiscAtom, HalfplaneAtom>;

struct OpenSet {
  std::vector<OpenAtom> atoms;  // conjunction, never empty
};

// Strict membership: every atom satisfied with the exact sign test. Infinite
// points belong to no open set. Halfplane atoms must reference lines in cfg.
bool contains_strict(const OpenSet& u, const HPoint& p, const Configuration& cfg);

// ---- the answering side ----

struct AdversaryViolation : std::runtime_error {
  explicit AdversaryViolation(const std::string& w)
      : std::runtime_error("adversary violation: " + w) {}
};
struct SearchBudgetExceeded : std::runtime_error {
  explicit SearchBudgetExceeded(const std::string& w)
      : std::runtime_error("point search budget exceeded: " + w) {}
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::string name() const = 0;
  // Must return a point strictly inside u; the engine re-verifies.
  virtual HPoint choose_point(const OpenSet& u, const Configuration& cfg) = 0;
};

// Answers with the rational point of minimal coordinate denominators,
// x swept before y; within one denominator, numerators by |p|, + before -.
std::unique_ptr<Adversary> rational_adversary();

// Answers with T-preimages of rational points, so the T-image of every
// supplied point has rational coordinates. Skips points whose image equals a
// forbidden image; the list starts as { T((0,0)) }.
std::unique_ptr<Adversary> pullback_adversary(const ProjMap& t);

// ---- moves, traces, sessions ----

struct Move {
  enum class Kind { Join, Meet, Intersect, Circle, Request };
  Kind kind = Kind::Join;
  std::vector<int> args;      // object ids; empty for Request
  OpenSet set;                // Request only
  std::vector<int> response;  // ids produced (or found already present)
};

enum class Outcome { Won, Lost, Budget };

// Full record of one play. The final configuration carries every object; the
// first initial_size ids are the starting snapshot, so replaying the moves
// over that prefix rebuilds the rest exactly.
struct Trace {
  Configuration cfg;
  int initial_size = 0;
  GeomObject target;
  std::vector<Move> moves;
  std::vector<int> outputs;
  Outcome outcome = Outcome::Lost;
  int won_at = -1;  // moves played when the target first appeared; 0 = at start
  std::string adversary;
  long max_moves = 0;
  std::string note;  // one line, e.g. why a script run counts as lost
};

const char* outcome_name(Outcome o);

// Observation points for instrumented runs (twin replays, invariant checks).
struct PlayHooks {
  virtual ~PlayHooks() = default;
  virtual void on_move(const Move& m, const Configuration& cfg) {}
  virtual void on_test(const lang::Test& t, const std::vector<int>& ids, bool value,
                       const Configuration& cfg) {}
};

// One alternating game. Construction requests are Alice's moves; the join /
// meet / intersect / circle answers are forced, request() is answered by the
// adversary. The target membership test runs after every move (and once at
// the start), and a win sticks regardless of later moves.
class Session {
 public:
  Session(Configuration initial, GeomObject target, Adversary& adv, long max_moves = 1000,
          PlayHooks* hooks = nullptr);

  int join_line(int p, int q);
  int meet_point(int l, int m);
  // Line/conic or circle/circle intersection points in point_less order.
  // Disjoint curves give an empty response (a spent move, not an error).
  std::vector<int> intersect(int a, int b);
  int draw_circle(int center, int radius_from, int radius_to);
  int request(const OpenSet& u);

  bool won() const { return won_at_ >= 0; }
  bool done() const { return won() || moves_played_ >= max_moves_; }
  long moves_played() const { return moves_played_; }
  const Configuration& cfg() const { return cfg_; }
  const GeomObject& target() const { return target_; }

  void record_output(int id);
  Trace finish(std::string note = "");  // consumes the session

 private:
  const GeomObject& arg(int id) const;
  void require_active() const;
  int insert_one(const GeomObject& obj, Provenance prov);
  void commit(Move m);

  Configuration cfg_;
  GeomObject target_;
  Adversary* adv_;
  long max_moves_;
  PlayHooks* hooks_;
  long moves_played_ = 0;
  int won_at_ = -1;
  std::vector<Move> moves_;
  std::vector<int> outputs_;
  int initial_size_ = 0;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual void run(Session& s) = 0;
};

// Plays until the target is constructed (won), the strategy returns (lost),
// or the move budget is hit. Adversary search errors propagate: a failed
// answer is an error of the run, not a loss for either player.
Trace play(Strategy& strategy, Configuration initial, const GeomObject& target, Adversary& adv,
           long max_moves = 1000, PlayHooks* hooks = nullptr);

// Script front end. Givens bind positionally to the initial objects. A
// runtime failure of the script (missing intersection label, failed assert,
// kernel error, undefined name) ends the run as lost, with the reason noted.
Trace play(const lang::Script& script, Configuration initial, const GeomObject& target,
           Adversary& adv, long max_moves = 1000, PlayHooks* hooks = nullptr);

// Exact truth of one script test against resolved object ids. Throws
// std::invalid_argument when an operand has the wrong kind.
bool eval_test(lang::TestKind kind, const std::vector<int>& ids, const Configuration& cfg);

// ---- forcing fragments ----

// Four moves that end with a point on the given line or circle: one request
// on each side (inside/outside for a circle), the connecting line, and an
// intersection with the curve. Returns the id of the forced point.
int force_point_on_curve(Session& s, int curve_id);

// Four requests with small discs around (0,0), (1,0), (0,1), (2,3); the radii
// are small enough that any answers form a generic quadruple, and the check
// is re-run exactly on the actual responses.
std::array<int, 4> force_generic_quadruple(Session& s);

// ---- trace files ----

struct ReplayMismatch : std::runtime_error {
  explicit ReplayMismatch(const std::string& w) : std::runtime_error("replay mismatch: " + w) {}
};

std::string trace_to_text(const Trace& t);
Trace trace_from_text(std::string_view text, TowerPtr tower = nullptr);
Trace load_trace_file(const std::string& path, TowerPtr tower = nullptr);
void save_trace_file(const Trace& t, const std::string& path);

// Re-executes the moves over the initial snapshot, taking request responses
// from the recorded configuration, and demands id-for-id, value-for-value
// agreement. Returns the rebuilt configuration; its re-serialization is
// byte-identical to the original's.
Configuration replay_trace(const Trace& t);

}  // namespace sclab
