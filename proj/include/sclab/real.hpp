#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sclab/rational.hpp"

namespace sclab {

class Tower;
using TowerPtr = std::shared_ptr<Tower>;

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};
struct DivisionByZero : std::domain_error {
  DivisionByZero() : std::domain_error("division by zero value") {}
};
struct NegativeRadicand : std::domain_error {
  NegativeRadicand() : std::domain_error("sqrt of negative value") {}
};
struct TowerMismatch : std::invalid_argument {
  TowerMismatch() : std::invalid_argument("operands belong to different towers") {}
};
struct TowerRequired : std::invalid_argument {
  TowerRequired() : std::invalid_argument("operation needs a tower to extend") {}
};

// Closed dyadic interval with exact rational endpoints, lo <= hi.
struct DyadicInterval {
  Rat lo, hi;
  Rat width() const { return hi - lo; }
  Rat mid() const { return (lo + hi) * Rat(1, 2); }
  bool contains_zero() const { return lo.sign() <= 0 && hi.sign() >= 0; }
};

// A constructible real: an element of a tower of real quadratic extensions
// of Q. The representation is the nested normal form
//
//   level 0:  rational
//   level k:  a + b * sqrt(r_k)   with a, b of level < k,
//
// where r_k is the k-th radicand of the ambient Tower. Values are immutable
// and share subtrees. Equality of values is semantic (sign of difference),
// never structural; redundant tower levels are allowed and harmless.
class Real {
 public:
  Real() : Real(Rat()) {}
  Real(long n) : Real(Rat(n)) {}
  Real(const Rat& q);

  int level() const;
  std::size_t tree_nodes() const;
  const TowerPtr& tower() const { return tower_; }

  // Exact sign in {-1, 0, +1}. Decided recursively: sign(a + b*sqrt(r))
  // follows from sign(a), sign(b) and, when they disagree, from
  // sign(a^2 - b^2 r), whose level is strictly lower.
  int sign() const;
  bool is_zero() const { return sign() == 0; }

  // Interval of width <= 2^-precision_bits containing the value.
  DyadicInterval approx(unsigned precision_bits) const;
  double to_double() const;

  // The rational value if the representation collapses to one (all sqrt
  // coefficients are zero values). Best effort: a value that is rational
  // only by accident of a redundant radicand is not detected.
  std::optional<Rat> as_rational() const;

  Real operator-() const;
  Real abs() const { return sign() < 0 ? -*this : *this; }
  Real inverse() const;  // throws DivisionByZero on zero value

  friend Real operator+(const Real& x, const Real& y);
  friend Real operator-(const Real& x, const Real& y);
  friend Real operator*(const Real& x, const Real& y);
  friend Real operator/(const Real& x, const Real& y);
  Real& operator+=(const Real& o) { *this = *this + o; return *this; }
  Real& operator-=(const Real& o) { *this = *this - o; return *this; }
  Real& operator*=(const Real& o) { *this = *this * o; return *this; }
  Real& operator/=(const Real& o) { *this = *this / o; return *this; }

  // sqrt of a nonnegative value. Detects squares of existing field elements
  // (best effort) before appending a new tower level; a pure rational input
  // that is not a perfect square needs `hint` (or an operand tower) to host
  // the new level.
  static Real sqrt(const Real& x, const TowerPtr& hint = nullptr);

  // Fully parenthesized expression text, e.g. "(1 + (2 * sqrt(2)))".
  // Structural, lossless up to tower level identity; parse() rebuilds an
  // equal value on any tower.
  std::string serialize() const;
  static Real parse(std::string_view text, const TowerPtr& tower);

  friend bool operator==(const Real& x, const Real& y) { return (x - y).sign() == 0; }
  friend bool operator!=(const Real& x, const Real& y) { return !(x == y); }
  friend bool operator<(const Real& x, const Real& y) { return (x - y).sign() < 0; }
  friend bool operator<=(const Real& x, const Real& y) { return (x - y).sign() <= 0; }
  friend bool operator>(const Real& x, const Real& y) { return (x - y).sign() > 0; }
  friend bool operator>=(const Real& x, const Real& y) { return (x - y).sign() >= 0; }

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  Real(NodePtr n, TowerPtr t) : node_(std::move(n)), tower_(std::move(t)) {}
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
  TowerPtr tower_;  // null for pure rationals created outside any tower
};

// Session-scoped, append-only list of radicands. All values of one
// configuration/game share one tower; values from different towers must not
// be mixed (TowerMismatch). Appending is serialized internally; concurrent
// reads are safe.
class Tower : public std::enable_shared_from_this<Tower> {
 public:
  static TowerPtr create(std::size_t node_limit = kDefaultNodeLimit);

  std::size_t levels() const;
  Real radicand(int level) const;        // 1-based
  const Real::NodePtr& radicand_n(int level) const;  // same, without the Real wrapper

  std::size_t node_limit() const { return node_limit_.load(); }
  void set_node_limit(std::size_t n) { node_limit_.store(n); }
  std::size_t level_limit() const { return level_limit_.load(); }
  void set_level_limit(std::size_t n) { level_limit_.store(n); }

  static constexpr std::size_t kDefaultNodeLimit = 1u << 22;
  static constexpr std::size_t kDefaultLevelLimit = 64;

 private:
  friend class Real;
  Tower() = default;

  struct Reuse { int level; Rat factor; };
  // Finds a level whose radicand can express sqrt(x) (equal value, or x a
  // rational square multiple), appending a new level otherwise. Appends are
  // serialized by mu_; radicand_n() reads are lock-free (storage is reserved
  // up front, so elements never move, and count_ is published with release
  // ordering).
  Reuse intern_radicand(const Real& x);

  static constexpr std::size_t kMaxLevels = 4096;

  mutable std::mutex mu_;
  // Nodes, not Reals: a stored Real would hold a TowerPtr back to this
  // tower and pin it forever.
  std::vector<Real::NodePtr> radicands_;
  std::atomic<std::size_t> count_{0};
  std::atomic<std::size_t> node_limit_{kDefaultNodeLimit};
  std::atomic<std::size_t> level_limit_{kDefaultLevelLimit};
};

inline int cmp(const Real& x, const Real& y) { return (x - y).sign(); }

// Parses one exact-number expression starting at text[pos], advancing pos
// past it (and any leading whitespace/comments). Used to read juxtaposed
// numbers inside larger formats.
Real parse_real_prefix(std::string_view text, std::size_t& pos, const TowerPtr& tower);

std::ostream& operator<<(std::ostream& os, const Real& x);

}  // namespace sclab
