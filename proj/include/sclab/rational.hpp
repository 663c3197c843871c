#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace sclab {

// Exact rational number. Thin eager wrapper around mpq_class: every
// operator returns a fully evaluated, canonicalized value, so Rat can be
// stored in containers and Eigen matrices without expression-template
// surprises. Canonical form: reduced, denominator > 0, zero is 0/1.
class Rat {
 public:
  Rat() : q_(0) {}
  Rat(long n) : q_(n) {}
  Rat(long n, long d);
  explicit Rat(const mpz_class& n) : q_(n) {}
  Rat(const mpz_class& n, const mpz_class& d);
  explicit Rat(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  static std::optional<Rat> from_string(std::string_view s);

  const mpq_class& mpq() const { return q_; }
  mpz_class num() const { return q_.get_num(); }
  mpz_class den() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return q_.get_den() == 1; }

  Rat operator-() const { return Rat(mpq_class(-q_)); }
  Rat abs() const { return sign() < 0 ? -*this : *this; }
  Rat inverse() const;

  friend Rat operator+(const Rat& a, const Rat& b) { return Rat(mpq_class(a.q_ + b.q_)); }
  friend Rat operator-(const Rat& a, const Rat& b) { return Rat(mpq_class(a.q_ - b.q_)); }
  friend Rat operator*(const Rat& a, const Rat& b) { return Rat(mpq_class(a.q_ * b.q_)); }
  friend Rat operator/(const Rat& a, const Rat& b);

  Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
  Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
  Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }
  Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rat& a, const Rat& b) { return mpq_equal(a.q_.get_mpq_t(), b.q_.get_mpq_t()) != 0; }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) { return cmp(a.q_, b.q_) < 0; }
  friend bool operator<=(const Rat& a, const Rat& b) { return cmp(a.q_, b.q_) <= 0; }
  friend bool operator>(const Rat& a, const Rat& b) { return cmp(a.q_, b.q_) > 0; }
  friend bool operator>=(const Rat& a, const Rat& b) { return cmp(a.q_, b.q_) >= 0; }

  // Largest power-of-two grid value <= / >= this, at 2^-bits resolution.
  Rat floor_dyadic(unsigned bits) const;
  Rat ceil_dyadic(unsigned bits) const;
  mpz_class floor() const;

  // True if the value is n^2 for rational n; root receives |n|.
  bool is_perfect_square(Rat* root = nullptr) const;

  double to_double() const { return q_.get_d(); }

  // "p/q", or just "p" for integers.
  std::string str() const;
  // Fixed-point decimal with the given fraction digit count, round to nearest.
  std::string decimal(unsigned digits) const;

  std::size_t hash() const;

 private:
  mpq_class q_;
};

std::ostream& operator<<(std::ostream& os, const Rat& r);

inline Rat pow2(long e) {
  mpq_class q;
  if (e >= 0) {
    mpz_class n = 1; n <<= static_cast<unsigned long>(e); q = n;
  } else {
    mpz_class d = 1; d <<= static_cast<unsigned long>(-e); q = mpq_class(1) / d;
  }
  return Rat(q);
}

}  // namespace sclab

template <>
struct std::hash<sclab::Rat> {
  std::size_t operator()(const sclab::Rat& r) const { return r.hash(); }
};
