#include "sclab/rational.hpp"

#include <ostream>
#include <stdexcept>

namespace sclab {

Rat::Rat(long n, long d) {
  if (d == 0) throw std::invalid_argument("Rat: zero denominator");
  q_ = mpq_class(n, d);
  q_.canonicalize();
}

Rat::Rat(const mpz_class& n, const mpz_class& d) {
  if (d == 0) throw std::invalid_argument("Rat: zero denominator");
  q_ = mpq_class(n, d);
  q_.canonicalize();
}

Rat Rat::inverse() const {
  if (is_zero()) throw std::domain_error("Rat: inverse of zero");
  return Rat(mpq_class(1 / q_));
}

Rat operator/(const Rat& a, const Rat& b) {
  if (b.is_zero()) throw std::domain_error("Rat: division by zero");
  return Rat(mpq_class(a.q_ / b.q_));
}

std::optional<Rat> Rat::from_string(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  mpq_class q;
  if (q.set_str(buf, 10) != 0) return std::nullopt;
  if (q.get_den() == 0) return std::nullopt;
  q.canonicalize();
  return Rat(q);
}

mpz_class Rat::floor() const {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
  return f;
}

Rat Rat::floor_dyadic(unsigned bits) const {
  mpq_class scaled = q_;
  mpz_class num = scaled.get_num() << bits;
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), num.get_mpz_t(), scaled.get_den_mpz_t());
  mpz_class d = 1; d <<= bits;
  mpq_class out(f, d);
  out.canonicalize();
  return Rat(out);
}

Rat Rat::ceil_dyadic(unsigned bits) const {
  mpq_class scaled = q_;
  mpz_class num = scaled.get_num() << bits;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), num.get_mpz_t(), scaled.get_den_mpz_t());
  mpz_class d = 1; d <<= bits;
  mpq_class out(c, d);
  out.canonicalize();
  return Rat(out);
}

bool Rat::is_perfect_square(Rat* root) const {
  if (sign() < 0) return false;
  if (sign() == 0) { if (root) *root = Rat(); return true; }
  const mpz_class n = q_.get_num(), d = q_.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
  if (root) {
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    *root = Rat(rn, rd);
  }
  return true;
}

std::string Rat::str() const {
  if (is_integer()) return q_.get_num().get_str();
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

std::string Rat::decimal(unsigned digits) const {
  const bool neg = sign() < 0;
  mpq_class a = neg ? mpq_class(-q_) : q_;
  mpz_class scale = 1;
  for (unsigned i = 0; i < digits; ++i) scale *= 10;
  // round(a * scale) by adding den/2 before dividing
  mpz_class num = a.get_num() * scale * 2 + a.get_den();
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), mpz_class(a.get_den() * 2).get_mpz_t());
  mpz_class ip = q / scale, fp = q % scale;
  std::string out = neg && (ip != 0 || fp != 0) ? "-" : "";
  out += ip.get_str();
  if (digits > 0) {
    std::string f = fp.get_str();
    out += "." + std::string(digits - f.size(), '0') + f;
  }
  return out;
}

std::size_t Rat::hash() const {
  auto mix = [](std::size_t h, std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };
  auto hash_mpz = [&](const mpz_class& z) {
    std::size_t h = static_cast<std::size_t>(mpz_sgn(z.get_mpz_t()));
    const mp_size_t n = mpz_size(z.get_mpz_t());
    for (mp_size_t i = 0; i < n; ++i)
      h = mix(h, static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), i)));
    return h;
  };
  return mix(hash_mpz(q_.get_num()), hash_mpz(q_.get_den()));
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

}  // namespace sclab
