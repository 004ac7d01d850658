#pragma once

// Arithmetic in Z/p^N. Three representations share one interface so the
// elimination kernels can be written once as templates:
//
//   Pow2Ring<U>  p = 2, N <= bit width of U; reduction is a mask.
//   WordRing     p^N < 2^62; products go through 128-bit intermediates.
//   BigRing      anything else, on GMP integers.
//
// dispatch_ring(p, N, f) picks the cheapest one and calls f(ring).

#include <bit>
#include <cstdint>
#include <stdexcept>

#include <gmpxx.h>

namespace cokfluct::detail {

using u128 = unsigned __int128;
using i128 = __int128;

inline int ctz128(u128 x) {
  const auto lo = static_cast<std::uint64_t>(x);
  if (lo != 0) return std::countr_zero(lo);
  return 64 + std::countr_zero(static_cast<std::uint64_t>(x >> 64));
}

inline mpz_class u128_to_mpz(u128 x) {
  mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(x >> 64)));
  mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(x)));
  return (hi << 64) + lo;
}

inline u128 mpz_to_u128(const mpz_class& x) {
  mpz_class lo = x & mpz_class(static_cast<unsigned long>(~std::uint64_t{0}));
  mpz_class hi = x >> 64;
  return (static_cast<u128>(hi.get_ui()) << 64) | static_cast<u128>(lo.get_ui());
}

template <class U>
class Pow2Ring {
 public:
  using value_type = U;
  static constexpr int kBits = static_cast<int>(sizeof(U) * 8);

  explicit Pow2Ring(int precision)
      : precision_(precision), mask_(precision >= kBits ? ~U{0} : ((U{1} << precision) - 1)) {
    if (precision < 1 || precision > kBits) throw std::invalid_argument("Pow2Ring precision");
  }

  std::uint64_t prime() const { return 2; }
  int precision() const { return precision_; }

  U zero() const { return 0; }
  U one() const { return 1 & mask_; }
  U from_int(std::int64_t x) const { return static_cast<U>(x) & mask_; }
  U from_mpz(const mpz_class& x) const {
    mpz_class r = x;
    mpz_fdiv_r_2exp(r.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(precision_));
    if constexpr (sizeof(U) <= 8) {
      return static_cast<U>(mpz_to_u128(r));
    } else {
      return mpz_to_u128(r);
    }
  }
  mpz_class to_mpz(U a) const { return u128_to_mpz(static_cast<u128>(a)); }

  U add(U a, U b) const { return (a + b) & mask_; }
  U sub(U a, U b) const { return (a - b) & mask_; }
  U mul(U a, U b) const { return (a * b) & mask_; }
  /// a - f*b, the row-update primitive.
  U sub_mul(U a, U f, U b) const { return (a - f * b) & mask_; }

  bool is_zero(U a) const { return a == 0; }
  bool is_unit(U a) const { return (a & 1) != 0; }
  int valuation(U a) const {
    if (a == 0) return precision_;
    if constexpr (sizeof(U) <= 8) {
      return std::countr_zero(static_cast<std::uint64_t>(a));
    } else {
      return ctz128(a);
    }
  }
  /// a / p^v for a divisible by p^v as an integer representative.
  U shift_down(U a, int v) const { return a >> v; }
  U inverse_unit(U a) const {
    U x = a;  // correct to 3 bits for odd a
    for (int bits = 3; bits < kBits; bits *= 2) x = x * (U{2} - a * x);
    return x & mask_;
  }

 private:
  int precision_;
  U mask_;
};

class WordRing {
 public:
  using value_type = std::uint64_t;

  /// Returns true when p^precision < 2^62.
  static bool fits(std::uint64_t p, int precision) {
    u128 q = 1;
    for (int i = 0; i < precision; ++i) {
      q *= p;
      if (q >= (u128{1} << 62)) return false;
    }
    return true;
  }

  WordRing(std::uint64_t p, int precision) : p_(p), precision_(precision), q_(1) {
    if (!fits(p, precision) || precision < 1) throw std::invalid_argument("WordRing modulus");
    for (int i = 0; i < precision; ++i) q_ *= p;
  }

  std::uint64_t prime() const { return p_; }
  int precision() const { return precision_; }
  std::uint64_t modulus() const { return q_; }

  value_type zero() const { return 0; }
  value_type one() const { return q_ == 1 ? 0 : 1; }
  value_type from_int(std::int64_t x) const {
    const std::int64_t q = static_cast<std::int64_t>(q_);
    std::int64_t r = x % q;
    return static_cast<value_type>(r < 0 ? r + q : r);
  }
  value_type from_mpz(const mpz_class& x) const {
    mpz_class r;
    mpz_fdiv_r_ui(r.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(q_));
    return r.get_ui();
  }
  mpz_class to_mpz(value_type a) const { return mpz_class(static_cast<unsigned long>(a)); }

  value_type add(value_type a, value_type b) const {
    const value_type s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  value_type sub(value_type a, value_type b) const { return a >= b ? a - b : a + q_ - b; }
  value_type mul(value_type a, value_type b) const {
    return static_cast<value_type>((static_cast<u128>(a) * b) % q_);
  }
  value_type sub_mul(value_type a, value_type f, value_type b) const { return sub(a, mul(f, b)); }

  bool is_zero(value_type a) const { return a == 0; }
  bool is_unit(value_type a) const { return a % p_ != 0; }
  int valuation(value_type a) const {
    if (a == 0) return precision_;
    int v = 0;
    while (a % p_ == 0) {
      a /= p_;
      ++v;
    }
    return v;
  }
  value_type shift_down(value_type a, int v) const {
    for (int i = 0; i < v; ++i) a /= p_;
    return a;
  }
  value_type inverse_unit(value_type a) const {
    i128 r0 = q_, r1 = a, s0 = 0, s1 = 1;
    while (r1 != 0) {
      const i128 quo = r0 / r1;
      i128 t = r0 - quo * r1;
      r0 = r1;
      r1 = t;
      t = s0 - quo * s1;
      s0 = s1;
      s1 = t;
    }
    if (r0 != 1) throw std::domain_error("inverse of a non-unit");
    const i128 q = static_cast<i128>(q_);
    i128 x = s0 % q;
    if (x < 0) x += q;
    return static_cast<value_type>(x);
  }

 private:
  std::uint64_t p_;
  int precision_;
  std::uint64_t q_;
};

class BigRing {
 public:
  using value_type = mpz_class;

  BigRing(std::uint64_t p, int precision) : p_(static_cast<unsigned long>(p)), precision_(precision) {
    if (precision < 1) throw std::invalid_argument("BigRing precision");
    mpz_ui_pow_ui(q_.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(precision));
  }

  std::uint64_t prime() const { return p_.get_ui(); }
  int precision() const { return precision_; }

  value_type zero() const { return 0; }
  value_type one() const { return 1; }
  value_type from_int(std::int64_t x) const { return from_mpz(mpz_class(static_cast<long>(x))); }
  value_type from_mpz(const mpz_class& x) const {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), q_.get_mpz_t());
    return r;
  }
  mpz_class to_mpz(const value_type& a) const { return a; }

  value_type add(const value_type& a, const value_type& b) const { return from_mpz(a + b); }
  value_type sub(const value_type& a, const value_type& b) const { return from_mpz(a - b); }
  value_type mul(const value_type& a, const value_type& b) const { return from_mpz(a * b); }
  value_type sub_mul(const value_type& a, const value_type& f, const value_type& b) const {
    return from_mpz(a - f * b);
  }

  bool is_zero(const value_type& a) const { return a == 0; }
  bool is_unit(const value_type& a) const { return !mpz_divisible_p(a.get_mpz_t(), p_.get_mpz_t()); }
  int valuation(const value_type& a) const {
    if (a == 0) return precision_;
    mpz_class rest;
    return static_cast<int>(mpz_remove(rest.get_mpz_t(), a.get_mpz_t(), p_.get_mpz_t()));
  }
  value_type shift_down(const value_type& a, int v) const {
    mpz_class pv;
    mpz_pow_ui(pv.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(v));
    mpz_class out;
    mpz_divexact(out.get_mpz_t(), a.get_mpz_t(), pv.get_mpz_t());
    return out;
  }
  value_type inverse_unit(const value_type& a) const {
    mpz_class out;
    if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), q_.get_mpz_t()) == 0)
      throw std::domain_error("inverse of a non-unit");
    return out;
  }

 private:
  mpz_class p_;
  mpz_class q_;
  int precision_;
};

template <class F>
decltype(auto) dispatch_ring(std::uint64_t p, int precision, F&& f) {
  if (p == 2 && precision <= 64) return f(Pow2Ring<std::uint64_t>(precision));
  if (p == 2 && precision <= 128) return f(Pow2Ring<u128>(precision));
  if (WordRing::fits(p, precision)) return f(WordRing(p, precision));
  return f(BigRing(p, precision));
}

}  // namespace cokfluct::detail
