// Arbitrary-precision number types: integers, rationals, dynamic-precision
// reals (MPFR-backed), and a minimal complex type over those reals.
#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>

namespace weakring {

namespace mp = boost::multiprecision;

using BigInt = mp::mpz_int;
using Rat = mp::mpq_rational;
// Expression templates are disabled so Real composes with Eigen and with
// generic code expecting a plain scalar.
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

// boost tracks default precision in decimal digits; request enough digits to
// guarantee at least `bits` bits of mantissa.
inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(bits * 0.3010299956639812) + 3;
}

// RAII guard: sets the thread's default Real precision (in bits), restores on
// scope exit. All Real temporaries created in scope carry >= `bits` bits.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits)
      : saved_(Real::default_precision()) {
    Real::default_precision(bits_to_digits10(bits));
  }
  ~PrecisionGuard() { Real::default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

// std::complex<Real> is unspecified behavior for a non-builtin scalar, so we
// carry our own small complex type.
struct CNum {
  Real re, im;
  CNum() : re(0), im(0) {}
  CNum(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit CNum(const Real& r) : re(r), im(0) {}

  CNum operator+(const CNum& o) const { return {re + o.re, im + o.im}; }
  CNum operator-(const CNum& o) const { return {re - o.re, im - o.im}; }
  CNum operator*(const CNum& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  CNum& operator+=(const CNum& o) { re += o.re; im += o.im; return *this; }
  CNum& operator-=(const CNum& o) { re -= o.re; im -= o.im; return *this; }
  CNum& operator*=(const CNum& o) { *this = *this * o; return *this; }
  CNum operator/(const CNum& o) const {
    Real d = o.re * o.re + o.im * o.im;
    return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
  }
  CNum conj() const { return {re, -im}; }
};

inline Real abs(const CNum& z) {
  using mp::sqrt;
  return sqrt(z.re * z.re + z.im * z.im);
}

inline Real pow_real(const Real& base, const Real& exp) {
  return mp::pow(base, exp);
}

// Pi at the current default precision.
inline Real pi_real() {
  Real p;
  mpfr_const_pi(p.backend().data(), MPFR_RNDN);
  return p;
}

}  // namespace weakring
