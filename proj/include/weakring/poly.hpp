// IntPolynomial: integer polynomials in canonical form (lowest-degree-first
// coefficients, no trailing zeros). Houses defining polynomials f, secrets,
// errors, and sample polynomials.
#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "weakring/numtypes.hpp"

namespace weakring::ring {

class IntPolynomial {
 public:
  IntPolynomial() = default;  // the zero polynomial
  explicit IntPolynomial(std::vector<BigInt> coeffs);
  IntPolynomial(std::initializer_list<long> coeffs);

  // x^n + extra terms given as (degree, coefficient) pairs.
  static IntPolynomial x_pow(unsigned n);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }

  // Coefficient of x^i; zero beyond the degree.
  const BigInt& operator[](std::size_t i) const;
  const std::vector<BigInt>& coeffs() const { return c_; }

  IntPolynomial operator+(const IntPolynomial& o) const;
  IntPolynomial operator-(const IntPolynomial& o) const;
  IntPolynomial operator*(const IntPolynomial& o) const;
  IntPolynomial operator-() const;
  bool operator==(const IntPolynomial& o) const { return c_ == o.c_; }

  IntPolynomial derivative() const;
  BigInt eval(const BigInt& x) const;

  // Division by a monic divisor; exact_divide asserts zero remainder.
  static void divmod(const IntPolynomial& a, const IntPolynomial& b,
                     IntPolynomial& q, IntPolynomial& r);
  static IntPolynomial exact_divide(const IntPolynomial& a, const IntPolynomial& b);

  // {"coeffs": ["...", ...], "var": "x"}, decimal strings, lowest degree first.
  std::string to_json() const;
  static IntPolynomial from_json(const std::string& json_text);

  std::string to_string() const;  // human-readable, highest degree first

 private:
  void trim();
  std::vector<BigInt> c_;
};

}  // namespace weakring::ring
