// Polynomial arithmetic over F_q. Fast path: q < 2^64 with 128-bit
// intermediate products. Generic path: arbitrary-precision coefficients.
#pragma once

#include <cstdint>
#include <vector>

#include "weakring/numtypes.hpp"
#include "weakring/poly.hpp"
#include "weakring/rng.hpp"

namespace weakring::ring {

inline std::uint64_t addmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  std::uint64_t s = a + b;
  if (s >= q || s < a) s -= q;
  return s;
}
inline std::uint64_t submod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return a >= b ? a - b : a + (q - b);
}
inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % q);
}
std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t q);
std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t q);  // q prime

// Coefficients lowest-first, always trimmed; the zero polynomial is {}.
using ZqPoly = std::vector<std::uint64_t>;

ZqPoly zq_reduce(const IntPolynomial& f, std::uint64_t q);
IntPolynomial zq_lift(const ZqPoly& a);
void zq_trim(ZqPoly& a);
int zq_degree(const ZqPoly& a);

ZqPoly zq_add(const ZqPoly& a, const ZqPoly& b, std::uint64_t q);
ZqPoly zq_sub(const ZqPoly& a, const ZqPoly& b, std::uint64_t q);
ZqPoly zq_mul(const ZqPoly& a, const ZqPoly& b, std::uint64_t q);
ZqPoly zq_mod(ZqPoly a, const ZqPoly& f, std::uint64_t q);
ZqPoly zq_mulmod(const ZqPoly& a, const ZqPoly& b, const ZqPoly& f, std::uint64_t q);
ZqPoly zq_monic(ZqPoly a, std::uint64_t q);
ZqPoly zq_gcd(ZqPoly a, ZqPoly b, std::uint64_t q);  // monic gcd
ZqPoly zq_derivative(const ZqPoly& a, std::uint64_t q);
std::uint64_t zq_eval(const ZqPoly& a, std::uint64_t x, std::uint64_t q);

// x^e mod (f, q); multiply-by-x steps cost O(deg f).
ZqPoly zq_pow_x(const BigInt& e, const ZqPoly& f, std::uint64_t q);
// a^e mod (f, q).
ZqPoly zq_powmod(ZqPoly a, BigInt e, const ZqPoly& f, std::uint64_t q);

// All roots in F_q of a product of distinct linear factors, by randomized
// equal-degree splitting (seeded for reproducibility). Input must divide
// x^q - x.
std::vector<std::uint64_t> zq_split_linear(const ZqPoly& g, std::uint64_t q, RngStream& rng);

// Generic arbitrary-precision variants (used when q >= 2^64).
using BqPoly = std::vector<BigInt>;

BqPoly bq_reduce(const IntPolynomial& f, const BigInt& q);
void bq_trim(BqPoly& a);
int bq_degree(const BqPoly& a);
BqPoly bq_sub(const BqPoly& a, const BqPoly& b, const BigInt& q);
BqPoly bq_mul(const BqPoly& a, const BqPoly& b, const BigInt& q);
BqPoly bq_mod(BqPoly a, const BqPoly& f, const BigInt& q);
BqPoly bq_monic(BqPoly a, const BigInt& q);
BqPoly bq_gcd(BqPoly a, BqPoly b, const BigInt& q);
BqPoly bq_pow_x(const BigInt& e, const BqPoly& f, const BigInt& q);
BigInt bq_eval(const BqPoly& a, const BigInt& x, const BigInt& q);
std::vector<BigInt> bq_split_linear(const BqPoly& g, const BigInt& q, RngStream& rng);

}  // namespace weakring::ring
