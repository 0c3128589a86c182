// Ring-core operations: evaluation and root finding mod q, multiplicative
// orders, cyclotomic polynomials, splitting and irreducibility verdicts,
// discriminants.
#pragma once

#include <vector>

#include "weakring/modpoly.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"

namespace weakring::ring {

struct RootInfo {
  BigInt root;           // residue in [0, q)
  BigInt order = 0;      // multiplicative order; 0 = unknown or non-unit
  bool is_one = false;
  bool is_minus_one = false;
  bool is_unit = true;   // false only for the root 0 (which has no order)
  bool order_known() const { return order > 0; }
};

// f(alpha) mod q in [0, q), Horner with per-step reduction.
BigInt poly_eval_mod(const IntPolynomial& f, const BigInt& alpha, const PrimeModulus& q);

struct RootFindOptions {
  FactorBudget factor_budget{};
  std::uint64_t eds_seed = 0xED5EED;  // equal-degree splitting RNG seed
  // Degrees at most this use brute-force scanning when q is tiny.
  std::uint64_t brute_force_q_bound = 4096;
};

// All distinct roots of f in F_q with multiplicative orders, ascending by
// root value. Candidates 1, q-1, 2 are tested first as a fast path; the rest
// come from gcd(x^q - x, f) and seeded equal-degree splitting. When q-1 does
// not factor within budget, orders are reported unknown (order = 0) and the
// roots are still returned.
std::vector<RootInfo> find_roots_mod(const IntPolynomial& f, PrimeModulus& q,
                                     const RootFindOptions& opts = {});

// Exact order of alpha mod q via divisor descent on the factorization of
// q-1. Throws FactorizationUnavailable when factoring exceeded its budget.
BigInt multiplicative_order(const BigInt& alpha, PrimeModulus& q, const FactorBudget& budget = {});

// Phi_m by recursive exact division of x^m - 1; results are cached.
const IntPolynomial& cyclotomic_poly(unsigned m);

enum class SplitVerdict { splits, does_not_split, splits_by_easysplit };
const char* split_verdict_name(SplitVerdict v);

// Fast path: f = x^(2^j) + 1 with f(2) = 0 mod q. General path: f splits
// completely (into distinct linear factors) iff x^q = x mod (f, q) and
// gcd(f, f') is constant mod q.
SplitVerdict splits_completely(const IntPolynomial& f, const PrimeModulus& q);

enum class IrredVerdict { irreducible_certified, eisenstein_certified, unknown };
const char* irred_verdict_name(IrredVerdict v);

// Certified-or-unknown, never claims reducibility. Eisenstein primes are
// searched among small prime factors of the constant term; mod-p Rabin
// certification tries up to 8 small primes, for degrees up to 128.
IrredVerdict is_probably_irreducible(const IntPolynomial& f);

enum class DiscMode { exact_family, numeric };

// exact_family requires f = x^n + c and is the integer n^n * |c|^(n-1);
// numeric is prod |root_i - root_j|^2 from complex roots and throws
// PrecisionInsufficient when the propagated error exceeds 2^-32 relative.
Real discriminant_abs(const IntPolynomial& f, DiscMode mode, unsigned precision_bits = 300);
BigInt discriminant_abs_exact_family(const IntPolynomial& f);

}  // namespace weakring::ring
