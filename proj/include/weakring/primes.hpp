// Primality testing and integer factoring with an explicit work budget.
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "weakring/numtypes.hpp"

namespace weakring::ring {

enum class PrimalityCertainty { deterministic, probabilistic };

// Deterministic Miller-Rabin witness set below 2^64; 64 seeded probabilistic
// rounds beyond.
bool is_prime(const BigInt& n);

struct Factorization {
  // (prime, exponent) pairs, primes ascending.
  std::vector<std::pair<BigInt, unsigned>> factors;
  // 1 when fully factored; otherwise the remaining composite part.
  BigInt cofactor{1};
  bool complete() const { return cofactor == 1; }
  BigInt product() const;
};

struct FactorBudget {
  std::uint64_t trial_division_bound = 1'000'000;
  std::uint64_t rho_iterations = 100'000'000;  // total Pollard rho steps
};

// Trial division then Pollard rho (Brent variant) within the budget. Always
// returns; an exhausted budget leaves a composite cofactor.
Factorization factorize(BigInt n, const FactorBudget& budget = {});

struct PrimeModulus {
  BigInt q;
  PrimalityCertainty certainty = PrimalityCertainty::deterministic;
  std::optional<Factorization> q_minus_1;

  static PrimeModulus make(BigInt q_in);
  bool fits_u64() const { return q <= BigInt((std::numeric_limits<std::uint64_t>::max)()); }
  std::uint64_t as_u64() const { return static_cast<std::uint64_t>(q); }
  // Factors q-1 on first use; returns false when the budget was exhausted
  // (a partial factorization is still stored).
  bool ensure_q_minus_1_factored(const FactorBudget& budget = {});
};

}  // namespace weakring::ring
