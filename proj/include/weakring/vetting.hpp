#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weakring/numtypes.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/ringcore.hpp"

namespace weakring::vetting {

enum class TriState { holds, fails, unknown };
const char* tristate_name(TriState t);

struct FindqResult {
  ring::PrimeModulus q;
  // Set when factoring the denominator lcm ran out of budget: q is then the
  // largest prime factor found so far, not necessarily the largest overall.
  bool lower_bound_only = false;
};

// Extended Euclid of f and Phi_m over Q; returns the largest prime factor of
// the lcm of the Bezout coefficient denominators, verified to give f and
// Phi_m a common root mod q.
FindqResult findq(const ring::IntPolynomial& f, unsigned m,
                  const ring::FactorBudget& budget = {});

// f = Phi_m * g + q for monic g of degree n - phi(m) (default x^(n-phi(m))),
// verified to have a root of order exactly m modulo q.
ring::IntPolynomial construct_with_root(unsigned m, unsigned n, const ring::PrimeModulus& q,
                                        const std::optional<ring::IntPolynomial>& g = std::nullopt);

struct TrinomialHit {
  BigInt a, b;
  ring::IntPolynomial f;  // x^n + a x + b
  ring::PrimeModulus q;   // largest prime factor of f(alpha_target)
  ring::IrredVerdict irreducible = ring::IrredVerdict::unknown;
};

// Scans a ascending then b ascending; keeps (a, b) whose f(alpha_target) has
// largest prime factor >= q_min. Entries whose factoring exceeds the budget
// are skipped.
std::vector<TrinomialHit> search_trinomials(unsigned n, int alpha_target,
                                            std::pair<BigInt, BigInt> a_range,
                                            std::pair<BigInt, BigInt> b_range, const BigInt& q_min,
                                            const ring::FactorBudget& budget = {});

struct FamilyConditionReport {
  unsigned n = 0;
  BigInt q;
  double w = 0.0;
  TriState n_prime_power = TriState::fails;
  BigInt p;  // the prime with n = p^k; 0 when condition 1 fails
  TriState q_minus_1_squarefree = TriState::unknown;
  TriState p_square_condition = TriState::unknown;  // p^2 does not divide (1-q)^n - (1-q)
  Real tau_value;
  TriState tau_greater_1 = TriState::fails;
  TriState monogenic = TriState::unknown;  // implied by conditions 1-3
  std::string to_json() const;
};

FamilyConditionReport check_family_conditions(unsigned n, const ring::PrimeModulus& q, double w,
                                              const ring::FactorBudget& budget = {});

struct CycloImmunityReport {
  unsigned m = 0;
  ring::PrimeModulus q;
  std::vector<BigInt> roots;
  BigInt min_order;
  bool all_have_order_m = false;
  std::string to_json() const;
};

// Requires q = 1 (mod m); finds all roots of Phi_m mod q and their exact
// orders (divisor descent on m).
CycloImmunityReport cyclotomic_immunity_check(unsigned m, const ring::PrimeModulus& q);

enum class VetVariant { polylwe, ringlwe };
enum class VetVerdict { vulnerable_polylwe, vulnerable_ringlwe, not_vulnerable_by_these_tests };
const char* vet_verdict_name(VetVerdict v);

struct VetOptions {
  BigInt small_order_bound = 16;
  int spectral_degree_cap = 256;
  unsigned precision_bits = 300;
  std::uint64_t attack_max_q = std::uint64_t(1) << 40;
  ring::FactorBudget factor_budget{};
};

struct VulnerabilityReport {
  ring::IntPolynomial f;
  ring::PrimeModulus q;
  double w = 0.0;
  std::vector<ring::RootInfo> roots_of_small_order;
  std::optional<Real> tau;
  std::optional<Real> rho_prime_estimate;
  bool rho_prime_is_heuristic = false;
  std::string spectral_note;
  // Keys: R (f(1) = 0 mod q), R_prime (small-order root), Q (q within attack
  // budget), M (monogenicity hypotheses), S (splits completely).
  std::map<std::string, TriState> conditions;
  VetVerdict verdict = VetVerdict::not_vulnerable_by_these_tests;
  std::string to_json() const;
};

VulnerabilityReport vet_parameters(const ring::IntPolynomial& f, const ring::PrimeModulus& q,
                                   double w, VetVariant variant, const VetOptions& opts = {});

}  // namespace weakring::vetting
