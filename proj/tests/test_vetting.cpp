#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "weakring/errors.hpp"
#include "weakring/modpoly.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/ringcore.hpp"
#include "weakring/vetting.hpp"

using namespace weakring;
using namespace weakring::vetting;
using ring::IntPolynomial;
using ring::PrimeModulus;

namespace {

IntPolynomial xn_plus(unsigned n, const BigInt& c0, const BigInt& c1 = BigInt(0)) {
  std::vector<BigInt> v(n + 1, BigInt(0));
  v[0] = c0;
  v[1] = c1;
  v[n] = BigInt(1);
  return IntPolynomial(v);
}

BigInt largest_prime_factor(const BigInt& n) {
  ring::Factorization fac = ring::factorize(n);
  BigInt best = 0;
  for (const auto& [p, e] : fac.factors)
    if (p > best) best = p;
  return best;
}

bool shares_root_mod(const IntPolynomial& f, const IntPolynomial& g, const PrimeModulus& q) {
  std::uint64_t qu = q.as_u64();
  ring::ZqPoly d = ring::zq_gcd(ring::zq_reduce(f, qu), ring::zq_reduce(g, qu), qu);
  return d.size() > 1;
}

}  // namespace

TEST_CASE("findq returns the largest prime of the shared-root resultant") {
  IntPolynomial f({2, 0, 1});
  FindqResult r1 = findq(f, 1);
  CHECK(r1.q.q == 3);  // f(1) = 3
  CHECK(!r1.lower_bound_only);
  CHECK(shares_root_mod(f, ring::cyclotomic_poly(1), r1.q));

  FindqResult r2 = findq(f, 2);
  CHECK(r2.q.q == 3);  // f(-1) = 3

  // x^16 + 4x - 4 against Phi_3: x^16 = x mod Phi_3, so the resultant is
  // (1+a)^2 + b(1+a) + b^2 = 61.
  IntPolynomial tri = xn_plus(16, BigInt(-4), BigInt(4));
  CHECK(oracles::resultant(tri, ring::cyclotomic_poly(3)) == 61);
  FindqResult r3 = findq(tri, 3);
  CHECK(r3.q.q == 61);
  CHECK(shares_root_mod(tri, ring::cyclotomic_poly(3), r3.q));

  // Same shape at degree 40: resultant = (1+a)^2 + b(1+a) + b^2 for
  // f = x^40 + ax - b with 40 = 1 mod 3.
  IntPolynomial tri40 = xn_plus(40, BigInt(-256), BigInt(258));
  BigInt res = oracles::resultant(tri40, ring::cyclotomic_poly(3));
  CHECK(res == BigInt(259) * 259 + BigInt(256) * 259 + BigInt(256) * 256);
  FindqResult r4 = findq(tri40, 3);
  CHECK(r4.q.q == largest_prime_factor(res));
  CHECK(shares_root_mod(tri40, ring::cyclotomic_poly(3), r4.q));

  CHECK_THROWS_AS(findq(ring::cyclotomic_poly(4), 4), Error);
  try {
    findq(IntPolynomial({1, 2, 1}), 2);  // (x+1)^2 shares Phi_2
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::NotCoprime);
  }
}

TEST_CASE("construct_with_root builds f with a verified order-m root") {
  PrimeModulus q17 = PrimeModulus::make(BigInt(17));
  IntPolynomial f = construct_with_root(8, 6, q17);
  CHECK(f == IntPolynomial({17, 0, 1, 0, 0, 0, 1}));  // (x^4+1) x^2 + 17

  PrimeModulus qm = q17;
  std::vector<ring::RootInfo> roots = ring::find_roots_mod(f, qm);
  bool has_order_8 = false;
  for (const auto& r : roots) has_order_8 = has_order_8 || r.order == 8;
  CHECK(has_order_8);

  IntPolynomial g({1, 0, 1});  // x^2 + 1
  IntPolynomial f2 = construct_with_root(8, 6, q17, g);
  CHECK(f2.degree() == 6);
  CHECK(f2.is_monic());
  qm = q17;
  roots = ring::find_roots_mod(f2, qm);
  has_order_8 = false;
  for (const auto& r : roots) has_order_8 = has_order_8 || r.order == 8;
  CHECK(has_order_8);

  try {
    construct_with_root(8, 3, q17);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::DegreeMismatch);
  }
  CHECK_THROWS_AS(construct_with_root(8, 6, q17, IntPolynomial({0, 0, 2})), Error);
  try {
    construct_with_root(8, 6, PrimeModulus::make(BigInt(7)));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::DoesNotSplit);
  }
}

TEST_CASE("search_trinomials agrees with direct evaluation") {
  std::vector<TrinomialHit> hits = search_trinomials(
      4, 1, {BigInt(1), BigInt(3)}, {BigInt(1), BigInt(3)}, BigInt(0));
  std::vector<std::pair<BigInt, BigInt>> expected;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      if (BigInt(1 + a + b) > 1) expected.push_back({BigInt(a), BigInt(b)});
  REQUIRE(hits.size() == expected.size());

  for (std::size_t i = 0; i < hits.size(); ++i) {
    CHECK(hits[i].a == expected[i].first);
    CHECK(hits[i].b == expected[i].second);
    IntPolynomial f = xn_plus(4, hits[i].b, hits[i].a);
    CHECK(hits[i].f == f);
    CHECK(hits[i].q.q == largest_prime_factor(f.eval(BigInt(1))));
    CHECK(ring::poly_eval_mod(f, BigInt(1) % hits[i].q.q, hits[i].q) == 0);
    CHECK(hits[i].irreducible == ring::is_probably_irreducible(f));
  }

  // q_min filters: only 1 + a + b with a large prime factor survive.
  std::vector<TrinomialHit> big = search_trinomials(
      4, 1, {BigInt(1), BigInt(3)}, {BigInt(1), BigInt(3)}, BigInt(7));
  for (const TrinomialHit& h : big) CHECK(h.q.q >= 7);
  std::size_t expect_big = 0;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      if (largest_prime_factor(BigInt(1 + a + b)) >= 7) ++expect_big;
  CHECK(big.size() == expect_big);

  // alpha_target = -1 evaluates at -1.
  std::vector<TrinomialHit> neg = search_trinomials(
      5, -1, {BigInt(1), BigInt(4)}, {BigInt(1), BigInt(4)}, BigInt(2));
  for (const TrinomialHit& h : neg) {
    BigInt v = h.f.eval(BigInt(-1));
    CHECK(h.q.q == largest_prime_factor(BigInt(mp::abs(v))));
    CHECK(ring::poly_eval_mod(h.f, BigInt(h.q.q - 1), h.q) == 0);
  }

  CHECK_THROWS_AS(search_trinomials(4, 2, {BigInt(1), BigInt(2)}, {BigInt(1), BigInt(2)},
                                    BigInt(0)),
                  std::invalid_argument);
}

TEST_CASE("check_family_conditions on the reduced-modulus family prime") {
  PrimeModulus q = PrimeModulus::make(BigInt(4194319));
  FamilyConditionReport rep = check_family_conditions(1024, q, 3.192);
  CHECK(rep.n_prime_power == TriState::holds);
  CHECK(rep.p == 2);
  CHECK(rep.q_minus_1_squarefree == TriState::holds);  // 2 * 3 * 699053
  CHECK(rep.p_square_condition == TriState::holds);
  CHECK(rep.tau_greater_1 == TriState::fails);  // tau ~ 0.223 at q ~ 2^22
  CHECK(rep.monogenic == TriState::holds);
  CHECK(rep.tau_value.convert_to<double>() > 0.2);
  CHECK(rep.tau_value.convert_to<double>() < 0.25);

  nlohmann::json j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("monogenic") == "holds");
  CHECK(j.at("q") == "4194319");

  // q - 1 = 2^8: squarefreeness fails.
  FamilyConditionReport sq = check_family_conditions(4, PrimeModulus::make(BigInt(257)), 7.52);
  CHECK(sq.q_minus_1_squarefree == TriState::fails);
  CHECK(sq.monogenic == TriState::fails);

  // 2^31 - 1: tau > 1 but q - 1 is divisible by 9.
  FamilyConditionReport bcns =
      check_family_conditions(1024, PrimeModulus::make(BigInt(2147483647)), 3.192);
  CHECK(bcns.tau_greater_1 == TriState::holds);
  CHECK(bcns.tau_value.convert_to<double>() == doctest::Approx(5.0654).epsilon(1e-4));
  CHECK(bcns.q_minus_1_squarefree == TriState::fails);
  CHECK(bcns.monogenic == TriState::fails);

  FamilyConditionReport np = check_family_conditions(12, q, 3.0);
  CHECK(np.n_prime_power == TriState::fails);
  CHECK(np.p == 0);
  CHECK(np.monogenic == TriState::fails);

  // An exhausted factoring budget leaves squarefreeness (and the aggregate)
  // unknown rather than guessed.
  ring::FactorBudget tiny;
  tiny.trial_division_bound = 2;
  tiny.rho_iterations = 0;
  FamilyConditionReport unk = check_family_conditions(1024, q, 3.192, tiny);
  CHECK(unk.q_minus_1_squarefree == TriState::unknown);
  CHECK(unk.monogenic == TriState::unknown);
}

TEST_CASE("cyclotomic_immunity_check reports exact orders") {
  CycloImmunityReport rep = cyclotomic_immunity_check(8, PrimeModulus::make(BigInt(17)));
  CHECK(rep.roots.size() == 4);  // phi(8)
  CHECK(rep.min_order == 8);
  CHECK(rep.all_have_order_m);
  for (const BigInt& r : rep.roots) {
    CHECK(mp::powm(r, 8, BigInt(17)) == 1);
    CHECK(mp::powm(r, 4, BigInt(17)) != 1);
  }

  CycloImmunityReport r16 = cyclotomic_immunity_check(16, PrimeModulus::make(BigInt(97)));
  CHECK(r16.roots.size() == 8);
  CHECK(r16.min_order == 16);
  CHECK(r16.all_have_order_m);

  nlohmann::json j = nlohmann::json::parse(r16.to_json());
  CHECK(j.at("m") == 16);
  CHECK(j.at("all_have_order_m") == true);

  try {
    cyclotomic_immunity_check(8, PrimeModulus::make(BigInt(7)));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::DoesNotSplit);
  }
}

TEST_CASE("vet_parameters issues the documented verdicts") {
  IntPolynomial f = xn_plus(4, BigInt(256));
  PrimeModulus q = PrimeModulus::make(BigInt(257));

  VulnerabilityReport poly = vet_parameters(f, q, 7.5199, VetVariant::polylwe);
  CHECK(poly.verdict == VetVerdict::vulnerable_polylwe);
  CHECK(poly.conditions.at("R") == TriState::holds);
  CHECK(poly.conditions.at("R_prime") == TriState::holds);
  CHECK(poly.conditions.at("Q") == TriState::holds);
  CHECK(poly.conditions.at("M") == TriState::fails);  // 256 = 2^8 not squarefree
  CHECK(poly.conditions.at("S") == TriState::holds);
  CHECK(!poly.roots_of_small_order.empty());
  REQUIRE(poly.tau.has_value());
  REQUIRE(poly.rho_prime_estimate.has_value());
  CHECK(!poly.rho_prime_is_heuristic);

  // Theorem 1 bound: rho' ~ 8.0 < q/(4wn) = 16.06 at w = 1.
  VulnerabilityReport ring_ok = vet_parameters(f, q, 1.0, VetVariant::ringlwe);
  CHECK(ring_ok.verdict == VetVerdict::vulnerable_ringlwe);

  // At w = 3 the bound fails (q/(4wn) = 5.35 < 8) but the Poly-LWE
  // propositions still apply.
  VulnerabilityReport ring_no = vet_parameters(f, q, 3.0, VetVariant::ringlwe);
  CHECK(ring_no.verdict == VetVerdict::vulnerable_polylwe);

  // Cyclotomic ring: no root at 1, small-order roots fail the propositions.
  VulnerabilityReport cyclo =
      vet_parameters(ring::cyclotomic_poly(8), q, 8.0, VetVariant::polylwe);
  CHECK(cyclo.verdict == VetVerdict::not_vulnerable_by_these_tests);
  CHECK(cyclo.conditions.at("R") == TriState::fails);
  CHECK(cyclo.conditions.at("R_prime") == TriState::holds);  // order 8 <= 16
  CHECK(cyclo.conditions.at("S") == TriState::holds);

  // Above the spectral cap, trinomials get the sqrt(max|a|,|b|) heuristic.
  VetOptions opts;
  opts.spectral_degree_cap = 8;
  VulnerabilityReport heur =
      vet_parameters(xn_plus(16, BigInt(5), BigInt(3)), PrimeModulus::make(BigInt(17)), 2.0,
                     VetVariant::ringlwe, opts);
  REQUIRE(heur.rho_prime_estimate.has_value());
  CHECK(heur.rho_prime_is_heuristic);
  CHECK(heur.rho_prime_estimate->convert_to<double>() == doctest::Approx(std::sqrt(5.0)));
  CHECK(heur.spectral_note.find("heuristic") != std::string::npos);
  CHECK(heur.verdict != VetVerdict::vulnerable_ringlwe);

  nlohmann::json j = nlohmann::json::parse(poly.to_json());
  CHECK(j.at("verdict") == "vulnerable_polylwe");
  CHECK(j.at("conditions").at("R") == "holds");
}

TEST_CASE("tristate and verdict names are stable") {
  CHECK(std::string(tristate_name(TriState::holds)) == "holds");
  CHECK(std::string(tristate_name(TriState::fails)) == "fails");
  CHECK(std::string(tristate_name(TriState::unknown)) == "unknown");
  CHECK(std::string(vet_verdict_name(VetVerdict::vulnerable_polylwe)) == "vulnerable_polylwe");
  CHECK(std::string(vet_verdict_name(VetVerdict::vulnerable_ringlwe)) == "vulnerable_ringlwe");
  CHECK(std::string(vet_verdict_name(VetVerdict::not_vulnerable_by_these_tests)) ==
        "not_vulnerable_by_these_tests");
}
