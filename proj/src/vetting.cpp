#include "weakring/vetting.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "weakring/embedding.hpp"
#include "weakring/errors.hpp"
#include "weakring/modpoly.hpp"
#include "weakring/util.hpp"

namespace weakring::vetting {

using json = nlohmann::json;
using ring::FactorBudget;
using ring::IntPolynomial;
using ring::PrimeModulus;
using ring::RootInfo;

const char* tristate_name(TriState t) {
  switch (t) {
    case TriState::holds: return "holds";
    case TriState::fails: return "fails";
    default: return "unknown";
  }
}

const char* vet_verdict_name(VetVerdict v) {
  switch (v) {
    case VetVerdict::vulnerable_polylwe: return "vulnerable_polylwe";
    case VetVerdict::vulnerable_ringlwe: return "vulnerable_ringlwe";
    default: return "not_vulnerable_by_these_tests";
  }
}

// ---- exact rational polynomial arithmetic for the extended Euclid ----

namespace {

using RatPoly = std::vector<Rat>;

void rp_trim(RatPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

RatPoly rp_from(const IntPolynomial& f) {
  RatPoly a(f.coeffs().begin(), f.coeffs().end());
  rp_trim(a);
  return a;
}

int rp_deg(const RatPoly& a) { return static_cast<int>(a.size()) - 1; }

RatPoly rp_sub(const RatPoly& a, const RatPoly& b) {
  RatPoly r(std::max(a.size(), b.size()), Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  rp_trim(r);
  return r;
}

RatPoly rp_mul(const RatPoly& a, const RatPoly& b) {
  if (a.empty() || b.empty()) return {};
  RatPoly r(a.size() + b.size() - 1, Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  rp_trim(r);
  return r;
}

void rp_divmod(const RatPoly& a, const RatPoly& b, RatPoly& quo, RatPoly& rem) {
  rem = a;
  quo.assign(rem.size() > b.size() ? rem.size() - b.size() + 1 : 1, Rat(0));
  const Rat& lead = b.back();
  while (rp_deg(rem) >= rp_deg(b)) {
    std::size_t shift = rem.size() - b.size();
    Rat c = rem.back() / lead;
    quo[shift] = c;
    for (std::size_t i = 0; i < b.size(); ++i) rem[shift + i] -= c * b[i];
    rp_trim(rem);
    if (rem.empty()) break;
  }
  rp_trim(quo);
}

BigInt denominator_lcm(const RatPoly& a, BigInt acc) {
  for (const Rat& c : a) acc = mp::lcm(acc, BigInt(mp::denominator(c)));
  return acc;
}

bool share_root_mod(const IntPolynomial& f, const IntPolynomial& g, const PrimeModulus& q) {
  if (q.fits_u64()) {
    std::uint64_t qu = q.as_u64();
    return ring::zq_degree(ring::zq_gcd(ring::zq_reduce(f, qu), ring::zq_reduce(g, qu), qu)) >= 1;
  }
  return ring::bq_degree(ring::bq_gcd(ring::bq_reduce(f, q.q), ring::bq_reduce(g, q.q), q.q)) >= 1;
}

}  // namespace

FindqResult findq(const IntPolynomial& f, unsigned m, const FactorBudget& budget) {
  const IntPolynomial& phi = ring::cyclotomic_poly(m);
  if (f == phi) throw Error(Err::NotCoprime, "f equals Phi_m");

  RatPoly r0 = rp_from(f), r1 = rp_from(phi);
  RatPoly s0{Rat(1)}, s1{}, t0{}, t1{Rat(1)};
  while (!r1.empty()) {
    RatPoly quo, rem;
    rp_divmod(r0, r1, quo, rem);
    RatPoly s2 = rp_sub(s0, rp_mul(quo, s1));
    RatPoly t2 = rp_sub(t0, rp_mul(quo, t1));
    r0 = std::move(r1);
    r1 = std::move(rem);
    s0 = std::move(s1);
    s1 = std::move(s2);
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  if (rp_deg(r0) != 0)
    throw Error(Err::NotCoprime, "f and Phi_m share a factor over the rationals");

  const Rat g = r0[0];
  for (Rat& c : s0) c /= g;
  for (Rat& c : t0) c /= g;

  BigInt d = denominator_lcm(t0, denominator_lcm(s0, BigInt(1)));
  if (d == 1)
    throw Error(Err::NotCoprime,
                "Bezout coefficients are integral (resultant is a unit); no prime q exists");

  ring::Factorization fac = ring::factorize(d, budget);
  if (fac.factors.empty())
    throw Error(Err::FactoringBudgetExceeded,
                "no prime factor of the denominator lcm found within budget");

  FindqResult res;
  res.q = PrimeModulus::make(BigInt(fac.factors.back().first));
  res.lower_bound_only = !fac.complete();
  if (!share_root_mod(f, phi, res.q))
    throw std::logic_error("findq postcondition violated: no shared root mod q");
  return res;
}

namespace {

// Exact order of alpha mod q given that it divides m (divisor ascent).
BigInt order_dividing_m(const BigInt& alpha, unsigned m, const PrimeModulus& q) {
  for (unsigned d = 1; d <= m; ++d) {
    if (m % d != 0) continue;
    if (mp::powm(alpha, BigInt(d), q.q) == 1) return BigInt(d);
  }
  return BigInt(0);
}

}  // namespace

IntPolynomial construct_with_root(unsigned m, unsigned n, const PrimeModulus& q,
                                  const std::optional<IntPolynomial>& g) {
  const IntPolynomial& phi = ring::cyclotomic_poly(m);
  unsigned phim = static_cast<unsigned>(phi.degree());
  if (n < phim)
    throw Error(Err::DegreeMismatch, "n must be at least phi(m) = " + std::to_string(phim));
  IntPolynomial gg = g ? *g : IntPolynomial::x_pow(n - phim);
  if (!gg.is_monic() || gg.degree() != static_cast<int>(n - phim))
    throw Error(Err::DegreeMismatch, "g must be monic of degree n - phi(m)");

  IntPolynomial f = phi * gg + IntPolynomial(std::vector<BigInt>{q.q});

  IntPolynomial h;
  if (q.fits_u64()) {
    std::uint64_t qu = q.as_u64();
    h = ring::zq_lift(ring::zq_gcd(ring::zq_reduce(f, qu), ring::zq_reduce(phi, qu), qu));
  } else {
    ring::BqPoly hb = ring::bq_gcd(ring::bq_reduce(f, q.q), ring::bq_reduce(phi, q.q), q.q);
    h = IntPolynomial(hb);
  }
  PrimeModulus qc = q;
  std::vector<RootInfo> roots = ring::find_roots_mod(h, qc);
  for (const RootInfo& r : roots)
    if (order_dividing_m(r.root, m, q) == m) return f;
  throw Error(Err::DoesNotSplit,
              "f has no root of order " + std::to_string(m) + " mod q (need q = 1 mod m)");
}

std::vector<TrinomialHit> search_trinomials(unsigned n, int alpha_target,
                                            std::pair<BigInt, BigInt> a_range,
                                            std::pair<BigInt, BigInt> b_range, const BigInt& q_min,
                                            const FactorBudget& budget) {
  if (alpha_target != 1 && alpha_target != -1)
    throw std::invalid_argument("alpha_target must be 1 or -1");
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  std::vector<TrinomialHit> hits;
  BigInt lead = alpha_target == 1 ? 1 : (n % 2 == 0 ? 1 : -1);
  for (BigInt a = a_range.first; a <= a_range.second; ++a) {
    for (BigInt b = b_range.first; b <= b_range.second; ++b) {
      BigInt value = alpha_target == 1 ? BigInt(lead + a + b) : BigInt(lead - a + b);
      if (mp::abs(value) <= 1) continue;  // units have no prime factor to offer
      ring::Factorization fac = ring::factorize(BigInt(mp::abs(value)), budget);
      if (!fac.complete() || fac.factors.empty()) continue;
      BigInt qv = fac.factors.back().first;
      if (qv < q_min) continue;
      TrinomialHit hit;
      hit.a = a;
      hit.b = b;
      std::vector<BigInt> coeffs(n + 1, BigInt(0));
      coeffs[0] = b;
      coeffs[1] = a;
      coeffs[n] = 1;
      hit.f = IntPolynomial(std::move(coeffs));
      hit.q = PrimeModulus::make(qv);
      hit.irreducible = ring::is_probably_irreducible(hit.f);
      hits.push_back(std::move(hit));
    }
  }
  return hits;
}

FamilyConditionReport check_family_conditions(unsigned n, const PrimeModulus& q, double w,
                                              const FactorBudget& budget) {
  FamilyConditionReport rep;
  rep.n = n;
  rep.q = q.q;
  rep.w = w;

  // (1) n is a power of a prime p.
  if (n >= 2) {
    unsigned m = n;
    unsigned p = 0;
    for (unsigned d = 2; d * d <= m; ++d)
      if (m % d == 0) {
        p = d;
        break;
      }
    if (p == 0) p = m;
    while (m % p == 0) m /= p;
    if (m == 1) {
      rep.n_prime_power = TriState::holds;
      rep.p = p;
    }
  }

  // (2) q - 1 squarefree, tri-state under the factoring budget.
  ring::Factorization fac = ring::factorize(BigInt(q.q - 1), budget);
  bool square_seen = false;
  for (const auto& [prime, exp] : fac.factors)
    if (exp >= 2) square_seen = true;
  if (square_seen)
    rep.q_minus_1_squarefree = TriState::fails;
  else if (fac.complete())
    rep.q_minus_1_squarefree = TriState::holds;
  else
    rep.q_minus_1_squarefree = TriState::unknown;

  // (3) p^2 does not divide (1-q)^n - (1-q), checked mod p^2.
  if (rep.n_prime_power == TriState::holds) {
    BigInt p2 = rep.p * rep.p;
    BigInt base = (1 - q.q) % p2;
    if (base < 0) base += p2;
    BigInt lhs = mp::powm(base, BigInt(n), p2);
    rep.p_square_condition = lhs == base ? TriState::fails : TriState::holds;
  }

  rep.tau_value = embedding::tau(n, q.q, Real(w), 96);
  rep.tau_greater_1 = rep.tau_value > 1 ? TriState::holds : TriState::fails;

  TriState parts[3] = {rep.n_prime_power, rep.q_minus_1_squarefree, rep.p_square_condition};
  rep.monogenic = TriState::holds;
  for (TriState t : parts) {
    if (t == TriState::fails) {
      rep.monogenic = TriState::fails;
      break;
    }
    if (t == TriState::unknown) rep.monogenic = TriState::unknown;
  }
  return rep;
}

CycloImmunityReport cyclotomic_immunity_check(unsigned m, const PrimeModulus& q) {
  if (m == 0) throw std::invalid_argument("m must be positive");
  CycloImmunityReport rep;
  rep.m = m;
  rep.q = q;
  if ((q.q - 1) % m != 0)
    throw Error(Err::DoesNotSplit, "q is not 1 mod " + std::to_string(m));
  if (!q.fits_u64())
    throw Error(Err::ModulusTooLargeForOrderComputation,
                "cyclotomic immunity check supports moduli below 2^64");

  PrimeModulus qc = q;
  std::vector<RootInfo> roots = ring::find_roots_mod(ring::cyclotomic_poly(m), qc);
  rep.min_order = 0;
  rep.all_have_order_m = !roots.empty();
  for (const RootInfo& r : roots) {
    rep.roots.push_back(r.root);
    BigInt ord = order_dividing_m(r.root, m, q);
    if (ord != m) rep.all_have_order_m = false;
    if (ord != 0 && (rep.min_order == 0 || ord < rep.min_order)) rep.min_order = ord;
  }
  return rep;
}

VulnerabilityReport vet_parameters(const IntPolynomial& f, const PrimeModulus& q, double w,
                                   VetVariant variant, const VetOptions& opts) {
  VulnerabilityReport rep;
  rep.f = f;
  rep.q = q;
  rep.w = w;
  int n = f.degree();
  double sigma = w / 2.5066282746310002;

  PrimeModulus qm = q;
  ring::RootFindOptions ropts;
  ropts.factor_budget = opts.factor_budget;
  std::vector<RootInfo> roots = ring::find_roots_mod(f, qm, ropts);

  for (const RootInfo& r : roots) {
    if (!r.is_unit) continue;
    for (BigInt d = 1; d <= opts.small_order_bound; ++d) {
      if (mp::powm(r.root, d, q.q) == 1) {
        RootInfo info = r;
        info.order = d;
        rep.roots_of_small_order.push_back(info);
        break;
      }
    }
  }

  bool has_one = ring::poly_eval_mod(f, BigInt(1), q) == 0;
  rep.conditions["R"] = has_one ? TriState::holds : TriState::fails;
  rep.conditions["R_prime"] =
      rep.roots_of_small_order.empty() ? TriState::fails : TriState::holds;
  rep.conditions["Q"] = q.q <= opts.attack_max_q ? TriState::holds : TriState::fails;

  // Monogenicity hypotheses apply to the family shape x^n + (q - 1).
  bool family_shape = f.is_monic() && n >= 2 && f[0] == BigInt(q.q - 1);
  for (int i = 1; family_shape && i < n; ++i)
    if (f[i] != 0) family_shape = false;
  rep.conditions["M"] =
      family_shape
          ? check_family_conditions(static_cast<unsigned>(n), q, w, opts.factor_budget).monogenic
          : TriState::unknown;

  try {
    ring::SplitVerdict sv = ring::splits_completely(f, q);
    rep.conditions["S"] =
        sv == ring::SplitVerdict::does_not_split ? TriState::fails : TriState::holds;
  } catch (const Error&) {
    rep.conditions["S"] = TriState::unknown;
  }

  rep.tau = embedding::tau(static_cast<unsigned>(n), q.q, Real(w), 96);

  bool theorem1_met = false;
  if (n <= opts.spectral_degree_cap) {
    try {
      embedding::EmbeddingData emb = embedding::build_embedding(f, opts.precision_bits);
      embedding::SpectralReport sr = embedding::spectral_stats(emb, Real(w), &qm);
      rep.rho_prime_estimate = sr.rho_prime;
      theorem1_met = sr.theorem1_bound_met.value_or(false);
    } catch (const Error& e) {
      rep.spectral_note = std::string("spectral stats unavailable: ") + e.what();
    }
  } else {
    bool trinomial_shape = f.is_monic();
    for (int i = 2; trinomial_shape && i < n; ++i)
      if (f[i] != 0) trinomial_shape = false;
    if (trinomial_shape) {
      PrecisionGuard guard(96);
      BigInt mx = mp::max(BigInt(mp::abs(f[0])), BigInt(mp::abs(f[1])));
      rep.rho_prime_estimate = sqrt(Real(mx));
      rep.rho_prime_is_heuristic = true;
      rep.spectral_note = "degree above spectral cap; sqrt(max(|a|,|b|)) trinomial heuristic";
    } else {
      rep.spectral_note = "degree above spectral cap";
    }
  }

  // Proposition 2 condition 1 (alpha = +-1) and, per small-order root of
  // order r >= 3, condition 2 and the Proposition 1 set-size inequality.
  PrecisionGuard guard(128);
  Real qr(q.q);
  bool prop2_cond1 = false, prop2_cond2 = false, prop1 = false;
  bool has_pm_one = false;
  for (const RootInfo& r : rep.roots_of_small_order) {
    if (r.root == 1 || r.root == BigInt(q.q - 1)) has_pm_one = true;
  }
  if (has_pm_one && Real(8 * sigma) * sqrt(Real(n)) < qr) prop2_cond1 = true;
  for (const RootInfo& r : rep.roots_of_small_order) {
    if (r.order < 3) continue;
    Real rr(r.order);
    BigInt bal = r.root;
    if (2 * bal > q.q - 1) bal -= q.q;
    BigInt a2 = bal * bal;
    BigInt geom = 0, pw = 1;  // sum of alpha^(2j), j = 0..r-1
    for (BigInt j = 0; j < r.order; ++j) {
      geom += pw;
      pw *= a2;
    }
    if (Real(8 * sigma) * sqrt(Real(n) / rr) * sqrt(Real(geom)) < qr) prop2_cond2 = true;
    if (pow_real(Real(4 * sigma * n) / rr, rr) < qr) prop1 = true;
  }

  bool polylwe_vulnerable = prop2_cond1 || prop2_cond2 || prop1;
  bool ringlwe_vulnerable = has_one && theorem1_met;
  if (variant == VetVariant::ringlwe && ringlwe_vulnerable)
    rep.verdict = VetVerdict::vulnerable_ringlwe;
  else if (polylwe_vulnerable)
    rep.verdict = VetVerdict::vulnerable_polylwe;
  else
    rep.verdict = VetVerdict::not_vulnerable_by_these_tests;
  return rep;
}

// ---- JSON ----

std::string FamilyConditionReport::to_json() const {
  json j;
  j["n"] = n;
  j["q"] = q.str();
  j["w"] = w;
  j["n_prime_power"] = tristate_name(n_prime_power);
  j["p"] = p.str();
  j["q_minus_1_squarefree"] = tristate_name(q_minus_1_squarefree);
  j["p_square_condition"] = tristate_name(p_square_condition);
  j["tau"] = real_to_decimal(tau_value, 30);
  j["tau_greater_1"] = tristate_name(tau_greater_1);
  j["monogenic"] = tristate_name(monogenic);
  return j.dump();
}

std::string CycloImmunityReport::to_json() const {
  json j;
  j["m"] = m;
  j["q"] = q.q.str();
  json arr = json::array();
  for (const BigInt& r : roots) arr.push_back(r.str());
  j["roots"] = arr;
  j["min_order"] = min_order.str();
  j["all_have_order_m"] = all_have_order_m;
  return j.dump();
}

std::string VulnerabilityReport::to_json() const {
  json j;
  j["f"] = json::parse(f.to_json());
  j["q"] = q.q.str();
  j["w"] = w;
  json arr = json::array();
  for (const RootInfo& r : roots_of_small_order)
    arr.push_back({{"root", r.root.str()}, {"order", r.order.str()}});
  j["roots_of_small_order"] = arr;
  j["tau"] = tau ? json(real_to_decimal(*tau, 30)) : json(nullptr);
  j["rho_prime_estimate"] =
      rho_prime_estimate ? json(real_to_decimal(*rho_prime_estimate, 30)) : json(nullptr);
  j["rho_prime_is_heuristic"] = rho_prime_is_heuristic;
  j["spectral_note"] = spectral_note;
  json cond;
  for (const auto& [key, value] : conditions) cond[key] = tristate_name(value);
  j["conditions"] = cond;
  j["verdict"] = vet_verdict_name(verdict);
  return j.dump();
}

}  // namespace weakring::vetting
