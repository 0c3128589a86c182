#include "weakring/ringcore.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "weakring/croots.hpp"
#include "weakring/errors.hpp"
#include "weakring/rng.hpp"

namespace weakring::ring {

BigInt poly_eval_mod(const IntPolynomial& f, const BigInt& alpha, const PrimeModulus& q) {
  if (alpha < 0 || alpha >= q.q) throw std::invalid_argument("poly_eval_mod: alpha out of [0, q)");
  if (q.fits_u64()) {
    std::uint64_t qq = q.as_u64();
    return BigInt(zq_eval(zq_reduce(f, qq), static_cast<std::uint64_t>(alpha), qq));
  }
  return bq_eval(bq_reduce(f, q.q), alpha, q.q);
}

namespace {

BigInt order_from_factorization(const BigInt& root, const BigInt& q, const Factorization& fac) {
  BigInt o = q - 1;
  for (const auto& [p, e] : fac.factors) {
    for (unsigned i = 0; i < e; ++i) {
      if (o % p != 0) break;
      BigInt cand = o / p;
      if (powm(root, cand, q) == 1)
        o = cand;
      else
        break;
    }
  }
  return o;
}

RootInfo make_root_info(const BigInt& r, const BigInt& q, const Factorization* fac) {
  RootInfo info;
  info.root = r;
  info.is_one = (r == 1);
  info.is_minus_one = (q > 2 && r == q - 1) || (q == 2 && r == 1);
  info.is_unit = (r != 0);
  if (!info.is_unit) return info;
  if (info.is_one) {
    info.order = 1;
  } else if (info.is_minus_one) {
    info.order = 2;
  } else if (fac && fac->complete()) {
    info.order = order_from_factorization(r, q, *fac);
  }
  return info;
}

}  // namespace

std::vector<RootInfo> find_roots_mod(const IntPolynomial& f, PrimeModulus& q,
                                     const RootFindOptions& opts) {
  std::set<BigInt> roots;
  RngStream rng(derive_seed(opts.eds_seed, static_cast<std::uint64_t>(q.q % BigInt(~0ull))));

  if (q.fits_u64()) {
    std::uint64_t qq = q.as_u64();
    ZqPoly fz = zq_reduce(f, qq);
    if (fz.empty()) throw std::invalid_argument("find_roots_mod: f is zero mod q");
    // Fast path: the candidates that matter in practice.
    for (std::uint64_t cand : {std::uint64_t{1}, qq - 1, std::uint64_t{2} % qq})
      if (zq_eval(fz, cand, qq) == 0) roots.insert(BigInt(cand));
    if (qq <= opts.brute_force_q_bound) {
      for (std::uint64_t x = 0; x < qq; ++x)
        if (zq_eval(fz, x, qq) == 0) roots.insert(BigInt(x));
    } else {
      ZqPoly xq = zq_pow_x(BigInt(qq), fz, qq);
      // gcd(x^q - x, f)
      ZqPoly xqmx = zq_sub(xq, ZqPoly{0, 1}, qq);
      ZqPoly g = zq_gcd(xqmx, fz, qq);
      // Divide out already-known roots (synthetic division) before splitting.
      for (const auto& r : roots) {
        std::uint64_t rr = static_cast<std::uint64_t>(r);
        if (zq_degree(g) >= 1 && zq_eval(g, rr, qq) == 0) {
          ZqPoly res(g.size() - 1);
          std::uint64_t carry = 0;
          for (std::size_t i = g.size(); i-- > 1;) {
            carry = addmod_u64(g[i], mulmod_u64(carry, rr, qq), qq);
            res[i - 1] = carry;
          }
          g = std::move(res);
        }
      }
      for (std::uint64_t r : zq_split_linear(g, qq, rng)) roots.insert(BigInt(r));
    }
  } else {
    BqPoly fz = bq_reduce(f, q.q);
    if (fz.empty()) throw std::invalid_argument("find_roots_mod: f is zero mod q");
    for (const BigInt& cand : {BigInt(1), BigInt(q.q - 1), BigInt(2)})
      if (bq_eval(fz, cand, q.q) == 0) roots.insert(cand);
    BqPoly xq = bq_pow_x(q.q, fz, q.q);
    BqPoly xqmx = bq_sub(xq, BqPoly{BigInt(0), BigInt(1)}, q.q);
    BqPoly g = bq_gcd(xqmx, fz, q.q);
    for (const BigInt& r : bq_split_linear(g, q.q, rng)) roots.insert(r);
  }

  bool orders_available = q.ensure_q_minus_1_factored(opts.factor_budget);
  const Factorization* fac = orders_available ? &*q.q_minus_1 : nullptr;
  std::vector<RootInfo> out;
  out.reserve(roots.size());
  for (const BigInt& r : roots) out.push_back(make_root_info(r, q.q, fac));
  return out;
}

BigInt multiplicative_order(const BigInt& alpha, PrimeModulus& q, const FactorBudget& budget) {
  BigInt a = alpha % q.q;
  if (a < 0) a += q.q;
  if (a == 0) throw std::invalid_argument("multiplicative_order: alpha not a unit");
  if (a == 1) return 1;
  if (!q.ensure_q_minus_1_factored(budget))
    throw Error(Err::FactorizationUnavailable,
                "q-1 did not factor within budget for q = " + q.q.str());
  return order_from_factorization(a, q.q, *q.q_minus_1);
}

const IntPolynomial& cyclotomic_poly(unsigned m) {
  static std::map<unsigned, IntPolynomial> cache;
  static std::mutex mtx;
  if (m < 1) throw std::invalid_argument("cyclotomic_poly: m must be >= 1");
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;

  // Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d, computed by recursion
  // unrolled over ascending divisors.
  std::function<const IntPolynomial&(unsigned)> get = [&](unsigned k) -> const IntPolynomial& {
    auto found = cache.find(k);
    if (found != cache.end()) return found->second;
    IntPolynomial num = IntPolynomial::x_pow(k) - IntPolynomial{1};
    for (unsigned d = 1; d < k; ++d) {
      if (k % d != 0) continue;
      num = IntPolynomial::exact_divide(num, get(d));
    }
    return cache.emplace(k, std::move(num)).first->second;
  };
  return get(m);
}

const char* split_verdict_name(SplitVerdict v) {
  switch (v) {
    case SplitVerdict::splits: return "splits";
    case SplitVerdict::does_not_split: return "does_not_split";
    case SplitVerdict::splits_by_easysplit: return "splits_by_easysplit";
  }
  return "?";
}

SplitVerdict splits_completely(const IntPolynomial& f, const PrimeModulus& q) {
  if (!f.is_monic()) throw std::invalid_argument("splits_completely: f must be monic");
  int n = f.degree();
  // Fast path: f = x^(2^j) + 1 and 2 is a root mod q.
  bool pow2_shape = (n & (n - 1)) == 0 && f[0] == 1;
  if (pow2_shape)
    for (int i = 1; i < n && pow2_shape; ++i) pow2_shape = f[i] == 0;
  if (pow2_shape && poly_eval_mod(f, BigInt(2) % q.q, q) == 0)
    return SplitVerdict::splits_by_easysplit;

  if (q.fits_u64()) {
    std::uint64_t qq = q.as_u64();
    ZqPoly fz = zq_reduce(f, qq);
    if (fz.empty()) throw std::invalid_argument("splits_completely: f is zero mod q");
    ZqPoly d = zq_gcd(fz, zq_derivative(fz, qq), qq);
    if (zq_degree(d) != 0) return SplitVerdict::does_not_split;
    ZqPoly xq = zq_pow_x(BigInt(qq), fz, qq);
    return xq == ZqPoly{0, 1} ? SplitVerdict::splits : SplitVerdict::does_not_split;
  }
  BqPoly fz = bq_reduce(f, q.q);
  if (fz.empty()) throw std::invalid_argument("splits_completely: f is zero mod q");
  BqPoly deriv(fz.size() - 1);
  for (std::size_t i = 1; i < fz.size(); ++i) deriv[i - 1] = fz[i] * BigInt(i) % q.q;
  bq_trim(deriv);
  BqPoly d = bq_gcd(fz, deriv, q.q);
  if (bq_degree(d) != 0) return SplitVerdict::does_not_split;
  BqPoly xq = bq_pow_x(q.q, fz, q.q);
  return (xq.size() == 2 && xq[0] == 0 && xq[1] == 1) ? SplitVerdict::splits
                                                      : SplitVerdict::does_not_split;
}

const char* irred_verdict_name(IrredVerdict v) {
  switch (v) {
    case IrredVerdict::irreducible_certified: return "irreducible_certified";
    case IrredVerdict::eisenstein_certified: return "eisenstein_certified";
    case IrredVerdict::unknown: return "unknown";
  }
  return "?";
}

namespace {

// Rabin: f irreducible mod p iff x^(p^n) = x mod (f, p) and for every prime
// l | n, gcd(x^(p^(n/l)) - x, f) is constant.
bool irreducible_mod_p(const IntPolynomial& f, std::uint64_t p) {
  ZqPoly fz = zq_reduce(f, p);
  int n = f.degree();
  if (zq_degree(fz) != n) return false;  // leading coefficient vanished
  ZqPoly d = zq_gcd(fz, zq_derivative(fz, p), p);
  if (zq_degree(d) != 0) return false;
  std::vector<unsigned> prime_divs;
  {
    int m = n;
    for (int l = 2; l * l <= m; ++l)
      if (m % l == 0) {
        prime_divs.push_back(l);
        while (m % l == 0) m /= l;
      }
    if (m > 1) prime_divs.push_back(m);
  }
  BigInt pn = pow(BigInt(p), n);
  ZqPoly x_pn = zq_pow_x(pn, fz, p);
  if (!(x_pn == ZqPoly{0, 1})) return false;
  for (unsigned l : prime_divs) {
    BigInt e = pow(BigInt(p), n / l);
    ZqPoly h = zq_sub(zq_pow_x(e, fz, p), ZqPoly{0, 1}, p);
    if (zq_degree(zq_gcd(h, fz, p)) != 0) return false;
  }
  return true;
}

}  // namespace

IrredVerdict is_probably_irreducible(const IntPolynomial& f) {
  if (!f.is_monic() || f.degree() < 1)
    throw std::invalid_argument("is_probably_irreducible: monic, degree >= 1 required");
  int n = f.degree();
  if (n == 1) return IrredVerdict::irreducible_certified;

  // Eisenstein: p | every non-leading coefficient, p^2 does not divide the
  // constant term. Candidate primes from trial division of |f(0)|.
  if (f[0] != 0) {
    Factorization cf = factorize(abs(f[0]), FactorBudget{1'000'000, 0});
    for (const auto& [p, e] : cf.factors) {
      if (e != 1) continue;
      bool all = true;
      for (int i = 1; i < n && all; ++i) all = f[i] % p == 0;
      if (all) return IrredVerdict::eisenstein_certified;
    }
  }

  // Mod-p certification sweep (small degrees only; the verdict is allowed to
  // stay unknown).
  if (n <= 128) {
    static const std::uint64_t candidates[] = {2, 3, 5, 7, 11, 13, 17, 19};
    for (std::uint64_t p : candidates)
      if (irreducible_mod_p(f, p)) return IrredVerdict::irreducible_certified;
  }
  return IrredVerdict::unknown;
}

BigInt discriminant_abs_exact_family(const IntPolynomial& f) {
  int n = f.degree();
  bool family = n >= 1 && f.is_monic();
  for (int i = 1; i < n && family; ++i) family = f[i] == 0;
  if (!family)
    throw std::invalid_argument("discriminant_abs_exact_family: requires f = x^n + c");
  return pow(BigInt(n), n) * pow(abs(f[0]), n - 1);
}

Real discriminant_abs(const IntPolynomial& f, DiscMode mode, unsigned precision_bits) {
  PrecisionGuard guard(precision_bits);
  if (mode == DiscMode::exact_family) return Real(discriminant_abs_exact_family(f));

  auto est = detail::aberth_roots(f, precision_bits);
  int n = f.degree();
  Real prod(1), rel_err(0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Real d = abs(est.roots[i] - est.roots[j]);
      prod *= d * d;
      rel_err += 2 * (est.err_bounds[i] + est.err_bounds[j]) / d;
    }
  if (rel_err > mp::ldexp(Real(1), -32))
    throw Error(Err::PrecisionInsufficient,
                "numeric discriminant error bound " + rel_err.str(6) + " exceeds 2^-32");
  return prod;
}

}  // namespace weakring::ring
