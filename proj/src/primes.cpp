#include "weakring/primes.hpp"

#include <algorithm>
#include <stdexcept>

#include "weakring/modpoly.hpp"
#include "weakring/rng.hpp"

namespace weakring::ring {

namespace {

const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = [] {
    const std::uint32_t limit = 1'000'000;
    std::vector<bool> sieve(limit + 1, true);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i <= limit; ++i) {
      if (!sieve[i]) continue;
      out.push_back(i);
      for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= limit; j += i)
        sieve[j] = false;
    }
    return out;
  }();
  return primes;
}

bool mr_witness_u64(std::uint64_t n, std::uint64_t a, std::uint64_t d, int s) {
  a %= n;
  if (a == 0) return false;
  std::uint64_t x = powmod_u64(a, d, n);
  if (x == 1 || x == n - 1) return false;
  for (int i = 1; i < s; ++i) {
    x = mulmod_u64(x, x, n);
    if (x == n - 1) return false;
  }
  return true;  // a witnesses compositeness
}

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull})
    if (mr_witness_u64(n, a, d, s)) return false;
  return true;
}

bool mr_witness_big(const BigInt& n, const BigInt& a, const BigInt& d, unsigned s) {
  BigInt x = powm(a % n, d, n);
  if (x == 1 || x == n - 1) return false;
  for (unsigned i = 1; i < s; ++i) {
    x = x * x % n;
    if (x == n - 1) return false;
  }
  return true;
}

// Pollard rho, Brent cycle finding. Returns a nontrivial factor or 0 when the
// step budget ran out. n must be odd composite, not a perfect power of a
// found factor (callers re-run).
std::uint64_t rho_brent_u64(std::uint64_t n, RngStream& rng, std::uint64_t& steps_left) {
  if (n % 2 == 0) return 2;
  while (steps_left > 0) {
    std::uint64_t y = rng.uniform_u64(n - 2) + 1;
    std::uint64_t c = rng.uniform_u64(n - 2) + 1;
    std::uint64_t m = 128, g = 1, r = 1, qacc = 1, x = 0, ys = 0;
    while (g == 1 && steps_left > 0) {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = addmod_u64(mulmod_u64(y, y, n), c, n);
      std::uint64_t k = 0;
      while (k < r && g == 1 && steps_left > 0) {
        ys = y;
        std::uint64_t lim = std::min(m, r - k);
        for (std::uint64_t i = 0; i < lim; ++i) {
          y = addmod_u64(mulmod_u64(y, y, n), c, n);
          qacc = mulmod_u64(qacc, x > y ? x - y : y - x, n);
        }
        steps_left = steps_left > lim ? steps_left - lim : 0;
        g = std::gcd(qacc, n);
        k += m;
      }
      r *= 2;
    }
    if (g == n) {
      g = 1;
      while (g == 1) {
        ys = addmod_u64(mulmod_u64(ys, ys, n), c, n);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      }
    }
    if (g != n && g != 1) return g;
  }
  return 0;
}

BigInt rho_brent_big(const BigInt& n, RngStream& rng, std::uint64_t& steps_left) {
  if (n % 2 == 0) return 2;
  while (steps_left > 0) {
    BigInt y = rng.uniform_bigint(n - 2) + 1;
    BigInt c = rng.uniform_bigint(n - 2) + 1;
    BigInt g = 1, qacc = 1, x = 0, ys = 0;
    std::uint64_t m = 128, r = 1;
    while (g == 1 && steps_left > 0) {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = (y * y + c) % n;
      std::uint64_t k = 0;
      while (k < r && g == 1 && steps_left > 0) {
        ys = y;
        std::uint64_t lim = std::min(m, r - k);
        for (std::uint64_t i = 0; i < lim; ++i) {
          y = (y * y + c) % n;
          qacc = qacc * abs(x - y) % n;
        }
        steps_left = steps_left > lim ? steps_left - lim : 0;
        g = gcd(qacc, n);
        k += m;
      }
      r *= 2;
    }
    if (g == n) {
      g = 1;
      while (g == 1) {
        ys = (ys * ys + c) % n;
        g = gcd(abs(x - ys), n);
      }
    }
    if (g != n && g != 1) return g;
  }
  return 0;
}

void push_factor(Factorization& out, const BigInt& p, unsigned e) {
  for (auto& [fp, fe] : out.factors) {
    if (fp == p) {
      fe += e;
      return;
    }
  }
  out.factors.emplace_back(p, e);
}

}  // namespace

bool is_prime(const BigInt& n) {
  if (n <= BigInt((std::numeric_limits<std::uint64_t>::max)()))
    return is_prime_u64(static_cast<std::uint64_t>(n));
  if (n % 2 == 0) return false;
  BigInt d = n - 1;
  unsigned s = 0;
  while (bit_test(d, 0) == false) d >>= 1, ++s;
  RngStream rng(derive_seed(0x5052494D45ull, static_cast<std::uint64_t>(n % BigInt(~0ull))));
  for (int round = 0; round < 64; ++round) {
    BigInt a = rng.uniform_bigint(n - 3) + 2;
    if (mr_witness_big(n, a, d, s)) return false;
  }
  return true;
}

BigInt Factorization::product() const {
  BigInt p = cofactor;
  for (const auto& [f, e] : factors)
    for (unsigned i = 0; i < e; ++i) p *= f;
  return p;
}

Factorization factorize(BigInt n, const FactorBudget& budget) {
  Factorization out;
  if (n < 0) n = -n;
  if (n <= 1) {
    out.cofactor = 1;
    return out;
  }
  for (std::uint32_t p : small_primes()) {
    if (p > budget.trial_division_bound) break;
    if (BigInt(p) * p > n) break;
    unsigned e = 0;
    while (n % p == 0) n /= p, ++e;
    if (e) push_factor(out, BigInt(p), e);
  }
  if (n == 1) return out;
  // Pollard phase: stack of untested parts, shared step budget.
  std::uint64_t steps_left = budget.rho_iterations;
  RngStream rng(derive_seed(0x52484Full, static_cast<std::uint64_t>(n % BigInt(~0ull))));
  std::vector<BigInt> work{n};
  while (!work.empty()) {
    BigInt m = std::move(work.back());
    work.pop_back();
    if (m == 1) continue;
    if (is_prime(m)) {
      push_factor(out, m, 1);
      continue;
    }
    BigInt f;
    if (m <= BigInt((std::numeric_limits<std::uint64_t>::max)())) {
      std::uint64_t f64 = rho_brent_u64(static_cast<std::uint64_t>(m), rng, steps_left);
      f = f64;
    } else {
      f = rho_brent_big(m, rng, steps_left);
    }
    if (f == 0) {
      out.cofactor *= m;  // budget exhausted, leave composite part
      continue;
    }
    work.push_back(f);
    work.push_back(m / f);
  }
  std::sort(out.factors.begin(), out.factors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

PrimeModulus PrimeModulus::make(BigInt q_in) {
  PrimeModulus pm;
  pm.q = std::move(q_in);
  if (!is_prime(pm.q)) throw std::invalid_argument("PrimeModulus: " + pm.q.str() + " is not prime");
  pm.certainty = pm.q <= BigInt((std::numeric_limits<std::uint64_t>::max)())
                     ? PrimalityCertainty::deterministic
                     : PrimalityCertainty::probabilistic;
  return pm;
}

bool PrimeModulus::ensure_q_minus_1_factored(const FactorBudget& budget) {
  if (!q_minus_1) q_minus_1 = factorize(q - 1, budget);
  return q_minus_1->complete();
}

}  // namespace weakring::ring
