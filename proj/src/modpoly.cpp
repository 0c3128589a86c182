#include "weakring/modpoly.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace weakring::ring {

std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t q) {
  std::uint64_t r = 1 % q;
  base %= q;
  while (exp) {
    if (exp & 1) r = mulmod_u64(r, base, q);
    base = mulmod_u64(base, base, q);
    exp >>= 1;
  }
  return r;
}

std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t q) { return powmod_u64(a, q - 2, q); }

void zq_trim(ZqPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

int zq_degree(const ZqPoly& a) { return static_cast<int>(a.size()) - 1; }

ZqPoly zq_reduce(const IntPolynomial& f, std::uint64_t q) {
  ZqPoly r(f.coeffs().size());
  BigInt bq(q);
  for (std::size_t i = 0; i < r.size(); ++i) {
    BigInt v = f.coeffs()[i] % bq;
    if (v < 0) v += bq;
    r[i] = static_cast<std::uint64_t>(v);
  }
  zq_trim(r);
  return r;
}

IntPolynomial zq_lift(const ZqPoly& a) {
  std::vector<BigInt> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i];
  return IntPolynomial(std::move(c));
}

ZqPoly zq_add(const ZqPoly& a, const ZqPoly& b, std::uint64_t q) {
  ZqPoly r(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = addmod_u64(i < a.size() ? a[i] : 0, i < b.size() ? b[i] : 0, q);
  zq_trim(r);
  return r;
}

ZqPoly zq_sub(const ZqPoly& a, const ZqPoly& b, std::uint64_t q) {
  ZqPoly r(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = submod_u64(i < a.size() ? a[i] : 0, i < b.size() ? b[i] : 0, q);
  zq_trim(r);
  return r;
}

ZqPoly zq_mul(const ZqPoly& a, const ZqPoly& b, std::uint64_t q) {
  if (a.empty() || b.empty()) return {};
  ZqPoly r(a.size() + b.size() - 1, 0);
  // When q^2 * min(|a|,|b|) fits in 128 bits, accumulate and reduce once per
  // output coefficient; otherwise reduce per term.
  int qbits = 64 - __builtin_clzll(q);
  std::size_t terms = std::min(a.size(), b.size());
  bool lazy = 2 * qbits + 64 - __builtin_clzll(terms) < 127;
  if (lazy) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      unsigned __int128 acc = 0;
      std::size_t lo = k >= b.size() ? k - b.size() + 1 : 0;
      std::size_t hi = std::min(k, a.size() - 1);
      for (std::size_t i = lo; i <= hi; ++i)
        acc += static_cast<unsigned __int128>(a[i]) * b[k - i];
      r[k] = static_cast<std::uint64_t>(acc % q);
    }
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      for (std::size_t j = 0; j < b.size(); ++j)
        r[i + j] = addmod_u64(r[i + j], mulmod_u64(a[i], b[j], q), q);
    }
  }
  zq_trim(r);
  return r;
}

ZqPoly zq_mod(ZqPoly a, const ZqPoly& f, std::uint64_t q) {
  int df = zq_degree(f);
  if (df < 0) throw std::invalid_argument("zq_mod: zero modulus polynomial");
  std::uint64_t leadinv = f.back() == 1 ? 1 : invmod_u64(f.back(), q);
  // Sparse-aware reduction: visit only nonzero non-leading coefficients of f.
  std::vector<std::pair<int, std::uint64_t>> nz;
  for (int j = 0; j < df; ++j)
    if (f[j] != 0) nz.emplace_back(j, f[j]);
  for (int i = zq_degree(a); i >= df; --i) {
    std::uint64_t coef = a[i];
    if (coef == 0) continue;
    if (leadinv != 1) coef = mulmod_u64(coef, leadinv, q);
    a[i] = 0;
    for (auto [j, fv] : nz)
      a[i - df + j] = submod_u64(a[i - df + j], mulmod_u64(coef, fv, q), q);
  }
  zq_trim(a);
  return a;
}

ZqPoly zq_mulmod(const ZqPoly& a, const ZqPoly& b, const ZqPoly& f, std::uint64_t q) {
  return zq_mod(zq_mul(a, b, q), f, q);
}

ZqPoly zq_monic(ZqPoly a, std::uint64_t q) {
  zq_trim(a);
  if (a.empty() || a.back() == 1) return a;
  std::uint64_t inv = invmod_u64(a.back(), q);
  for (auto& v : a) v = mulmod_u64(v, inv, q);
  return a;
}

ZqPoly zq_gcd(ZqPoly a, ZqPoly b, std::uint64_t q) {
  zq_trim(a);
  zq_trim(b);
  while (!b.empty()) {
    ZqPoly r = zq_mod(std::move(a), zq_monic(b, q), q);
    a = std::move(b);
    b = std::move(r);
  }
  return zq_monic(std::move(a), q);
}

ZqPoly zq_derivative(const ZqPoly& a, std::uint64_t q) {
  if (a.size() <= 1) return {};
  ZqPoly r(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i)
    r[i - 1] = mulmod_u64(a[i], i % q, q);
  zq_trim(r);
  return r;
}

std::uint64_t zq_eval(const ZqPoly& a, std::uint64_t x, std::uint64_t q) {
  std::uint64_t acc = 0;
  for (std::size_t i = a.size(); i-- > 0;)
    acc = addmod_u64(mulmod_u64(acc, x, q), a[i], q);
  return acc;
}

ZqPoly zq_pow_x(const BigInt& e, const ZqPoly& f, std::uint64_t q) {
  ZqPoly r{1};
  if (e == 0) return zq_mod(std::move(r), f, q);
  std::size_t nbits = msb(e) + 1;
  int df = zq_degree(f);
  for (std::size_t b = nbits; b-- > 0;) {
    r = zq_mulmod(r, r, f, q);
    if (bit_test(e, b)) {
      // multiply by x: shift up one degree, then reduce
      r.insert(r.begin(), 0);
      if (zq_degree(r) >= df) r = zq_mod(std::move(r), f, q);
    }
  }
  return r;
}

ZqPoly zq_powmod(ZqPoly a, BigInt e, const ZqPoly& f, std::uint64_t q) {
  ZqPoly r{1};
  a = zq_mod(std::move(a), f, q);
  while (e > 0) {
    if (bit_test(e, 0)) r = zq_mulmod(r, a, f, q);
    a = zq_mulmod(a, a, f, q);
    e >>= 1;
  }
  return r;
}

std::vector<std::uint64_t> zq_split_linear(const ZqPoly& g, std::uint64_t q, RngStream& rng) {
  std::vector<std::uint64_t> roots;
  std::vector<ZqPoly> work{zq_monic(g, q)};
  BigInt half((q - 1) / 2);
  while (!work.empty()) {
    ZqPoly cur = std::move(work.back());
    work.pop_back();
    int d = zq_degree(cur);
    if (d <= 0) continue;
    if (d == 1) {
      roots.push_back(cur[0] == 0 ? 0 : q - cur[0]);
      continue;
    }
    if (q == 2) {  // only candidates are 0 and 1
      for (std::uint64_t c = 0; c < 2; ++c)
        if (zq_eval(cur, c, q) == 0) roots.push_back(c);
      continue;
    }
    for (;;) {
      std::uint64_t c = rng.uniform_u64(q);
      ZqPoly base{c, 1};
      ZqPoly h = zq_powmod(base, half, cur, q);
      if (h.empty())
        h = {};  // (x+c)^((q-1)/2) == 0 means x+c divides cur; gcd below finds it
      ZqPoly hm1 = h;
      if (hm1.empty())
        hm1 = {q - 1};
      else
        hm1[0] = submod_u64(hm1[0], 1, q);
      ZqPoly d1 = zq_gcd(hm1, cur, q);
      int dd = zq_degree(d1);
      if (dd > 0 && dd < d) {
        // cur = d1 * (cur / d1)
        ZqPoly rest = cur;
        // divide cur by monic d1
        {
          ZqPoly quo(rest.size() - d1.size() + 1, 0);
          for (int i = zq_degree(rest); i >= zq_degree(d1); --i) {
            std::uint64_t coef = rest[i];
            if (coef == 0) continue;
            quo[i - zq_degree(d1)] = coef;
            for (std::size_t j = 0; j < d1.size(); ++j)
              rest[i - zq_degree(d1) + j] =
                  submod_u64(rest[i - zq_degree(d1) + j], mulmod_u64(coef, d1[j], q), q);
          }
          work.push_back(std::move(d1));
          work.push_back(std::move(quo));
        }
        break;
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// ---- arbitrary-precision variants ----

void bq_trim(BqPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

int bq_degree(const BqPoly& a) { return static_cast<int>(a.size()) - 1; }

BqPoly bq_reduce(const IntPolynomial& f, const BigInt& q) {
  BqPoly r(f.coeffs().size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = f.coeffs()[i] % q;
    if (r[i] < 0) r[i] += q;
  }
  bq_trim(r);
  return r;
}

static BigInt bq_invmod(const BigInt& a, const BigInt& q) {
  return powm(a, q - 2, q);
}

BqPoly bq_sub(const BqPoly& a, const BqPoly& b, const BigInt& q) {
  BqPoly r(std::max(a.size(), b.size()), BigInt(0));
  for (std::size_t i = 0; i < r.size(); ++i) {
    BigInt v = (i < a.size() ? a[i] : BigInt(0)) - (i < b.size() ? b[i] : BigInt(0));
    if (v < 0) v += q;
    r[i] = v;
  }
  bq_trim(r);
  return r;
}

BqPoly bq_mul(const BqPoly& a, const BqPoly& b, const BigInt& q) {
  if (a.empty() || b.empty()) return {};
  BqPoly r(a.size() + b.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  for (auto& v : r) v %= q;
  bq_trim(r);
  return r;
}

BqPoly bq_mod(BqPoly a, const BqPoly& f, const BigInt& q) {
  int df = bq_degree(f);
  if (df < 0) throw std::invalid_argument("bq_mod: zero modulus polynomial");
  BigInt leadinv = f.back() == 1 ? BigInt(1) : bq_invmod(f.back(), q);
  for (int i = bq_degree(a); i >= df; --i) {
    BigInt coef = a[i] % q;
    if (coef == 0) continue;
    if (leadinv != 1) coef = coef * leadinv % q;
    a[i] = 0;
    for (int j = 0; j < df; ++j) {
      if (f[j] == 0) continue;
      a[i - df + j] = (a[i - df + j] - coef * f[j]) % q;
      if (a[i - df + j] < 0) a[i - df + j] += q;
    }
  }
  bq_trim(a);
  return a;
}

BqPoly bq_monic(BqPoly a, const BigInt& q) {
  bq_trim(a);
  if (a.empty() || a.back() == 1) return a;
  BigInt inv = bq_invmod(a.back(), q);
  for (auto& v : a) v = v * inv % q;
  return a;
}

BqPoly bq_gcd(BqPoly a, BqPoly b, const BigInt& q) {
  bq_trim(a);
  bq_trim(b);
  while (!b.empty()) {
    BqPoly r = bq_mod(std::move(a), bq_monic(b, q), q);
    a = std::move(b);
    b = std::move(r);
  }
  return bq_monic(std::move(a), q);
}

BqPoly bq_pow_x(const BigInt& e, const BqPoly& f, const BigInt& q) {
  BqPoly r{BigInt(1)};
  if (e == 0) return bq_mod(std::move(r), f, q);
  std::size_t nbits = msb(e) + 1;
  for (std::size_t b = nbits; b-- > 0;) {
    r = bq_mod(bq_mul(r, r, q), f, q);
    if (bit_test(e, b)) {
      r.insert(r.begin(), BigInt(0));
      r = bq_mod(std::move(r), f, q);
    }
  }
  return r;
}

BigInt bq_eval(const BqPoly& a, const BigInt& x, const BigInt& q) {
  BigInt acc = 0;
  for (std::size_t i = a.size(); i-- > 0;) acc = (acc * x + a[i]) % q;
  if (acc < 0) acc += q;
  return acc;
}

static BqPoly bq_powmod(BqPoly a, BigInt e, const BqPoly& f, const BigInt& q) {
  BqPoly r{BigInt(1)};
  a = bq_mod(std::move(a), f, q);
  while (e > 0) {
    if (bit_test(e, 0)) r = bq_mod(bq_mul(r, a, q), f, q);
    a = bq_mod(bq_mul(a, a, q), f, q);
    e >>= 1;
  }
  return r;
}

std::vector<BigInt> bq_split_linear(const BqPoly& g, const BigInt& q, RngStream& rng) {
  std::vector<BigInt> roots;
  std::vector<BqPoly> work{bq_monic(g, q)};
  BigInt half = (q - 1) / 2;
  while (!work.empty()) {
    BqPoly cur = std::move(work.back());
    work.pop_back();
    int d = bq_degree(cur);
    if (d <= 0) continue;
    if (d == 1) {
      roots.push_back(cur[0] == 0 ? BigInt(0) : q - cur[0]);
      continue;
    }
    for (;;) {
      BigInt c = rng.uniform_bigint(q);
      BqPoly base{c, BigInt(1)};
      BqPoly h = bq_powmod(base, half, cur, q);
      BqPoly hm1 = h;
      if (hm1.empty())
        hm1 = {q - 1};
      else {
        hm1[0] -= 1;
        if (hm1[0] < 0) hm1[0] += q;
        bq_trim(hm1);
      }
      BqPoly d1 = bq_gcd(hm1, cur, q);
      int dd = bq_degree(d1);
      if (dd > 0 && dd < d) {
        BqPoly rest = cur;
        BqPoly quo(rest.size() - d1.size() + 1, BigInt(0));
        for (int i = bq_degree(rest); i >= bq_degree(d1); --i) {
          BigInt coef = rest[i];
          if (coef == 0) continue;
          quo[i - bq_degree(d1)] = coef;
          for (std::size_t j = 0; j < d1.size(); ++j) {
            rest[i - bq_degree(d1) + j] = (rest[i - bq_degree(d1) + j] - coef * d1[j]) % q;
            if (rest[i - bq_degree(d1) + j] < 0) rest[i - bq_degree(d1) + j] += q;
          }
        }
        work.push_back(std::move(d1));
        work.push_back(std::move(quo));
        break;
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace weakring::ring
