#include "weakring/croots.hpp"

#include <mpfr.h>

#include <algorithm>
#include <stdexcept>

#include "weakring/errors.hpp"

namespace weakring::detail {

using ring::IntPolynomial;

namespace {

// Horner evaluation of f and f' at z.
void eval_with_deriv(const std::vector<CNum>& c, const CNum& z, CNum& p, CNum& dp) {
  p = c.back();
  dp = CNum(Real(0), Real(0));
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[i];
  }
}

}  // namespace

RootEstimates aberth_roots(const IntPolynomial& f, unsigned precision_bits) {
  int n = f.degree();
  if (n < 1) throw std::invalid_argument("aberth_roots: degree must be >= 1");
  PrecisionGuard guard(precision_bits + 32);

  std::vector<CNum> c(n + 1);
  Real norm1(0);
  for (int i = 0; i <= n; ++i) {
    c[i] = CNum(Real(f[i]), Real(0));
    norm1 += abs(Real(f[i]));
  }

  // Fujiwara bound on root magnitudes.
  Real lead = abs(c[n].re);
  Real radius(0);
  for (int i = 0; i < n; ++i) {
    if (f[i] == 0) continue;
    Real t = abs(c[i].re) / lead;
    if (i == 0) t /= 2;
    Real r = pow_real(t, Real(1) / Real(n - i));
    if (r > radius) radius = r;
  }
  radius *= 2;
  if (radius == 0) radius = Real(1) / 4;

  // Initial guesses on a circle, angles offset to dodge symmetry traps.
  std::vector<CNum> z(n);
  {
    Real pi;
    mpfr_const_pi(pi.backend().data(), MPFR_RNDN);
    for (int j = 0; j < n; ++j) {
      Real ang = (Real(2) * pi * (Real(j) + Real(0.3537))) / Real(n) + Real(0.2183);
      z[j] = CNum(radius * mp::cos(ang), radius * mp::sin(ang));
    }
  }

  Real target = mp::ldexp(Real(1), -static_cast<int>(precision_bits));  // step tolerance
  const int max_iters = 600;
  bool converged = false;
  for (int iter = 0; iter < max_iters && !converged; ++iter) {
    Real worst(0);
    for (int j = 0; j < n; ++j) {
      CNum p, dp;
      eval_with_deriv(c, z[j], p, dp);
      if (abs(p) == 0) continue;
      CNum newton = p / dp;
      CNum sum(Real(0), Real(0));
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        CNum d = z[j] - z[k];
        Real d2 = d.re * d.re + d.im * d.im;
        if (d2 == 0) continue;  // collision: handled after convergence check
        sum += CNum(d.re / d2, -d.im / d2);
      }
      CNum denom = CNum(Real(1), Real(0)) - newton * sum;
      CNum step = (denom.re == 0 && denom.im == 0) ? newton : newton / denom;
      z[j] -= step;
      Real rel = abs(step) / (Real(1) + abs(z[j]));
      if (rel > worst) worst = rel;
    }
    if (worst < target) converged = true;
  }

  RootEstimates out;
  out.roots = z;
  out.residuals.resize(n);
  out.err_bounds.resize(n);
  Real res_tol = mp::ldexp(norm1, -static_cast<int>(precision_bits / 2));
  for (int j = 0; j < n; ++j) {
    CNum p, dp;
    eval_with_deriv(c, z[j], p, dp);
    out.residuals[j] = abs(p);
    Real dpn = abs(dp);
    out.err_bounds[j] = dpn == 0 ? out.residuals[j] : out.residuals[j] / dpn;
    if (out.residuals[j] >= res_tol)
      throw Error(Err::PrecisionInsufficient,
                  "root residual " + out.residuals[j].str(8) + " exceeds tolerance at " +
                      std::to_string(precision_bits) + " bits");
  }
  Real sep_tol = mp::ldexp(Real(1), -static_cast<int>(precision_bits / 2));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Real d = abs(z[i] - z[j]);
      if (d < sep_tol * (Real(1) + abs(z[i]) + abs(z[j])))
        throw Error(Err::RepeatedRootSuspected,
                    "roots " + std::to_string(i) + " and " + std::to_string(j) +
                        " are closer than the separation tolerance");
    }
  return out;
}

}  // namespace weakring::detail
