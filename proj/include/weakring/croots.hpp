// High-precision complex roots of integer polynomials (Aberth-Ehrlich).
#pragma once

#include <vector>

#include "weakring/numtypes.hpp"
#include "weakring/poly.hpp"

namespace weakring::detail {

struct RootEstimates {
  std::vector<CNum> roots;       // unordered
  std::vector<Real> residuals;   // |f(root)| per root
  std::vector<Real> err_bounds;  // ~|f(root)/f'(root)| per root
};

// All complex roots of a squarefree monic-or-not integer polynomial at the
// requested precision. Throws PrecisionInsufficient when residuals fail the
// 2^(-bits/2) * ||f||_1 target, RepeatedRootSuspected when two estimates
// collide within tolerance.
RootEstimates aberth_roots(const ring::IntPolynomial& f, unsigned precision_bits);

}  // namespace weakring::detail
