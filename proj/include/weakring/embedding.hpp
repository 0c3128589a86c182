// Canonical embedding of a monogenic number ring: ordered complex roots, the
// matrix M (columns theta(alpha^i)), inverse, determinant, spectral metrics,
// and the transport map into F_q.
#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include <optional>
#include <string>
#include <vector>

#include "weakring/numtypes.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"

namespace weakring::embedding {

using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

enum class RowKey { real, complex_re, complex_im };

struct OrderedRoots {
  // Real roots ascending, then one representative per conjugate pair
  // (imaginary part > 0), ordered by (Re, Im) ascending.
  std::vector<CNum> roots;
  std::vector<RowKey> row_key;  // n entries: r1 reals, r2 res, r2 ims
  int r1 = 0;
  int r2 = 0;
};

// Roots at the stated precision with classification and deterministic
// ordering. Throws PrecisionInsufficient / RepeatedRootSuspected.
OrderedRoots complex_roots(const ring::IntPolynomial& f, unsigned precision_bits);

struct EmbeddingData {
  ring::IntPolynomial f;
  unsigned precision_bits = 300;
  OrderedRoots roots;
  RealMatrix M;      // columns are theta(alpha^i)
  RealMatrix M_inv;
  Real det_abs;
  int n() const { return f.degree(); }
  int r1() const { return roots.r1; }
  int r2() const { return roots.r2; }
};

// Builds M, M_inv (LU), det; enforces the round-trip invariant
// max|M*M_inv - I| < 2^(-precision_bits/2).
EmbeddingData build_embedding(const ring::IntPolynomial& f, unsigned precision_bits = 300);

// Synthetic M = I embedding: the coefficient lattice itself. Used for
// identity-lattice diagnostics and the Poly-LWE smoke test.
EmbeddingData identity_embedding(const ring::IntPolynomial& f, unsigned precision_bits = 64);

struct SpectralReport {
  Real rho;               // spectral norm of M_inv
  Real rho_prime;         // rho * det^(1/n)
  Real norm_M;            // spectral norm of M
  Real condition_number;  // norm_M * rho
  std::optional<Real> tau;
  std::optional<bool> theorem1_bound_met;  // rho' < q / (4 w n)
};

// Power iteration on M^T M and M_inv^T M_inv, 1e-10 relative convergence,
// at most 1e4 iterations (PowerIterationDiverged beyond).
SpectralReport spectral_stats(const EmbeddingData& emb, const std::optional<Real>& w = {},
                              const ring::PrimeModulus* q = nullptr);

// The closed form 2^(-r2/n) * sqrt((q-1)^(1-1/n)) for f = x^n + q - 1,
// exactly as printed (see spectral_stats for the numeric counterpart; the
// two differ by a constant convention factor, sqrt(2) at even n).
Real family_rho_prime(unsigned n, const BigInt& q, unsigned precision_bits = 300);

// tau = q / (2 sqrt(2) w n (q-1)^(1/2 - 1/(2n))), at >= 50 significant bits.
Real tau(unsigned n, const BigInt& q, const Real& w, unsigned precision_bits = 300);

// Round M_inv * v to integer coordinates and evaluate at alpha mod q.
// Throws RoundingAmbiguous when a coordinate is within 2^(-precision/4) of a
// half-integer.
BigInt transport_to_residue(const std::vector<Real>& v, const EmbeddingData& emb,
                            const BigInt& alpha, const ring::PrimeModulus& q);

// Exact integer coordinates of an embedded lattice vector (shared by the
// transport map and the Ring-LWE sampler).
std::vector<BigInt> lattice_coordinates(const std::vector<Real>& v, const EmbeddingData& emb);

// Versioned binary cache keyed by (sha256 of f JSON, precision_bits).
std::string embedding_cache_key(const ring::IntPolynomial& f, unsigned precision_bits);
void save_embedding(const EmbeddingData& emb, const std::string& path);
EmbeddingData load_embedding(const std::string& path);
// Loads from `cache_dir` if present, else builds and stores.
EmbeddingData cached_embedding(const ring::IntPolynomial& f, unsigned precision_bits,
                               const std::string& cache_dir);

}  // namespace weakring::embedding
