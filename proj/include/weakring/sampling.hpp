#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakring/embedding.hpp"
#include "weakring/numtypes.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/rng.hpp"

namespace weakring::sampling {

enum class Truncation { hard_2sigma, norm_warn_only };

struct GaussianSpec {
  double sigma = 0.0;
  double width_w = 0.0;  // sqrt(2*pi) * sigma
  std::optional<double> sigma_prime;
  Truncation truncation = Truncation::hard_2sigma;

  static GaussianSpec from_sigma(double sigma, Truncation t = Truncation::hard_2sigma);
  static GaussianSpec from_width(double w, Truncation t = Truncation::hard_2sigma);
  double effective_sigma() const { return sigma_prime ? *sigma_prime : sigma; }
  void validate() const;
};

// Integer-rounded Gaussian of standard deviation sigma, sampled by inversion
// from a cumulative table over [-ceil(6 sigma), ceil(6 sigma)].
class IntegerGaussianSampler {
 public:
  explicit IntegerGaussianSampler(double sigma);
  long draw(RngStream& rng) const;
  // Redraws until |e| <= ceil(2 sigma).
  long draw_truncated(RngStream& rng) const;
  long truncation_bound() const { return bound2_; }

 private:
  long bound6_ = 0;
  long bound2_ = 0;
  std::vector<double> cdf_;
};

ring::IntPolynomial sample_coeff_gaussian(const GaussianSpec& spec, int n, RngStream& rng);
ring::IntPolynomial sample_uniform_poly(const ring::PrimeModulus& q, int n, RngStream& rng);

// Spherical continuous Gaussian discretized to the embedded lattice by Babai
// round-off: returns M * round(M^-1 x).
std::vector<Real> sample_lattice_gaussian(const embedding::EmbeddingData& emb,
                                          const GaussianSpec& spec, RngStream& rng);

namespace detail {
// The rounded lattice coordinates of the draw (the integer vector round(M^-1 x)).
std::vector<BigInt> lattice_gaussian_coords(const embedding::EmbeddingData& emb,
                                            const GaussianSpec& spec, RngStream& rng);
}  // namespace detail

enum class Variant { polylwe_coefficient, ringlwe_embedded };

struct PolyPair {
  std::vector<std::uint64_t> a, b;
};
struct EmbPair {
  std::vector<Real> a, b;
};

struct LweSampleSet {
  Variant variant = Variant::polylwe_coefficient;
  ring::PrimeModulus modulus;
  int n = 0;
  GaussianSpec gaussian;
  std::uint64_t seed = 0;
  std::string secret_commitment;
  unsigned precision_bits = 0;  // ringlwe only
  std::vector<PolyPair> poly_samples;
  std::vector<EmbPair> emb_samples;

  std::size_t count() const {
    return variant == Variant::polylwe_coefficient ? poly_samples.size() : emb_samples.size();
  }
  std::string to_jsonl() const;
  static LweSampleSet from_jsonl(const std::string& text);
};

std::string commit_secret(const std::vector<std::uint64_t>& values, Variant variant);

LweSampleSet gen_polylwe_samples(const ring::IntPolynomial& f, const ring::PrimeModulus& q,
                                 const GaussianSpec& spec, const ring::IntPolynomial& secret,
                                 std::size_t ell, std::uint64_t seed);

// secret_coords are the integer lattice coordinates of the secret, each in [0, q).
LweSampleSet gen_ringlwe_samples(const embedding::EmbeddingData& emb, const ring::PrimeModulus& q,
                                 const GaussianSpec& spec,
                                 const std::vector<std::uint64_t>& secret_coords, std::size_t ell,
                                 std::uint64_t seed);

struct ErrorNormReport {
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  bool norm_warning = false;  // max_ratio > 1
};

// Ratios of draw norms to sqrt(n) * sigma * sqrt(2*pi).
ErrorNormReport error_norm_stats(std::size_t draws, const embedding::EmbeddingData& emb,
                                 const GaussianSpec& spec, std::uint64_t seed = 0);

}  // namespace weakring::sampling
