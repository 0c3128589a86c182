#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "weakring/embedding.hpp"
#include "weakring/errors.hpp"
#include "weakring/modpoly.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/rng.hpp"
#include "weakring/sampling.hpp"
#include "weakring/util.hpp"

using namespace weakring;
using namespace weakring::sampling;
using ring::IntPolynomial;
using ring::PrimeModulus;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

IntPolynomial x4_plus_256() { return IntPolynomial({256, 0, 0, 0, 1}); }

ring::ZqPoly trimmed(const std::vector<std::uint64_t>& v) {
  ring::ZqPoly p = v;
  ring::zq_trim(p);
  return p;
}

long balanced(std::uint64_t r, std::uint64_t q) {
  return r > q / 2 ? static_cast<long>(r) - static_cast<long>(q) : static_cast<long>(r);
}

}  // namespace

TEST_CASE("GaussianSpec construction and validation") {
  GaussianSpec s = GaussianSpec::from_sigma(3.0);
  CHECK(s.sigma == doctest::Approx(3.0));
  CHECK(s.width_w == doctest::Approx(kSqrt2Pi * 3.0).epsilon(1e-14));
  CHECK(s.truncation == Truncation::hard_2sigma);
  CHECK(s.effective_sigma() == doctest::Approx(3.0));

  GaussianSpec w = GaussianSpec::from_width(8.0, Truncation::norm_warn_only);
  CHECK(w.sigma == doctest::Approx(8.0 / kSqrt2Pi).epsilon(1e-14));
  CHECK(GaussianSpec::from_width(s.width_w).sigma == doctest::Approx(3.0).epsilon(1e-14));

  w.sigma_prime = 11.5;
  CHECK(w.effective_sigma() == doctest::Approx(11.5));
  w.validate();

  CHECK_THROWS_AS(GaussianSpec::from_sigma(0.0), Error);
  CHECK_THROWS_AS(GaussianSpec::from_sigma(-2.0), Error);
  CHECK_THROWS_AS(GaussianSpec::from_width(0.0), Error);

  GaussianSpec bad = s;
  bad.width_w = 2.0 * s.width_w;
  CHECK_THROWS_AS(bad.validate(), Error);
  GaussianSpec badp = s;
  badp.sigma_prime = -1.0;
  try {
    badp.validate();
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::SchemaViolation);
  }
}

TEST_CASE("integer Gaussian matches the erf cell oracle") {
  const double sigma = 3.0;
  IntegerGaussianSampler sampler(sigma);
  const long bound6 = static_cast<long>(std::ceil(6.0 * sigma));

  RngStream rng(12345);
  const std::size_t N = 200000;
  std::vector<std::size_t> hist(2 * bound6 + 1, 0);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    long v = sampler.draw(rng);
    REQUIRE(v >= -bound6);
    REQUIRE(v <= bound6);
    ++hist[static_cast<std::size_t>(v + bound6)];
    sum += static_cast<double>(v);
    sumsq += static_cast<double>(v) * static_cast<double>(v);
  }

  double mass = 0.0;
  for (long k = -bound6; k <= bound6; ++k) mass += oracles::gauss_cell(sigma, k);
  double chi2 = 0.0;
  int cells = 0;
  for (long k = -bound6; k <= bound6; ++k) {
    double expect = static_cast<double>(N) * oracles::gauss_cell(sigma, k) / mass;
    if (expect < 5.0) continue;
    double obs = static_cast<double>(hist[static_cast<std::size_t>(k + bound6)]);
    chi2 += (obs - expect) * (obs - expect) / expect;
    ++cells;
  }
  CHECK(cells >= 25);
  CHECK(chi2 < 90.0);

  oracles::TruncatedMoments m = oracles::truncated_gauss_moments(sigma, bound6);
  CHECK(std::abs(sum / N - m.mean) < 0.04);
  CHECK(std::abs(sumsq / N - sum / N * sum / N - m.variance) < 0.2);
}

TEST_CASE("hard truncation redraws outside ceil(2 sigma) exactly") {
  IntegerGaussianSampler s1(1.0);
  CHECK(s1.truncation_bound() == 2);
  CHECK(IntegerGaussianSampler(0.3).truncation_bound() == 1);
  CHECK(IntegerGaussianSampler(3.0).truncation_bound() == 6);
  CHECK(IntegerGaussianSampler(2.5).truncation_bound() == 5);

  RngStream rng(777);
  bool saw_lo = false, saw_hi = false;
  double sum = 0.0, sumsq = 0.0;
  const std::size_t N = 50000;
  for (std::size_t i = 0; i < N; ++i) {
    long v = s1.draw_truncated(rng);
    REQUIRE(v >= -2);
    REQUIRE(v <= 2);
    saw_lo = saw_lo || v == -2;
    saw_hi = saw_hi || v == 2;
    sum += static_cast<double>(v);
    sumsq += static_cast<double>(v) * static_cast<double>(v);
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  oracles::TruncatedMoments m = oracles::truncated_gauss_moments(1.0, 2);
  CHECK(std::abs(sum / N - m.mean) < 0.02);
  CHECK(std::abs(sumsq / N - m.variance) < 0.03);

  CHECK_THROWS_AS(IntegerGaussianSampler(0.0), std::invalid_argument);
  CHECK_THROWS_AS(IntegerGaussianSampler(-1.0), std::invalid_argument);
}

TEST_CASE("draws are deterministic in the stream seed") {
  IntegerGaussianSampler sampler(2.0);
  std::vector<long> first, second, other;
  RngStream a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    first.push_back(sampler.draw(a));
    second.push_back(sampler.draw(b));
    other.push_back(sampler.draw(c));
  }
  CHECK(first == second);
  CHECK(first != other);
}

TEST_CASE("sample_coeff_gaussian respects degree and the truncation bound") {
  GaussianSpec spec = GaussianSpec::from_sigma(3.0);
  RngStream rng(9);
  for (int t = 0; t < 20; ++t) {
    IntPolynomial p = sample_coeff_gaussian(spec, 16, rng);
    CHECK(p.degree() < 16);
    for (int i = 0; i <= p.degree(); ++i) {
      CHECK(p[i] <= 6);
      CHECK(p[i] >= -6);
    }
  }
  GaussianSpec warn = GaussianSpec::from_sigma(3.0, Truncation::norm_warn_only);
  CHECK_THROWS_AS(sample_coeff_gaussian(warn, 4, rng), std::invalid_argument);
}

TEST_CASE("sample_uniform_poly is uniform over [0, q)") {
  PrimeModulus q = PrimeModulus::make(BigInt(17));
  RngStream rng(31);
  std::vector<std::size_t> hist(17, 0);
  const std::size_t draws = 2000;
  for (std::size_t t = 0; t < draws; ++t) {
    IntPolynomial p = sample_uniform_poly(q, 10, rng);
    CHECK(p.degree() < 10);
    std::vector<BigInt> c(10, BigInt(0));
    for (int i = 0; i <= p.degree(); ++i) c[static_cast<std::size_t>(i)] = p[i];
    for (const BigInt& v : c) {
      REQUIRE(v >= 0);
      REQUIRE(v < 17);
      ++hist[v.convert_to<std::size_t>()];
    }
  }
  double expect = static_cast<double>(draws * 10) / 17.0;
  double chi2 = 0.0;
  for (std::size_t n : hist) chi2 += (n - expect) * (n - expect) / expect;
  CHECK(chi2 < 50.0);
}

TEST_CASE("gen_polylwe_samples satisfies b = a*s + e with bounded error") {
  IntPolynomial f = x4_plus_256();
  PrimeModulus q = PrimeModulus::make(BigInt(257));
  std::uint64_t qu = 257;
  GaussianSpec spec = GaussianSpec::from_sigma(3.0);
  IntPolynomial secret({12, 200, 7, 91});

  LweSampleSet set = gen_polylwe_samples(f, q, spec, secret, 20, 5150);
  CHECK(set.variant == Variant::polylwe_coefficient);
  CHECK(set.n == 4);
  CHECK(set.count() == 20);
  CHECK(set.secret_commitment == commit_secret({12, 200, 7, 91}, Variant::polylwe_coefficient));

  ring::ZqPoly fq = ring::zq_reduce(f, qu);
  ring::ZqPoly s_poly = trimmed({12, 200, 7, 91});
  bool nonzero_error = false;
  for (const PolyPair& p : set.poly_samples) {
    REQUIRE(p.a.size() == 4);
    REQUIRE(p.b.size() == 4);
    ring::ZqPoly prod = ring::zq_mulmod(trimmed(p.a), s_poly, fq, qu);
    prod.resize(4, 0);
    for (int i = 0; i < 4; ++i) {
      CHECK(p.a[i] < qu);
      CHECK(p.b[i] < qu);
      long e = balanced(ring::submod_u64(p.b[i], prod[i], qu), qu);
      CHECK(e <= 6);
      CHECK(e >= -6);
      nonzero_error = nonzero_error || e != 0;
    }
  }
  CHECK(nonzero_error);

  CHECK(gen_polylwe_samples(f, q, spec, secret, 20, 5150).to_jsonl() == set.to_jsonl());
  CHECK(gen_polylwe_samples(f, q, spec, secret, 20, 5151).to_jsonl() != set.to_jsonl());

  CHECK_THROWS_AS(gen_polylwe_samples(f, q, spec, IntPolynomial({1, 0, 0, 0, 1}), 4, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_polylwe_samples(f, q, spec, IntPolynomial({300}), 4, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_polylwe_samples(f, q, spec, IntPolynomial({-1}), 4, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_polylwe_samples(IntPolynomial({1, 0, 2}), q, spec, secret, 4, 0),
                  std::invalid_argument);
}

TEST_CASE("gen_ringlwe_samples embeds exactly recoverable coordinates") {
  IntPolynomial f = x4_plus_256();
  PrimeModulus q = PrimeModulus::make(BigInt(257));
  std::uint64_t qu = 257;
  embedding::EmbeddingData emb = embedding::build_embedding(f, 128);
  GaussianSpec spec = GaussianSpec::from_sigma(3.0, Truncation::norm_warn_only);
  spec.sigma_prime = 8.0;
  std::vector<std::uint64_t> secret = {5, 100, 200, 33};
  const std::uint64_t seed = 404;

  LweSampleSet set = gen_ringlwe_samples(emb, q, spec, secret, 6, seed);
  CHECK(set.variant == Variant::ringlwe_embedded);
  CHECK(set.precision_bits == 128);
  CHECK(set.count() == 6);
  CHECK(set.secret_commitment == commit_secret(secret, Variant::ringlwe_embedded));

  ring::ZqPoly fq = ring::zq_reduce(f, qu);
  ring::ZqPoly s_poly = trimmed(secret);
  bool nonzero_error = false;
  for (std::size_t idx = 0; idx < 6; ++idx) {
    const EmbPair& p = set.emb_samples[idx];
    std::vector<BigInt> ak = embedding::lattice_coordinates(p.a, emb);
    std::vector<BigInt> bk = embedding::lattice_coordinates(p.b, emb);
    std::vector<std::uint64_t> a_coords(4), b_coords(4);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(ak[static_cast<std::size_t>(i)] >= 0);
      REQUIRE(ak[static_cast<std::size_t>(i)] < 257);
      REQUIRE(bk[static_cast<std::size_t>(i)] >= 0);
      REQUIRE(bk[static_cast<std::size_t>(i)] < 257);
      a_coords[static_cast<std::size_t>(i)] = ak[static_cast<std::size_t>(i)].convert_to<std::uint64_t>();
      b_coords[static_cast<std::size_t>(i)] = bk[static_cast<std::size_t>(i)].convert_to<std::uint64_t>();
    }

    // Replay the per-sample stream: n uniform draws for a, then the lattice
    // Gaussian, and compare against b - a*s mod q.
    RngStream st(derive_seed(seed, idx));
    for (int i = 0; i < 4; ++i) CHECK(st.uniform_u64(qu) == a_coords[static_cast<std::size_t>(i)]);
    std::vector<BigInt> k = detail::lattice_gaussian_coords(emb, spec, st);
    ring::ZqPoly prod = ring::zq_mulmod(trimmed(a_coords), s_poly, fq, qu);
    prod.resize(4, 0);
    for (int i = 0; i < 4; ++i) {
      BigInt km = k[static_cast<std::size_t>(i)] % qu;
      if (km < 0) km += qu;
      CHECK(ring::submod_u64(b_coords[static_cast<std::size_t>(i)], prod[i], qu) ==
            km.convert_to<std::uint64_t>());
      nonzero_error = nonzero_error || km != 0;
    }
  }
  CHECK(nonzero_error);

  GaussianSpec noprime = GaussianSpec::from_sigma(3.0, Truncation::norm_warn_only);
  CHECK_THROWS_AS(gen_ringlwe_samples(emb, q, noprime, secret, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_ringlwe_samples(emb, q, spec, {1, 2, 3}, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_ringlwe_samples(emb, q, spec, {1, 2, 3, 257}, 2, 0), std::invalid_argument);
}

TEST_CASE("lattice Gaussian draws are Babai round-offs of M k") {
  IntPolynomial f({2, 0, 1});
  embedding::EmbeddingData emb = embedding::build_embedding(f, 128);
  GaussianSpec spec = GaussianSpec::from_sigma(4.0, Truncation::norm_warn_only);

  for (std::uint64_t s = 0; s < 5; ++s) {
    RngStream r1(derive_seed(99, s)), r2(derive_seed(99, s));
    std::vector<BigInt> k = detail::lattice_gaussian_coords(emb, spec, r1);
    std::vector<Real> v = sample_lattice_gaussian(emb, spec, r2);
    REQUIRE(k.size() == 2);
    std::vector<BigInt> back = embedding::lattice_coordinates(v, emb);
    CHECK(back == k);
  }

  embedding::EmbeddingData id = embedding::identity_embedding(x4_plus_256(), 64);
  RngStream r(5);
  std::vector<Real> v = sample_lattice_gaussian(id, spec, r);
  for (const Real& x : v) CHECK(x == mp::round(x));
}

TEST_CASE("jsonl round trip preserves every field") {
  IntPolynomial f = x4_plus_256();
  PrimeModulus q = PrimeModulus::make(BigInt(257));
  GaussianSpec spec = GaussianSpec::from_sigma(3.0);
  LweSampleSet set = gen_polylwe_samples(f, q, spec, IntPolynomial({1}), 5, 88);

  std::string text = set.to_jsonl();
  LweSampleSet back = LweSampleSet::from_jsonl(text);
  CHECK(back.variant == set.variant);
  CHECK(back.modulus.q == set.modulus.q);
  CHECK(back.n == set.n);
  CHECK(back.seed == set.seed);
  CHECK(back.secret_commitment == set.secret_commitment);
  CHECK(back.gaussian.sigma == set.gaussian.sigma);
  CHECK(back.gaussian.width_w == set.gaussian.width_w);
  CHECK(back.gaussian.truncation == set.gaussian.truncation);
  CHECK(!back.gaussian.sigma_prime);
  REQUIRE(back.poly_samples.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.poly_samples[i].a == set.poly_samples[i].a);
    CHECK(back.poly_samples[i].b == set.poly_samples[i].b);
  }
  CHECK(back.to_jsonl() == text);

  embedding::EmbeddingData emb = embedding::build_embedding(f, 128);
  GaussianSpec rspec = GaussianSpec::from_sigma(3.0, Truncation::norm_warn_only);
  rspec.sigma_prime = 8.0;
  LweSampleSet rset = gen_ringlwe_samples(emb, q, rspec, {1, 2, 3, 4}, 3, 77);
  std::string rtext = rset.to_jsonl();
  LweSampleSet rback = LweSampleSet::from_jsonl(rtext);
  CHECK(rback.variant == Variant::ringlwe_embedded);
  CHECK(rback.precision_bits == 128);
  REQUIRE(rback.gaussian.sigma_prime.has_value());
  CHECK(*rback.gaussian.sigma_prime == 8.0);
  REQUIRE(rback.emb_samples.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(real_to_hex(rback.emb_samples[i].a[static_cast<std::size_t>(j)]) ==
            real_to_hex(rset.emb_samples[i].a[static_cast<std::size_t>(j)]));
      CHECK(real_to_hex(rback.emb_samples[i].b[static_cast<std::size_t>(j)]) ==
            real_to_hex(rset.emb_samples[i].b[static_cast<std::size_t>(j)]));
    }
  CHECK(rback.to_jsonl() == rtext);
}

TEST_CASE("malformed sample text is rejected with SchemaViolation") {
  auto expect_schema = [](const std::string& text) {
    try {
      LweSampleSet::from_jsonl(text);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == Err::SchemaViolation);
    }
  };

  expect_schema("");
  expect_schema("{\"kind\":\"something_else\"}\n");
  expect_schema("not json\n");

  IntPolynomial f = x4_plus_256();
  PrimeModulus q = PrimeModulus::make(BigInt(257));
  GaussianSpec spec = GaussianSpec::from_sigma(3.0);
  LweSampleSet set = gen_polylwe_samples(f, q, spec, IntPolynomial({1}), 2, 1);
  std::string good = set.to_jsonl();

  std::string bad_variant = good;
  bad_variant.replace(bad_variant.find("polylwe_coefficient"), 19, "coefficient_polylwe");
  expect_schema(bad_variant);

  // Drop one sample line: header count no longer matches.
  std::string short_text = good.substr(0, good.find('\n', good.find('\n') + 1) + 1);
  expect_schema(short_text);

  std::size_t line2 = good.find('\n') + 1;
  std::string tampered = good.substr(0, line2) + "{\"a\":[\"1\",\"2\",\"3\",\"999\"],\"b\":[\"0\",\"0\",\"0\",\"0\"]}\n" +
                         good.substr(good.find('\n', line2) + 1);
  expect_schema(tampered);

  std::string numeric = good.substr(0, line2) + "{\"a\":[1,2,3,4],\"b\":[\"0\",\"0\",\"0\",\"0\"]}\n" +
                        good.substr(good.find('\n', line2) + 1);
  expect_schema(numeric);

  std::string wrong_len = good.substr(0, line2) + "{\"a\":[\"1\",\"2\"],\"b\":[\"0\",\"0\"]}\n" +
                          good.substr(good.find('\n', line2) + 1);
  expect_schema(wrong_len);
}

TEST_CASE("error_norm_stats normalizes by sqrt(n) sigma sqrt(2 pi)") {
  embedding::EmbeddingData id = embedding::identity_embedding(x4_plus_256(), 64);
  GaussianSpec spec = GaussianSpec::from_sigma(1.0, Truncation::norm_warn_only);
  ErrorNormReport rep = error_norm_stats(100, id, spec, 7);
  CHECK(rep.mean_ratio > 0.30);
  CHECK(rep.mean_ratio < 0.45);
  CHECK(rep.max_ratio >= rep.mean_ratio);
  CHECK(rep.norm_warning == (rep.max_ratio > 1.0));
  CHECK(error_norm_stats(100, id, spec, 7).mean_ratio == rep.mean_ratio);
  CHECK_THROWS_AS(error_norm_stats(0, id, spec), std::invalid_argument);
}

TEST_CASE("commit_secret separates variants and values") {
  std::string a = commit_secret({1, 2}, Variant::polylwe_coefficient);
  CHECK(a.size() == 64);
  CHECK(a.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(a != commit_secret({1, 2}, Variant::ringlwe_embedded));
  CHECK(a != commit_secret({1, 3}, Variant::polylwe_coefficient));
  CHECK(a != commit_secret({12}, Variant::polylwe_coefficient));
  CHECK(a == commit_secret({1, 2}, Variant::polylwe_coefficient));
}
