#include "weakring/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "weakring/errors.hpp"
#include "weakring/modpoly.hpp"
#include "weakring/util.hpp"

namespace weakring::sampling {

using json = nlohmann::json;
using ring::IntPolynomial;
using ring::PrimeModulus;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

struct BoxMuller {
  bool have = false;
  double spare = 0.0;
  double operator()(RngStream& rng) {
    if (have) {
      have = false;
      return spare;
    }
    double u1 = (static_cast<double>(rng.next_u64() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
    double u2 = static_cast<double>(rng.next_u64() >> 11) * 0x1p-53;          // [0, 1)
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare = r * std::sin(t);
    have = true;
    return r * std::cos(t);
  }
};

}  // namespace

GaussianSpec GaussianSpec::from_sigma(double sigma, Truncation t) {
  GaussianSpec s;
  s.sigma = sigma;
  s.width_w = kSqrt2Pi * sigma;
  s.truncation = t;
  s.validate();
  return s;
}

GaussianSpec GaussianSpec::from_width(double w, Truncation t) {
  GaussianSpec s;
  s.sigma = w / kSqrt2Pi;
  s.width_w = w;
  s.truncation = t;
  s.validate();
  return s;
}

void GaussianSpec::validate() const {
  if (!(sigma > 0))
    throw Error(Err::SchemaViolation, "gaussian.sigma must be positive");
  if (std::abs(width_w - kSqrt2Pi * sigma) > 1e-12 * width_w)
    throw Error(Err::SchemaViolation, "gaussian.width_w does not equal sqrt(2*pi)*sigma");
  if (sigma_prime && !(*sigma_prime > 0))
    throw Error(Err::SchemaViolation, "gaussian.sigma_prime must be positive");
}

IntegerGaussianSampler::IntegerGaussianSampler(double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
  bound6_ = static_cast<long>(std::ceil(6.0 * sigma));
  bound2_ = static_cast<long>(std::ceil(2.0 * sigma));
  double denom = sigma * std::sqrt(2.0);
  cdf_.reserve(2 * bound6_ + 1);
  double acc = 0.0;
  for (long k = -bound6_; k <= bound6_; ++k) {
    double hi = 0.5 * std::erf((static_cast<double>(k) + 0.5) / denom);
    double lo = 0.5 * std::erf((static_cast<double>(k) - 0.5) / denom);
    acc += hi - lo;
    cdf_.push_back(acc);
  }
  double total = cdf_.back();
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

long IntegerGaussianSampler::draw(RngStream& rng) const {
  double u = rng.uniform_double();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<long>(it - cdf_.begin()) - bound6_;
}

long IntegerGaussianSampler::draw_truncated(RngStream& rng) const {
  for (;;) {
    long v = draw(rng);
    if (v <= bound2_ && v >= -bound2_) return v;
  }
}

IntPolynomial sample_coeff_gaussian(const GaussianSpec& spec, int n, RngStream& rng) {
  if (spec.truncation != Truncation::hard_2sigma)
    throw std::invalid_argument("coefficient sampling requires hard_2sigma truncation");
  IntegerGaussianSampler sampler(spec.sigma);
  std::vector<BigInt> coeffs(n);
  for (int i = 0; i < n; ++i) coeffs[i] = sampler.draw_truncated(rng);
  return IntPolynomial(coeffs);
}

IntPolynomial sample_uniform_poly(const PrimeModulus& q, int n, RngStream& rng) {
  std::vector<BigInt> coeffs(n);
  if (q.fits_u64()) {
    std::uint64_t qu = q.as_u64();
    for (int i = 0; i < n; ++i) coeffs[i] = rng.uniform_u64(qu);
  } else {
    for (int i = 0; i < n; ++i) coeffs[i] = rng.uniform_bigint(q.q);
  }
  return IntPolynomial(coeffs);
}

namespace detail {

std::vector<BigInt> lattice_gaussian_coords(const embedding::EmbeddingData& emb,
                                            const GaussianSpec& spec, RngStream& rng) {
  int n = emb.n();
  double sigma = spec.effective_sigma();
  PrecisionGuard guard(emb.precision_bits + 32);
  BoxMuller bm;
  embedding::RealVector x(n);
  for (int i = 0; i < n; ++i) x(i) = Real(bm(rng) * sigma);

  embedding::RealVector c = emb.M_inv * x;
  embedding::RealVector back = emb.M * c;
  Real tol = mp::ldexp(Real(1), -static_cast<int>(emb.precision_bits / 2));
  if ((back - x).norm() > tol * x.norm())
    throw Error(Err::PrecisionInsufficient, "embedding round-trip error exceeds 2^(-precision/2)");

  std::vector<BigInt> k(n);
  for (int i = 0; i < n; ++i) k[i] = mp::round(c(i)).convert_to<BigInt>();
  return k;
}

}  // namespace detail

std::vector<Real> sample_lattice_gaussian(const embedding::EmbeddingData& emb,
                                          const GaussianSpec& spec, RngStream& rng) {
  std::vector<BigInt> k = detail::lattice_gaussian_coords(emb, spec, rng);
  int n = emb.n();
  PrecisionGuard guard(emb.precision_bits + 32);
  embedding::RealVector kv(n);
  for (int i = 0; i < n; ++i) kv(i) = Real(k[i]);
  embedding::RealVector v = emb.M * kv;
  std::vector<Real> out(n);
  for (int i = 0; i < n; ++i) out[i] = v(i);
  return out;
}

std::string commit_secret(const std::vector<std::uint64_t>& values, Variant variant) {
  std::ostringstream os;
  os << (variant == Variant::polylwe_coefficient ? "polylwe-secret:" : "ringlwe-secret:");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ",";
    os << values[i];
  }
  return sha256_hex(os.str());
}

namespace {

std::vector<std::uint64_t> poly_to_residues(const IntPolynomial& p, int n, std::uint64_t q) {
  std::vector<std::uint64_t> v(n, 0);
  for (int i = 0; i <= p.degree() && i < n; ++i) {
    BigInt c = p[i] % q;
    if (c < 0) c += q;
    v[i] = static_cast<std::uint64_t>(c);
  }
  return v;
}

ring::ZqPoly trimmed(const std::vector<std::uint64_t>& v) {
  ring::ZqPoly p = v;
  ring::zq_trim(p);
  return p;
}

}  // namespace

LweSampleSet gen_polylwe_samples(const IntPolynomial& f, const PrimeModulus& q,
                                 const GaussianSpec& spec, const IntPolynomial& secret,
                                 std::size_t ell, std::uint64_t seed) {
  spec.validate();
  if (!f.is_monic()) throw std::invalid_argument("f must be monic");
  if (!q.fits_u64()) throw std::invalid_argument("sample generation supports moduli below 2^64");
  int n = f.degree();
  if (secret.degree() >= n) throw std::invalid_argument("secret degree must be below deg f");
  std::uint64_t qu = q.as_u64();
  for (int i = 0; i <= secret.degree(); ++i)
    if (secret[i] < 0 || secret[i] >= q.q)
      throw std::invalid_argument("secret coefficients must lie in [0, q)");

  ring::ZqPoly fq = ring::zq_reduce(f, qu);
  std::vector<std::uint64_t> s_vec = poly_to_residues(secret, n, qu);
  ring::ZqPoly s_poly = trimmed(s_vec);
  IntegerGaussianSampler sampler(spec.sigma);

  LweSampleSet set;
  set.variant = Variant::polylwe_coefficient;
  set.modulus = q;
  set.n = n;
  set.gaussian = spec;
  set.seed = seed;
  set.secret_commitment = commit_secret(s_vec, set.variant);
  set.poly_samples.reserve(ell);

  for (std::size_t idx = 0; idx < ell; ++idx) {
    RngStream st(derive_seed(seed, idx));
    PolyPair pair;
    pair.a.resize(n);
    for (int i = 0; i < n; ++i) pair.a[i] = st.uniform_u64(qu);
    std::vector<long> e(n);
    for (int i = 0; i < n; ++i) e[i] = sampler.draw_truncated(st);
    ring::ZqPoly prod = ring::zq_mulmod(trimmed(pair.a), s_poly, fq, qu);
    prod.resize(n, 0);
    pair.b.resize(n);
    for (int i = 0; i < n; ++i) {
      std::uint64_t ei = e[i] >= 0 ? static_cast<std::uint64_t>(e[i]) % qu
                                   : qu - static_cast<std::uint64_t>(-e[i]) % qu;
      pair.b[i] = ring::addmod_u64(prod[i], ei % qu, qu);
    }
    set.poly_samples.push_back(std::move(pair));
  }
  return set;
}

LweSampleSet gen_ringlwe_samples(const embedding::EmbeddingData& emb, const PrimeModulus& q,
                                 const GaussianSpec& spec,
                                 const std::vector<std::uint64_t>& secret_coords, std::size_t ell,
                                 std::uint64_t seed) {
  spec.validate();
  if (!spec.sigma_prime)
    throw std::invalid_argument("ring-lwe generation requires spec.sigma_prime");
  if (!q.fits_u64()) throw std::invalid_argument("sample generation supports moduli below 2^64");
  int n = emb.n();
  if (static_cast<int>(secret_coords.size()) != n)
    throw std::invalid_argument("secret coordinate count must equal deg f");
  std::uint64_t qu = q.as_u64();
  for (std::uint64_t c : secret_coords)
    if (c >= qu) throw std::invalid_argument("secret coordinates must lie in [0, q)");

  ring::ZqPoly fq = ring::zq_reduce(emb.f, qu);
  ring::ZqPoly s_poly = trimmed(secret_coords);

  LweSampleSet set;
  set.variant = Variant::ringlwe_embedded;
  set.modulus = q;
  set.n = n;
  set.gaussian = spec;
  set.seed = seed;
  set.precision_bits = emb.precision_bits;
  set.secret_commitment = commit_secret(secret_coords, set.variant);
  set.emb_samples.reserve(ell);

  PrecisionGuard guard(emb.precision_bits + 32);
  auto embed = [&](const std::vector<std::uint64_t>& coords) {
    embedding::RealVector cv(n);
    for (int i = 0; i < n; ++i) cv(i) = Real(coords[i]);
    embedding::RealVector v = emb.M * cv;
    std::vector<Real> out(n);
    for (int i = 0; i < n; ++i) out[i] = v(i);
    return out;
  };

  for (std::size_t idx = 0; idx < ell; ++idx) {
    RngStream st(derive_seed(seed, idx));
    std::vector<std::uint64_t> a_coords(n);
    for (int i = 0; i < n; ++i) a_coords[i] = st.uniform_u64(qu);
    std::vector<BigInt> k = detail::lattice_gaussian_coords(emb, spec, st);
    ring::ZqPoly prod = ring::zq_mulmod(trimmed(a_coords), s_poly, fq, qu);
    prod.resize(n, 0);
    std::vector<std::uint64_t> b_coords(n);
    for (int i = 0; i < n; ++i) {
      BigInt km = k[i] % qu;
      if (km < 0) km += qu;
      b_coords[i] = ring::addmod_u64(prod[i], static_cast<std::uint64_t>(km), qu);
    }
    EmbPair pair;
    pair.a = embed(a_coords);
    pair.b = embed(b_coords);
    set.emb_samples.push_back(std::move(pair));
  }
  return set;
}

ErrorNormReport error_norm_stats(std::size_t draws, const embedding::EmbeddingData& emb,
                                 const GaussianSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (draws < 1) throw std::invalid_argument("draws must be at least 1");
  int n = emb.n();
  PrecisionGuard guard(emb.precision_bits + 32);
  Real denom = sqrt(Real(n)) * Real(spec.effective_sigma()) * sqrt(Real(2) * pi_real());
  Real sum(0), maxr(0);
  for (std::size_t t = 0; t < draws; ++t) {
    RngStream st(derive_seed(seed, t, 0xE5));
    std::vector<Real> v = sample_lattice_gaussian(emb, spec, st);
    Real norm2(0);
    for (int i = 0; i < n; ++i) norm2 += v[i] * v[i];
    Real ratio = sqrt(norm2) / denom;
    sum += ratio;
    if (ratio > maxr) maxr = ratio;
  }
  ErrorNormReport rep;
  rep.mean_ratio = (sum / Real(draws)).convert_to<double>();
  rep.max_ratio = maxr.convert_to<double>();
  rep.norm_warning = rep.max_ratio > 1.0;
  return rep;
}

// ---- serialization ----

namespace {

const char* variant_name(Variant v) {
  return v == Variant::polylwe_coefficient ? "polylwe_coefficient" : "ringlwe_embedded";
}

Variant variant_from(const std::string& s) {
  if (s == "polylwe_coefficient") return Variant::polylwe_coefficient;
  if (s == "ringlwe_embedded") return Variant::ringlwe_embedded;
  throw Error(Err::SchemaViolation, "unknown sample set variant: " + s);
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Err::SchemaViolation, std::string(what) + " is not a decimal integer: " + s);
  }
}

const char* truncation_name(Truncation t) {
  return t == Truncation::hard_2sigma ? "hard_2sigma" : "norm_warn_only";
}

Truncation truncation_from(const std::string& s) {
  if (s == "hard_2sigma") return Truncation::hard_2sigma;
  if (s == "norm_warn_only") return Truncation::norm_warn_only;
  throw Error(Err::SchemaViolation, "unknown truncation mode: " + s);
}

json residues_to_json(const std::vector<std::uint64_t>& v) {
  json arr = json::array();
  for (std::uint64_t x : v) arr.push_back(std::to_string(x));
  return arr;
}

std::vector<std::uint64_t> residues_from_json(const json& arr) {
  if (!arr.is_array()) throw Error(Err::SchemaViolation, "sample vector must be an array");
  std::vector<std::uint64_t> v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_string()) throw Error(Err::SchemaViolation, "residues must be decimal strings");
    v.push_back(parse_u64(x.get<std::string>(), "residue"));
  }
  return v;
}

json reals_to_json(const std::vector<Real>& v) {
  json arr = json::array();
  for (const Real& x : v) arr.push_back(real_to_hex(x));
  return arr;
}

std::vector<Real> reals_from_json(const json& arr, unsigned bits) {
  if (!arr.is_array()) throw Error(Err::SchemaViolation, "sample vector must be an array");
  std::vector<Real> v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_string()) throw Error(Err::SchemaViolation, "reals must be hex-float strings");
    v.push_back(real_from_hex(x.get<std::string>(), bits));
  }
  return v;
}

}  // namespace

std::string LweSampleSet::to_jsonl() const {
  json hdr;
  hdr["kind"] = "lwe_sample_set";
  hdr["variant"] = variant_name(variant);
  hdr["q"] = modulus.q.str();
  hdr["n"] = n;
  hdr["count"] = count();
  hdr["seed"] = std::to_string(seed);
  hdr["secret_commitment"] = secret_commitment;
  json g;
  g["sigma"] = gaussian.sigma;
  g["width_w"] = gaussian.width_w;
  if (gaussian.sigma_prime)
    g["sigma_prime"] = *gaussian.sigma_prime;
  else
    g["sigma_prime"] = nullptr;
  g["truncation"] = truncation_name(gaussian.truncation);
  hdr["gaussian"] = g;
  if (variant == Variant::ringlwe_embedded) hdr["precision_bits"] = precision_bits;

  std::ostringstream os;
  os << hdr.dump() << "\n";
  if (variant == Variant::polylwe_coefficient) {
    for (const PolyPair& p : poly_samples) {
      json line;
      line["a"] = residues_to_json(p.a);
      line["b"] = residues_to_json(p.b);
      os << line.dump() << "\n";
    }
  } else {
    for (const EmbPair& p : emb_samples) {
      json line;
      line["a"] = reals_to_json(p.a);
      line["b"] = reals_to_json(p.b);
      os << line.dump() << "\n";
    }
  }
  return os.str();
}

LweSampleSet LweSampleSet::from_jsonl(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(Err::SchemaViolation, "empty sample set");
  json hdr = json::parse(line, nullptr, false);
  if (hdr.is_discarded() || !hdr.is_object())
    throw Error(Err::SchemaViolation, "sample set header is not a JSON object");
  if (hdr.value("kind", "") != std::string("lwe_sample_set"))
    throw Error(Err::SchemaViolation, "header.kind must be lwe_sample_set");

  LweSampleSet set;
  try {
    set.variant = variant_from(hdr.at("variant").get<std::string>());
    set.modulus = ring::PrimeModulus::make(BigInt(hdr.at("q").get<std::string>()));
    set.n = hdr.at("n").get<int>();
    set.seed = parse_u64(hdr.at("seed").get<std::string>(), "seed");
    set.secret_commitment = hdr.at("secret_commitment").get<std::string>();
    const json& g = hdr.at("gaussian");
    set.gaussian.sigma = g.at("sigma").get<double>();
    set.gaussian.width_w = g.at("width_w").get<double>();
    if (!g.at("sigma_prime").is_null()) set.gaussian.sigma_prime = g.at("sigma_prime").get<double>();
    set.gaussian.truncation = truncation_from(g.at("truncation").get<std::string>());
    if (set.variant == Variant::ringlwe_embedded)
      set.precision_bits = hdr.at("precision_bits").get<unsigned>();
  } catch (const json::exception& e) {
    throw Error(Err::SchemaViolation, std::string("sample set header: ") + e.what());
  }
  set.gaussian.validate();

  std::size_t declared;
  try {
    declared = hdr.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(Err::SchemaViolation, std::string("sample set header: ") + e.what());
  }
  unsigned pb = set.precision_bits + 32;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json s = json::parse(line, nullptr, false);
    if (s.is_discarded() || !s.is_object())
      throw Error(Err::SchemaViolation, "sample line is not a JSON object");
    try {
      if (set.variant == Variant::polylwe_coefficient) {
        PolyPair p{residues_from_json(s.at("a")), residues_from_json(s.at("b"))};
        if (static_cast<int>(p.a.size()) != set.n || static_cast<int>(p.b.size()) != set.n)
          throw Error(Err::SchemaViolation, "sample vector length does not match n");
        for (std::uint64_t x : p.a)
          if (BigInt(x) >= set.modulus.q)
            throw Error(Err::SchemaViolation, "sample residue out of range");
        for (std::uint64_t x : p.b)
          if (BigInt(x) >= set.modulus.q)
            throw Error(Err::SchemaViolation, "sample residue out of range");
        set.poly_samples.push_back(std::move(p));
      } else {
        EmbPair p{reals_from_json(s.at("a"), pb), reals_from_json(s.at("b"), pb)};
        if (static_cast<int>(p.a.size()) != set.n || static_cast<int>(p.b.size()) != set.n)
          throw Error(Err::SchemaViolation, "sample vector length does not match n");
        set.emb_samples.push_back(std::move(p));
      }
    } catch (const json::exception& e) {
      throw Error(Err::SchemaViolation, std::string("sample line: ") + e.what());
    }
  }
  if (set.count() != declared)
    throw Error(Err::SchemaViolation, "header count does not match number of sample lines");
  return set;
}

}  // namespace weakring::sampling
