#include "weakring/embedding.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "weakring/croots.hpp"
#include "weakring/errors.hpp"
#include "weakring/util.hpp"

namespace weakring::embedding {

using ring::IntPolynomial;
using ring::PrimeModulus;

OrderedRoots complex_roots(const IntPolynomial& f, unsigned precision_bits) {
  auto est = detail::aberth_roots(f, precision_bits);
  PrecisionGuard guard(precision_bits + 32);
  Real tol = mp::ldexp(Real(1), -static_cast<int>(precision_bits / 2));

  std::vector<CNum> reals, pos, neg;
  for (const CNum& z : est.roots) {
    if (abs(z.im) < tol)
      reals.push_back(CNum(z.re, Real(0)));
    else if (z.im > 0)
      pos.push_back(z);
    else
      neg.push_back(z);
  }
  if (pos.size() != neg.size() || reals.size() + 2 * pos.size() != est.roots.size())
    throw Error(Err::PrecisionInsufficient, "real/complex classification is inconsistent");
  // Each representative must have a conjugate partner within tolerance.
  std::vector<bool> used(neg.size(), false);
  for (const CNum& z : pos) {
    bool matched = false;
    for (std::size_t k = 0; k < neg.size(); ++k) {
      if (used[k]) continue;
      if (abs(z - neg[k].conj()) < tol * (Real(1) + abs(z))) {
        used[k] = true;
        matched = true;
        break;
      }
    }
    if (!matched)
      throw Error(Err::PrecisionInsufficient, "conjugate pairing tolerance failed");
  }

  std::sort(reals.begin(), reals.end(), [](const CNum& a, const CNum& b) { return a.re < b.re; });
  std::sort(pos.begin(), pos.end(), [](const CNum& a, const CNum& b) {
    if (a.re != b.re) return a.re < b.re;
    return a.im < b.im;
  });

  OrderedRoots out;
  out.r1 = static_cast<int>(reals.size());
  out.r2 = static_cast<int>(pos.size());
  out.roots = std::move(reals);
  out.roots.insert(out.roots.end(), pos.begin(), pos.end());
  out.row_key.assign(out.r1, RowKey::real);
  out.row_key.insert(out.row_key.end(), out.r2, RowKey::complex_re);
  out.row_key.insert(out.row_key.end(), out.r2, RowKey::complex_im);
  return out;
}

EmbeddingData build_embedding(const IntPolynomial& f, unsigned precision_bits) {
  EmbeddingData emb;
  emb.f = f;
  emb.precision_bits = precision_bits;
  emb.roots = complex_roots(f, precision_bits);
  PrecisionGuard guard(precision_bits + 32);

  int n = f.degree(), r1 = emb.roots.r1, r2 = emb.roots.r2;
  emb.M = RealMatrix(n, n);
  // Column i is theta(alpha^i); running powers per root.
  std::vector<CNum> p(r1 + r2, CNum(Real(1), Real(0)));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < r1; ++k) emb.M(k, i) = p[k].re;
    for (int j = 0; j < r2; ++j) {
      emb.M(r1 + j, i) = p[r1 + j].re;
      emb.M(r1 + r2 + j, i) = p[r1 + j].im;
    }
    if (i + 1 < n)
      for (int k = 0; k < r1 + r2; ++k) p[k] *= emb.roots.roots[k];
  }

  Eigen::PartialPivLU<RealMatrix> lu(emb.M);
  emb.M_inv = lu.inverse();
  emb.det_abs = abs(lu.determinant());

  RealMatrix prod = emb.M * emb.M_inv;
  Real tol = mp::ldexp(Real(1), -static_cast<int>(precision_bits / 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Real expect = i == j ? Real(1) : Real(0);
      if (abs(prod(i, j) - expect) >= tol)
        throw Error(Err::PrecisionInsufficient,
                    "M * M_inv deviates from identity beyond 2^(-precision/2)");
    }
  return emb;
}

namespace {

// Largest singular value via power iteration on A^T A, without forming it.
Real spectral_norm(const RealMatrix& A) {
  int n = static_cast<int>(A.rows());
  RealVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Real(1) + Real(i) / Real(8 * n);
  v /= v.norm();
  Real lambda(0);
  const int max_iters = 10000;
  std::vector<Real> trace;
  for (int it = 0; it < max_iters; ++it) {
    RealVector w = A * v;
    RealVector u = A.transpose() * w;
    Real nu = u.norm();
    if (nu == 0) return Real(0);
    Real new_lambda = w.squaredNorm();  // v is unit: v^T A^T A v
    v = u / nu;
    Real diff = abs(new_lambda - lambda);
    lambda = new_lambda;
    if (diff <= Real("1e-10") * lambda) return sqrt(lambda);
    if (it >= max_iters - 4) trace.push_back(lambda);
  }
  std::ostringstream os;
  os << "power iteration did not converge; trailing estimates:";
  for (const Real& t : trace) os << " " << t.str(12);
  throw Error(Err::PowerIterationDiverged, os.str());
}

}  // namespace

SpectralReport spectral_stats(const EmbeddingData& emb, const std::optional<Real>& w,
                              const PrimeModulus* q) {
  PrecisionGuard guard(emb.precision_bits + 32);
  SpectralReport rep;
  rep.rho = spectral_norm(emb.M_inv);
  rep.norm_M = spectral_norm(emb.M);
  rep.condition_number = rep.rho * rep.norm_M;
  rep.rho_prime = rep.rho * pow_real(emb.det_abs, Real(1) / Real(emb.n()));
  if (w && q) {
    rep.tau = tau(emb.n(), q->q, *w, emb.precision_bits);
    Real bound = Real(q->q) / (Real(4) * *w * Real(emb.n()));
    rep.theorem1_bound_met = rep.rho_prime < bound;
  }
  return rep;
}

Real family_rho_prime(unsigned n, const BigInt& q, unsigned precision_bits) {
  PrecisionGuard guard(std::max(precision_bits, 96u));
  unsigned r2 = n % 2 == 0 ? n / 2 : (n - 1) / 2;
  Real qm1(BigInt(q - 1));
  Real expo = Real(1) - Real(1) / Real(n);
  return pow_real(Real(2), -Real(r2) / Real(n)) * sqrt(pow_real(qm1, expo));
}

Real tau(unsigned n, const BigInt& q, const Real& w, unsigned precision_bits) {
  PrecisionGuard guard(std::max(precision_bits, 96u));
  Real qr(q);
  Real qm1(BigInt(q - 1));
  Real expo = Real(1) / Real(2) - Real(1) / Real(2 * n);
  return qr / (Real(2) * sqrt(Real(2)) * w * Real(n) * pow_real(qm1, expo));
}

std::vector<BigInt> lattice_coordinates(const std::vector<Real>& v, const EmbeddingData& emb) {
  int n = emb.n();
  if (static_cast<int>(v.size()) != n)
    throw std::invalid_argument("lattice_coordinates: dimension mismatch");
  PrecisionGuard guard(emb.precision_bits + 32);
  RealVector x(n);
  for (int i = 0; i < n; ++i) x(i) = v[i];
  RealVector c = emb.M_inv * x;
  Real margin = Real(1) / 2 - mp::ldexp(Real(1), -static_cast<int>(emb.precision_bits / 4));
  std::vector<BigInt> k(n);
  for (int i = 0; i < n; ++i) {
    Real r = mp::round(c(i));
    if (abs(c(i) - r) >= margin)
      throw Error(Err::RoundingAmbiguous,
                  "coordinate " + std::to_string(i) + " is too close to a half-integer");
    k[i] = r.convert_to<BigInt>();
  }
  return k;
}

BigInt transport_to_residue(const std::vector<Real>& v, const EmbeddingData& emb,
                            const BigInt& alpha, const PrimeModulus& q) {
  std::vector<BigInt> k = lattice_coordinates(v, emb);
  BigInt acc = 0;
  for (std::size_t i = k.size(); i-- > 0;) {
    acc = (acc * alpha + k[i]) % q.q;
  }
  if (acc < 0) acc += q.q;
  return acc;
}

EmbeddingData identity_embedding(const IntPolynomial& f, unsigned precision_bits) {
  EmbeddingData emb;
  emb.f = f;
  emb.precision_bits = precision_bits;
  int n = f.degree();
  emb.roots.r1 = n;
  emb.roots.r2 = 0;
  emb.roots.roots.assign(n, CNum());
  emb.roots.row_key.assign(n, RowKey::real);
  PrecisionGuard guard(precision_bits + 32);
  emb.M = RealMatrix::Identity(n, n);
  emb.M_inv = RealMatrix::Identity(n, n);
  emb.det_abs = Real(1);
  return emb;
}

// ---- cache ----

namespace {

constexpr char kMagic[4] = {'W', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_str(std::string& s, const std::string& v) {
  put_u32(s, static_cast<std::uint32_t>(v.size()));
  s += v;
}
void put_real(std::string& s, const Real& v) { put_str(s, real_to_hex(v)); }

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  std::uint32_t u32() {
    if (pos + 4 > s.size()) throw Error(Err::IoFailure, "embedding cache truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos++])) << (8 * i);
    return v;
  }
  std::string str() {
    std::uint32_t len = u32();
    if (pos + len > s.size()) throw Error(Err::IoFailure, "embedding cache truncated");
    std::string v = s.substr(pos, len);
    pos += len;
    return v;
  }
};

}  // namespace

std::string embedding_cache_key(const IntPolynomial& f, unsigned precision_bits) {
  return sha256_hex(f.to_json() + ":" + std::to_string(precision_bits)).substr(0, 32);
}

void save_embedding(const EmbeddingData& emb, const std::string& path) {
  std::string s(kMagic, 4);
  put_u32(s, kVersion);
  put_u32(s, emb.precision_bits);
  int n = emb.n();
  put_u32(s, static_cast<std::uint32_t>(n));
  put_u32(s, static_cast<std::uint32_t>(emb.roots.r1));
  put_u32(s, static_cast<std::uint32_t>(emb.roots.r2));
  put_str(s, emb.f.to_json());
  for (const CNum& z : emb.roots.roots) {
    put_real(s, z.re);
    put_real(s, z.im);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) put_real(s, emb.M(i, j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) put_real(s, emb.M_inv(i, j));
  put_real(s, emb.det_abs);
  atomic_write_file(path, s);
}

EmbeddingData load_embedding(const std::string& path) {
  std::string s = read_file(path);
  if (s.size() < 8 || std::memcmp(s.data(), kMagic, 4) != 0)
    throw Error(Err::IoFailure, "not an embedding cache file: " + path);
  Reader rd{s, 4};
  if (rd.u32() != kVersion) throw Error(Err::IoFailure, "unsupported embedding cache version");
  EmbeddingData emb;
  emb.precision_bits = rd.u32();
  int n = static_cast<int>(rd.u32());
  int r1 = static_cast<int>(rd.u32());
  int r2 = static_cast<int>(rd.u32());
  emb.f = IntPolynomial::from_json(rd.str());
  if (emb.f.degree() != n || r1 + 2 * r2 != n)
    throw Error(Err::IoFailure, "embedding cache dimensions are inconsistent");
  unsigned pb = emb.precision_bits + 32;
  emb.roots.r1 = r1;
  emb.roots.r2 = r2;
  emb.roots.roots.resize(r1 + r2);
  for (CNum& z : emb.roots.roots) {
    z.re = real_from_hex(rd.str(), pb);
    z.im = real_from_hex(rd.str(), pb);
  }
  emb.roots.row_key.assign(r1, RowKey::real);
  emb.roots.row_key.insert(emb.roots.row_key.end(), r2, RowKey::complex_re);
  emb.roots.row_key.insert(emb.roots.row_key.end(), r2, RowKey::complex_im);
  PrecisionGuard guard(pb);
  emb.M = RealMatrix(n, n);
  emb.M_inv = RealMatrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) emb.M(i, j) = real_from_hex(rd.str(), pb);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) emb.M_inv(i, j) = real_from_hex(rd.str(), pb);
  emb.det_abs = real_from_hex(rd.str(), pb);
  return emb;
}

EmbeddingData cached_embedding(const IntPolynomial& f, unsigned precision_bits,
                               const std::string& cache_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(cache_dir);
  std::string path = (fs::path(cache_dir) / (embedding_cache_key(f, precision_bits) + ".emb")).string();
  if (fs::exists(path)) {
    try {
      EmbeddingData emb = load_embedding(path);
      if (emb.f == f && emb.precision_bits == precision_bits) return emb;
    } catch (const Error&) {
      // fall through to rebuild
    }
  }
  EmbeddingData emb = build_embedding(f, precision_bits);
  save_embedding(emb, path);
  return emb;
}

}  // namespace weakring::embedding
