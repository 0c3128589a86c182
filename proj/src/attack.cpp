#include "weakring/attack.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "weakring/errors.hpp"
#include "weakring/modpoly.hpp"

namespace weakring::attack {

using json = nlohmann::json;
using ring::PrimeModulus;
using ring::RootInfo;

HistogramModQ histogram_mod_q(const std::vector<std::uint64_t>& values, const PrimeModulus& q) {
  if (!q.fits_u64()) throw std::invalid_argument("histogram requires a 64-bit modulus");
  std::uint64_t qu = q.as_u64();
  HistogramModQ h;
  for (std::uint64_t v : values) {
    if (v >= qu) throw std::invalid_argument("histogram value out of range");
    std::uint64_t idx = static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(v) * 10 / qu);
    ++h.buckets[static_cast<std::size_t>(idx)];
    if (v == 0) ++h.zero_count;
  }
  return h;
}

bool ErrorValueSet::contains(std::uint64_t v) const {
  return std::binary_search(values.begin(), values.end(), v);
}

ErrorValueSet build_error_set(const RootInfo& alpha, double sigma, int n, const PrimeModulus& q,
                              std::uint64_t cardinality_cap) {
  if (!alpha.order_known()) throw std::invalid_argument("error set requires a known root order");
  if (!q.fits_u64()) throw std::invalid_argument("error set requires a 64-bit modulus");
  if (n < 1 || sigma < 0) throw std::invalid_argument("bad error set parameters");
  std::uint64_t qu = q.as_u64();
  std::uint64_t r = alpha.order.convert_to<std::uint64_t>();
  std::uint64_t t = static_cast<std::uint64_t>(std::ceil(2.0 * sigma));
  std::uint64_t max_group = (static_cast<std::uint64_t>(n) + r - 1) / r;

  ErrorValueSet set;
  set.alpha = alpha;
  set.group_bound = t * max_group;

  BigInt estimate = mp::pow(BigInt(2 * set.group_bound + 1), static_cast<unsigned>(r));
  if (estimate > cardinality_cap)
    throw Error(Err::SetTooLarge, "estimated error-set cardinality (2B+1)^r = " + estimate.str() +
                                      " exceeds the cap " + std::to_string(cardinality_cap));

  std::uint64_t ar = static_cast<std::uint64_t>(alpha.root % qu);
  std::size_t dims = static_cast<std::size_t>(std::min<std::uint64_t>(r, n));
  std::vector<std::uint64_t> apow(dims), bound(dims);
  std::uint64_t p = 1;
  for (std::size_t j = 0; j < dims; ++j) {
    apow[j] = p;
    // coefficients with index congruent to j modulo r, below n
    std::uint64_t cnt = (static_cast<std::uint64_t>(n) - j + r - 1) / r;
    bound[j] = t * cnt;
    p = ring::mulmod_u64(p, ar, qu);
  }

  std::vector<std::int64_t> c(dims);
  std::uint64_t value = 0;
  std::vector<std::uint64_t> step(dims), reset(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    c[j] = -static_cast<std::int64_t>(bound[j]);
    std::uint64_t bm = bound[j] % qu;
    value = ring::addmod_u64(value, ring::mulmod_u64(qu - bm == qu ? 0 : qu - bm, apow[j], qu), qu);
    step[j] = apow[j];
    std::uint64_t two_b = (2 * bound[j]) % qu;
    reset[j] = ring::mulmod_u64(two_b == 0 ? 0 : qu - two_b, apow[j], qu);
  }

  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(std::min<BigInt>(estimate, BigInt(1) << 26)
                                           .convert_to<std::uint64_t>()));
  for (;;) {
    out.push_back(value);
    std::size_t j = 0;
    while (j < dims && c[j] == static_cast<std::int64_t>(bound[j])) {
      c[j] = -static_cast<std::int64_t>(bound[j]);
      value = ring::addmod_u64(value, reset[j], qu);
      ++j;
    }
    if (j == dims) break;
    ++c[j];
    value = ring::addmod_u64(value, step[j], qu);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  set.values = std::move(out);
  return set;
}

namespace {

struct LocalAcc {
  std::vector<std::uint64_t> survivors;
  std::uint64_t survivor_count = 0;
  std::size_t longest = 0;
  std::uint64_t at_longest = 0;
  std::vector<std::uint64_t> examples;

  void note(std::uint64_t g, std::size_t chain, std::size_t ell, std::uint64_t cap) {
    if (chain > longest) {
      longest = chain;
      at_longest = 0;
      examples.clear();
    }
    if (chain == longest && longest > 0) {
      ++at_longest;
      if (examples.size() < 32) examples.push_back(g);
    }
    if (chain == ell) {
      ++survivor_count;
      if (survivors.size() < cap) survivors.push_back(g);
    }
  }
};

struct Progress {
  std::ostream* out = nullptr;
  std::uint64_t total = 0;
  std::chrono::steady_clock::time_point start;
  std::atomic<std::uint64_t> done{0};
  std::mutex mu;

  void add(std::uint64_t k) {
    if (!out) return;
    std::uint64_t before = done.fetch_add(k);
    std::uint64_t after = before + k;
    constexpr std::uint64_t kStride = std::uint64_t(1) << 20;
    if (after / kStride == before / kStride || after < kStride) return;
    std::lock_guard<std::mutex> lock(mu);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double frac = static_cast<double>(after) / static_cast<double>(total);
    (*out) << "guesses " << after << "/" << total << " (" << static_cast<int>(100 * frac)
           << "%) eta " << static_cast<long>(secs / frac - secs) << "s\n";
  }
};

template <class Pass>
void scan(std::uint64_t begin, std::uint64_t end, const std::vector<std::uint64_t>* list,
          const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
          std::uint64_t q, const Pass& pass, std::uint64_t cap, LocalAcc& acc) {
  std::size_t ell = a.size();
  for (std::uint64_t idx = begin; idx < end; ++idx) {
    std::uint64_t g = list ? (*list)[idx] : idx;
    std::size_t chain = 0;
    while (chain < ell) {
      std::uint64_t r = ring::submod_u64(b[chain], ring::mulmod_u64(g, a[chain], q), q);
      if (!pass(r)) break;
      ++chain;
    }
    acc.note(g, chain, ell, cap);
  }
}

// Runs the survivor scan over [0, q) or over an explicit candidate list,
// split into fixed chunks merged in order so the result is worker-count
// independent.
template <class Pass>
AttackOutcome run_loop(std::uint64_t q, const std::vector<std::uint64_t>* candidates,
                       const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                       const Pass& pass, const AttackConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t total = candidates ? candidates->size() : q;
  std::uint64_t chunk = std::max<std::uint64_t>(cfg.chunk_size, 1);
  std::uint64_t num_chunks = total == 0 ? 0 : (total - 1) / chunk + 1;
  std::vector<LocalAcc> accs(num_chunks);

  Progress prog;
  prog.out = cfg.progress;
  prog.total = total;
  prog.start = t0;

  auto run_chunk = [&](std::uint64_t ci) {
    std::uint64_t begin = ci * chunk;
    std::uint64_t end = std::min(total, begin + chunk);
    scan(begin, end, candidates, a, b, q, pass, cfg.survivor_cap, accs[ci]);
    prog.add(end - begin);
  };

  int workers = std::max(cfg.workers, 1);
  if (workers == 1 || num_chunks <= 1) {
    for (std::uint64_t ci = 0; ci < num_chunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::uint64_t ci = next.fetch_add(1);
          if (ci >= num_chunks) return;
          run_chunk(ci);
        }
      });
    for (auto& th : pool) th.join();
  }

  AttackOutcome out;
  out.q = q;
  out.samples_consumed = a.size();
  for (const LocalAcc& acc : accs) {
    if (acc.longest > out.trace.longest_chain) {
      out.trace.longest_chain = acc.longest;
      out.trace.guesses_at_longest = 0;
      out.trace.examples.clear();
    }
    if (acc.longest == out.trace.longest_chain && acc.longest > 0) {
      out.trace.guesses_at_longest += acc.at_longest;
      for (std::uint64_t g : acc.examples)
        if (out.trace.examples.size() < 32) out.trace.examples.push_back(g);
    }
    out.survivor_count += acc.survivor_count;
    for (std::uint64_t g : acc.survivors)
      if (out.survivors.size() < cfg.survivor_cap) out.survivors.push_back(g);
  }
  out.survivors_truncated = out.survivors.size() < out.survivor_count;

  if (out.survivor_count == 1) {
    out.verdict = Verdict::guess;
    out.guess = out.survivors.front();
  } else if (out.survivor_count == 0) {
    out.verdict = Verdict::not_plwe;
  } else {
    out.verdict = Verdict::insufficient_samples;
  }

  if (cfg.collect_histograms && !out.trace.examples.empty() && !a.empty()) {
    std::uint64_t g = out.guess ? *out.guess : out.trace.examples.front();
    std::vector<std::uint64_t> resid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      resid[i] = ring::submod_u64(b[i], ring::mulmod_u64(g, a[i], q), q);
    PrimeModulus qm;
    qm.q = q;
    out.histograms.push_back(histogram_mod_q(resid, qm));
  }

  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::uint64_t checked_q(const sampling::LweSampleSet& samples, const AttackConfig& cfg) {
  if (!samples.modulus.fits_u64())
    throw Error(Err::AttackInfeasible, "modulus does not fit in 64 bits");
  std::uint64_t q = samples.modulus.as_u64();
  if (q > cfg.max_q)
    throw Error(Err::AttackInfeasible, "q = " + std::to_string(q) +
                                           " exceeds the attack budget max_q = " +
                                           std::to_string(cfg.max_q));
  return q;
}

std::uint64_t alpha_residue(const RootInfo& alpha, std::uint64_t q) {
  BigInt a = alpha.root % q;
  if (a < 0) a += q;
  return static_cast<std::uint64_t>(a);
}

void eval_poly_samples(const sampling::LweSampleSet& samples, std::uint64_t alpha,
                       std::uint64_t q, std::vector<std::uint64_t>& a_out,
                       std::vector<std::uint64_t>& b_out) {
  a_out.reserve(samples.poly_samples.size());
  b_out.reserve(samples.poly_samples.size());
  for (const sampling::PolyPair& p : samples.poly_samples) {
    a_out.push_back(ring::zq_eval(p.a, alpha, q));
    b_out.push_back(ring::zq_eval(p.b, alpha, q));
  }
}

struct IntervalPass {
  std::uint64_t lo, hi;  // accept iff r < lo or r > hi
  bool operator()(std::uint64_t r) const { return r < lo || r > hi; }
};

IntervalPass interval_pass(std::uint64_t q) {
  return IntervalPass{q / 4, (3 * q + 3) / 4};
}

}  // namespace

bool small_error_accepts(std::uint64_t residue, std::uint64_t q) {
  return interval_pass(q)(residue);
}

AttackOutcome attack_small_set(const sampling::LweSampleSet& samples, const RootInfo& alpha,
                               const ErrorValueSet& s, const AttackConfig& config) {
  if (samples.variant != sampling::Variant::polylwe_coefficient)
    throw Error(Err::SampleVariantMismatch, "algorithm 1 needs coefficient-form samples");
  std::uint64_t q = checked_q(samples, config);
  std::uint64_t ar = alpha_residue(alpha, q);
  std::vector<std::uint64_t> a, b;
  eval_poly_samples(samples, ar, q, a, b);
  auto pass = [&s](std::uint64_t r) { return s.contains(r); };
  AttackOutcome out = run_loop(q, nullptr, a, b, pass, config);
  out.alpha = alpha;
  out.algorithm = 1;
  out.error_set = std::make_shared<ErrorValueSet>(s);
  return out;
}

AttackOutcome attack_small_error(const sampling::LweSampleSet& samples, const RootInfo& alpha,
                                 const PrimeModulus& q, const AttackConfig& config) {
  if (samples.variant != sampling::Variant::polylwe_coefficient)
    throw Error(Err::SampleVariantMismatch, "algorithm 2 needs coefficient-form samples");
  if (q.q != samples.modulus.q)
    throw std::invalid_argument("modulus disagrees with the sample set");
  std::uint64_t qu = checked_q(samples, config);
  std::uint64_t ar = alpha_residue(alpha, qu);
  std::vector<std::uint64_t> a, b;
  eval_poly_samples(samples, ar, qu, a, b);
  AttackOutcome out = run_loop(qu, nullptr, a, b, interval_pass(qu), config);
  out.alpha = alpha;
  out.algorithm = 2;
  return out;
}

AttackOutcome attack_ringlwe(const sampling::LweSampleSet& samples,
                             const embedding::EmbeddingData& emb, const PrimeModulus& q,
                             const AttackConfig& config) {
  if (samples.variant != sampling::Variant::ringlwe_embedded)
    throw Error(Err::SampleVariantMismatch, "ring-lwe attack needs embedded samples");
  if (q.q != samples.modulus.q)
    throw std::invalid_argument("modulus disagrees with the sample set");
  std::uint64_t qu = checked_q(samples, config);
  if (ring::poly_eval_mod(emb.f, BigInt(1), q) != 0)
    throw std::invalid_argument("f must have root 1 modulo q");

  std::vector<std::uint64_t> a, b;
  a.reserve(samples.emb_samples.size());
  b.reserve(samples.emb_samples.size());
  for (const sampling::EmbPair& p : samples.emb_samples) {
    a.push_back(
        static_cast<std::uint64_t>(embedding::transport_to_residue(p.a, emb, BigInt(1), q)));
    b.push_back(
        static_cast<std::uint64_t>(embedding::transport_to_residue(p.b, emb, BigInt(1), q)));
  }
  AttackOutcome out = run_loop(qu, nullptr, a, b, interval_pass(qu), config);
  out.alpha = RootInfo{BigInt(1), BigInt(1), true, qu == 2, true};
  out.algorithm = 2;
  return out;
}

AttackOutcome continue_attack(const AttackOutcome& prior,
                              const sampling::LweSampleSet& new_samples,
                              const AttackConfig& config) {
  if (prior.verdict != Verdict::insufficient_samples)
    throw std::invalid_argument("continue_attack requires an InsufficientSamples outcome");
  if (prior.survivors_truncated)
    throw std::invalid_argument("survivor list was truncated; cannot continue faithfully");
  if (new_samples.count() == 0) return prior;
  if (new_samples.variant != sampling::Variant::polylwe_coefficient)
    throw Error(Err::SampleVariantMismatch, "continuation needs coefficient-form samples");
  if (new_samples.modulus.q != prior.q)
    throw std::invalid_argument("modulus disagrees with the prior outcome");
  if (prior.algorithm == 1 && !prior.error_set)
    throw std::invalid_argument("prior outcome lacks its error set");

  std::uint64_t q = prior.q;
  std::uint64_t ar = alpha_residue(prior.alpha, q);
  std::vector<std::uint64_t> a, b;
  eval_poly_samples(new_samples, ar, q, a, b);

  AttackOutcome out;
  if (prior.algorithm == 1) {
    const ErrorValueSet& s = *prior.error_set;
    auto pass = [&s](std::uint64_t r) { return s.contains(r); };
    out = run_loop(q, &prior.survivors, a, b, pass, config);
  } else {
    out = run_loop(q, &prior.survivors, a, b, interval_pass(q), config);
  }
  out.alpha = prior.alpha;
  out.algorithm = prior.algorithm;
  out.error_set = prior.error_set;
  out.samples_consumed = prior.samples_consumed + a.size();
  return out;
}

std::string AttackOutcome::to_json() const {
  json j;
  switch (verdict) {
    case Verdict::guess: j["verdict"] = "guess"; break;
    case Verdict::not_plwe: j["verdict"] = "not_plwe"; break;
    case Verdict::insufficient_samples: j["verdict"] = "insufficient_samples"; break;
  }
  j["guess"] = guess ? json(std::to_string(*guess)) : json(nullptr);
  json surv = json::array();
  for (std::uint64_t g : survivors) surv.push_back(std::to_string(g));
  j["survivors"] = surv;
  j["survivor_count"] = survivor_count;
  j["survivors_truncated"] = survivors_truncated;
  j["trace"] = {{"longest_chain", trace.longest_chain},
                {"guesses_at_longest", trace.guesses_at_longest},
                {"examples", trace.examples}};
  j["samples_consumed"] = samples_consumed;
  j["elapsed_seconds"] = elapsed_seconds;
  json hists = json::array();
  for (const HistogramModQ& h : histograms)
    hists.push_back({{"buckets", h.buckets}, {"zero_count", h.zero_count}});
  j["histograms"] = hists;
  j["alpha"] = alpha.root.str();
  j["alpha_order"] = alpha.order.str();
  j["q"] = std::to_string(q);
  j["algorithm"] = algorithm;
  return j.dump();
}

}  // namespace weakring::attack
