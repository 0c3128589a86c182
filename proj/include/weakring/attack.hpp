#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "weakring/embedding.hpp"
#include "weakring/ringcore.hpp"
#include "weakring/sampling.hpp"

namespace weakring::attack {

struct HistogramModQ {
  std::array<std::uint64_t, 10> buckets{};
  std::uint64_t zero_count = 0;
};

HistogramModQ histogram_mod_q(const std::vector<std::uint64_t>& values,
                              const ring::PrimeModulus& q);

// The Algorithm 2 acceptance window: lift in [0, floor(q/4)) or
// (ceil(3q/4), q).
bool small_error_accepts(std::uint64_t residue, std::uint64_t q);

// Residues reachable by Sum_j c_j alpha^j mod q with |c_j| bounded by the
// per-coordinate truncated-error sums; sorted and deduplicated.
struct ErrorValueSet {
  ring::RootInfo alpha;
  std::vector<std::uint64_t> values;
  std::uint64_t group_bound = 0;  // B = ceil(2 sigma) * ceil(n / r)
  std::size_t cardinality() const { return values.size(); }
  bool contains(std::uint64_t v) const;
};

ErrorValueSet build_error_set(const ring::RootInfo& alpha, double sigma, int n,
                              const ring::PrimeModulus& q,
                              std::uint64_t cardinality_cap = std::uint64_t(1) << 26);

struct AttackConfig {
  std::uint64_t max_q = std::uint64_t(1) << 40;
  int workers = 1;
  std::uint64_t chunk_size = std::uint64_t(1) << 16;
  std::uint64_t survivor_cap = std::uint64_t(1) << 22;
  bool collect_histograms = false;
  std::ostream* progress = nullptr;  // one line per 2^20 guesses
};

enum class Verdict { guess, not_plwe, insufficient_samples };

struct SurvivorTrace {
  std::size_t longest_chain = 0;            // most samples any guess survived
  std::uint64_t guesses_at_longest = 0;     // how many guesses reached it
  std::vector<std::uint64_t> examples;      // first few such guesses (up to 32)
};

struct AttackOutcome {
  Verdict verdict = Verdict::not_plwe;
  std::optional<std::uint64_t> guess;       // set iff verdict == guess
  std::vector<std::uint64_t> survivors;     // all survivors unless truncated
  std::uint64_t survivor_count = 0;
  bool survivors_truncated = false;
  SurvivorTrace trace;
  std::size_t samples_consumed = 0;
  double elapsed_seconds = 0.0;
  std::vector<HistogramModQ> histograms;    // residuals at the best guess

  // Context used by continue_attack.
  ring::RootInfo alpha;
  std::uint64_t q = 0;
  int algorithm = 2;  // 1 = small set of error values, 2 = small error interval
  std::shared_ptr<const ErrorValueSet> error_set;  // algorithm 1 only

  std::string to_json() const;
};

// Algorithm 1: a guess survives a sample iff b(alpha) - g*a(alpha) lies in S.
AttackOutcome attack_small_set(const sampling::LweSampleSet& samples, const ring::RootInfo& alpha,
                               const ErrorValueSet& s, const AttackConfig& config = {});

// Algorithm 2: a guess survives iff the lift of b(alpha) - g*a(alpha) into
// [0, q) lies in [0, floor(q/4)) or (ceil(3q/4), q).
AttackOutcome attack_small_error(const sampling::LweSampleSet& samples,
                                 const ring::RootInfo& alpha, const ring::PrimeModulus& q,
                                 const AttackConfig& config = {});

// Transports every sample to F_q at alpha = 1, then runs the small-error test.
AttackOutcome attack_ringlwe(const sampling::LweSampleSet& samples,
                             const embedding::EmbeddingData& emb, const ring::PrimeModulus& q,
                             const AttackConfig& config = {});

// Re-tests only the surviving guesses of `prior` against new samples. The
// trace in the result covers the new samples only.
AttackOutcome continue_attack(const AttackOutcome& prior,
                              const sampling::LweSampleSet& new_samples,
                              const AttackConfig& config = {});

}  // namespace weakring::attack
