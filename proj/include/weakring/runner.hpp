#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakring/attack.hpp"
#include "weakring/numtypes.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/sampling.hpp"

namespace weakring::runner {

enum class ExpVariant { polylwe, ringlwe };
enum class Control { genuine, uniform_b };

struct ExperimentBudgets {
  ring::FactorBudget factoring{};
  std::uint64_t set_cardinality_cap = std::uint64_t(1) << 26;
  std::uint64_t max_q = std::uint64_t(1) << 40;
};

struct ExperimentConfig {
  ring::IntPolynomial f;
  ring::PrimeModulus q;
  double w = 0.0;
  ExpVariant variant = ExpVariant::polylwe;
  std::size_t ell = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  unsigned precision_bits = 300;
  int workers = 1;
  ExperimentBudgets budgets{};
  Control control = Control::genuine;
  std::string cache_dir;
  std::ostream* progress = nullptr;  // diagnostic stream; not serialized or compared

  std::string to_json() const;
  bool operator==(const ExperimentConfig& o) const;
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

// The sample set trial `trial` of run_experiment would attack (secret, samples
// and the uniform-b control replacement all derived from config.seed).
sampling::LweSampleSet generate_trial_samples(const ExperimentConfig& config, std::size_t trial);

struct TrialResult {
  std::size_t index = 0;
  std::string error;  // nonempty when the trial aborted
  attack::AttackOutcome outcome;
  bool correct = false;
  BigInt planted_residue;
  double gen_seconds = 0.0;
  double attack_seconds = 0.0;
  // Fraction of samples whose residual at the planted residue lies in the
  // acceptance window.
  double planted_survival_fraction = 0.0;
  bool sanity_ok = false;
  // Error coefficients, a(alpha) values, residuals at the planted residue.
  std::vector<attack::HistogramModQ> histograms;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  std::size_t success_count = 0;
  Real tau;
  Real feasibility_quantity;  // the "greater than 1" quantity; equals tau
  sampling::ErrorNormReport smoke;
  double setup_seconds = 0.0;
  double total_seconds = 0.0;
  std::string environment;

  std::string to_json() const;
};

void save_report(const ExperimentReport& report, const std::string& path);

ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace weakring::runner
