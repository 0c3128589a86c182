// weakring: command-line front end for the workbench.
#include <cctype>
#include <cstdint>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "weakring/attack.hpp"
#include "weakring/embedding.hpp"
#include "weakring/errors.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/ringcore.hpp"
#include "weakring/runner.hpp"
#include "weakring/sampling.hpp"
#include "weakring/util.hpp"
#include "weakring/vetting.hpp"

namespace {

using json = nlohmann::json;
using weakring::BigInt;
using weakring::Err;
using weakring::Error;
namespace ring = weakring::ring;
namespace attack = weakring::attack;
namespace embedding = weakring::embedding;
namespace runner = weakring::runner;
namespace sampling = weakring::sampling;
namespace vetting = weakring::vetting;

int exit_code_for(Err code) {
  switch (code) {
    case Err::FactoringBudgetExceeded:
    case Err::SetTooLarge:
    case Err::AttackInfeasible:
    case Err::ModulusTooLargeForOrderComputation:
      return 2;
    default:
      return 1;
  }
}

BigInt parse_int(const std::string& s, const char* what) {
  std::string t = s;
  bool neg = false;
  if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
    neg = t[0] == '-';
    t.erase(0, 1);
  }
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument(std::string(what) + ": expected an integer, got '" + s + "'");
  BigInt v(t);
  return neg ? BigInt(-v) : v;
}

// Accepts "@file.json" (IntPolynomial JSON), a comma-separated coefficient
// list (constant term first), or a sum of monomials like "x^128+524288x+524285".
ring::IntPolynomial parse_poly(const std::string& text) {
  if (!text.empty() && text[0] == '@')
    return ring::IntPolynomial::from_json(weakring::read_file(text.substr(1)));
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw std::invalid_argument("polynomial: empty input");

  if (s.find('x') == std::string::npos) {
    std::vector<BigInt> coeffs;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = s.find(',', pos);
      std::string tok =
          comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos);
      coeffs.push_back(parse_int(tok, "polynomial coefficient"));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return ring::IntPolynomial(coeffs);
  }

  std::vector<BigInt> coeffs;
  auto add_term = [&coeffs](unsigned e, const BigInt& c) {
    if (coeffs.size() <= e) coeffs.resize(e + 1, BigInt(0));
    coeffs[e] += c;
  };
  std::size_t i = 0;
  while (i < s.size()) {
    int sign = 1;
    if (s[i] == '+') {
      ++i;
    } else if (s[i] == '-') {
      sign = -1;
      ++i;
    }
    std::size_t d0 = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    std::string digits = s.substr(d0, i - d0);
    if (i < s.size() && s[i] == '*') ++i;
    bool has_x = false;
    unsigned exp = 0;
    if (i < s.size() && s[i] == 'x') {
      has_x = true;
      exp = 1;
      ++i;
      if (i < s.size() && s[i] == '^') {
        ++i;
        std::size_t e0 = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == e0) throw std::invalid_argument("polynomial: missing exponent after '^'");
        exp = static_cast<unsigned>(std::stoul(s.substr(e0, i - e0)));
      }
    }
    if (!has_x && digits.empty())
      throw std::invalid_argument("polynomial: bad term near position " + std::to_string(d0));
    BigInt c = digits.empty() ? BigInt(1) : BigInt(digits);
    if (sign < 0) c = BigInt(-c);
    add_term(exp, c);
    if (i < s.size() && s[i] != '+' && s[i] != '-')
      throw std::invalid_argument(std::string("polynomial: unexpected character '") + s[i] + "'");
  }
  return ring::IntPolynomial(coeffs);
}

ring::PrimeModulus parse_modulus(const std::string& s) {
  return ring::PrimeModulus::make(parse_int(s, "q"));
}

void emit(const std::string& body, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << body << "\n";
  } else {
    weakring::atomic_write_file(out_path, body + "\n");
    std::cerr << "wrote " << out_path << "\n";
  }
}

int cmd_run(const std::string& config_path, const std::string& out_path, int workers,
            bool quiet) {
  runner::ExperimentConfig cfg = runner::load_config(config_path);
  if (workers > 0) cfg.workers = workers;
  if (!quiet) cfg.progress = &std::cerr;
  runner::ExperimentReport rep = runner::run_experiment(cfg);
  emit(rep.to_json(), out_path);
  std::cerr << rep.success_count << "/" << rep.trials.size() << " trials correct\n";
  bool budget_hit = false, all_failed = !rep.trials.empty();
  for (const runner::TrialResult& tr : rep.trials) {
    if (tr.error.empty()) {
      all_failed = false;
      continue;
    }
    for (Err c : {Err::AttackInfeasible, Err::SetTooLarge, Err::FactoringBudgetExceeded})
      if (tr.error.rfind(weakring::err_name(c), 0) == 0) budget_hit = true;
  }
  if (budget_hit) return 2;
  return all_failed ? 1 : 0;
}

int cmd_gen(const std::string& config_path, const std::string& out_path, std::size_t trial) {
  runner::ExperimentConfig cfg = runner::load_config(config_path);
  sampling::LweSampleSet set = runner::generate_trial_samples(cfg, trial);
  weakring::atomic_write_file(out_path, set.to_jsonl());
  std::cerr << set.count() << " samples written to " << out_path << "\n";
  return 0;
}

int cmd_attack(const std::string& samples_path, const std::string& alpha_str, int algorithm,
               double sigma, const std::string& f_str, int workers, std::uint64_t max_q,
               std::uint64_t set_cap, const std::string& out_path) {
  sampling::LweSampleSet set = sampling::LweSampleSet::from_jsonl(weakring::read_file(samples_path));
  const ring::PrimeModulus& q = set.modulus;
  BigInt av = parse_int(alpha_str, "alpha") % q.q;
  if (av < 0) av += q.q;

  ring::RootInfo alpha;
  alpha.root = av;
  alpha.is_one = av == 1;
  alpha.is_minus_one = q.q > 2 && av == q.q - 1;
  alpha.is_unit = av != 0;
  if (alpha.is_unit) {
    try {
      ring::PrimeModulus qm = q;
      alpha.order = ring::multiplicative_order(av, qm);
    } catch (const Error&) {
      alpha.order = 0;  // order stays unknown; algorithm 2 does not need it
    }
  }

  attack::AttackConfig acfg;
  acfg.workers = workers;
  acfg.max_q = max_q;
  acfg.collect_histograms = true;
  acfg.progress = &std::cerr;

  attack::AttackOutcome outcome;
  if (set.variant == sampling::Variant::ringlwe_embedded) {
    if (f_str.empty())
      throw std::invalid_argument("embedded sample sets need --f to rebuild the embedding");
    embedding::EmbeddingData emb =
        embedding::build_embedding(parse_poly(f_str), set.precision_bits);
    outcome = attack::attack_ringlwe(set, emb, q, acfg);
  } else if (algorithm == 1) {
    if (!alpha.order_known())
      throw Error(Err::AttackInfeasible,
                  "multiplicative order of alpha unknown; cannot build the error value set");
    double sig = sigma > 0 ? sigma : set.gaussian.effective_sigma();
    attack::ErrorValueSet evs = attack::build_error_set(alpha, sig, set.n, q, set_cap);
    std::cerr << "error value set: " << evs.cardinality() << " residues\n";
    outcome = attack::attack_small_set(set, alpha, evs, acfg);
  } else {
    outcome = attack::attack_small_error(set, alpha, q, acfg);
  }
  emit(outcome.to_json(), out_path);
  return 0;
}

int cmd_vet(const std::string& f_str, const std::string& q_str, double w,
            const std::string& variant, const vetting::VetOptions& opts) {
  vetting::VetVariant v =
      variant == "ringlwe" ? vetting::VetVariant::ringlwe : vetting::VetVariant::polylwe;
  vetting::VulnerabilityReport rep =
      vetting::vet_parameters(parse_poly(f_str), parse_modulus(q_str), w, v, opts);
  std::cout << rep.to_json() << "\n";
  return 0;
}

int cmd_findq(const std::string& f_str, unsigned m, const ring::FactorBudget& budget) {
  vetting::FindqResult r = vetting::findq(parse_poly(f_str), m, budget);
  json j;
  j["q"] = r.q.q.str();
  j["lower_bound_only"] = r.lower_bound_only;
  std::cout << j.dump(2) << "\n";
  return r.lower_bound_only ? 2 : 0;
}

int cmd_search(unsigned n, int alpha, const std::string& a_min, const std::string& a_max,
               const std::string& b_min, const std::string& b_max, const std::string& q_min,
               const ring::FactorBudget& budget) {
  std::vector<vetting::TrinomialHit> hits = vetting::search_trinomials(
      n, alpha, {parse_int(a_min, "a-min"), parse_int(a_max, "a-max")},
      {parse_int(b_min, "b-min"), parse_int(b_max, "b-max")}, parse_int(q_min, "q-min"), budget);
  for (const vetting::TrinomialHit& h : hits) {
    json j;
    j["a"] = h.a.str();
    j["b"] = h.b.str();
    j["f"] = json::parse(h.f.to_json());
    j["q"] = h.q.q.str();
    j["irreducible"] = ring::irred_verdict_name(h.irreducible);
    std::cout << j.dump() << "\n";
  }
  std::cerr << hits.size() << " candidates\n";
  return 0;
}

int cmd_family_check(unsigned n, const std::string& q_str, double w,
                     const ring::FactorBudget& budget) {
  vetting::FamilyConditionReport rep =
      vetting::check_family_conditions(n, parse_modulus(q_str), w, budget);
  std::cout << rep.to_json() << "\n";
  return rep.q_minus_1_squarefree == vetting::TriState::unknown ? 2 : 0;
}

int cmd_cyclo_check(unsigned m, const std::string& q_str) {
  vetting::CycloImmunityReport rep = vetting::cyclotomic_immunity_check(m, parse_modulus(q_str));
  std::cout << rep.to_json() << "\n";
  return 0;
}

void add_budget_options(CLI::App* sub, ring::FactorBudget& budget) {
  sub->add_option("--trial-division", budget.trial_division_bound, "Trial division bound");
  sub->add_option("--rho-iterations", budget.rho_iterations, "Pollard rho step budget");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakring: Poly-LWE / Ring-LWE instance vetting and attack workbench"};
  app.require_subcommand(1);
  int rc = 0;

  std::string run_config, run_out;
  int run_workers = 0;
  bool run_quiet = false;
  CLI::App* c_run = app.add_subcommand("run", "Run a configured experiment");
  c_run->add_option("--config", run_config, "Experiment config JSON")->required();
  c_run->add_option("--out", run_out, "Write the report here instead of stdout");
  c_run->add_option("--workers", run_workers, "Override the configured worker count");
  c_run->add_flag("--quiet", run_quiet, "Suppress per-trial progress on stderr");
  c_run->callback([&] { rc = cmd_run(run_config, run_out, run_workers, run_quiet); });

  std::string gen_config, gen_out;
  std::size_t gen_trial = 0;
  CLI::App* c_gen = app.add_subcommand("gen", "Generate one trial's sample set as JSONL");
  c_gen->add_option("--config", gen_config, "Experiment config JSON")->required();
  c_gen->add_option("--out", gen_out, "Output JSONL path")->required();
  c_gen->add_option("--trial", gen_trial, "Trial index (default 0)");
  c_gen->callback([&] { rc = cmd_gen(gen_config, gen_out, gen_trial); });

  std::string atk_samples, atk_alpha, atk_f, atk_out;
  int atk_algorithm = 2, atk_workers = 1;
  double atk_sigma = 0.0;
  std::uint64_t atk_max_q = std::uint64_t(1) << 40;
  std::uint64_t atk_set_cap = std::uint64_t(1) << 26;
  CLI::App* c_atk = app.add_subcommand("attack", "Attack a stored sample set");
  c_atk->add_option("--samples", atk_samples, "Sample set JSONL")->required();
  c_atk->add_option("--alpha", atk_alpha, "Evaluation point alpha (integer mod q)")->required();
  c_atk->add_option("--algorithm", atk_algorithm, "1 = small error-value set, 2 = quadrant test")
      ->check(CLI::Range(1, 2));
  c_atk->add_option("--sigma", atk_sigma, "Sigma for the algorithm-1 error set");
  c_atk->add_option("--f", atk_f, "Defining polynomial (embedded sample sets only)");
  c_atk->add_option("--workers", atk_workers, "Worker threads for the guess loop");
  c_atk->add_option("--max-q", atk_max_q, "Refuse moduli above this bound");
  c_atk->add_option("--set-cap", atk_set_cap, "Cardinality cap for the error value set");
  c_atk->callback([&] {
    rc = cmd_attack(atk_samples, atk_alpha, atk_algorithm, atk_sigma, atk_f, atk_workers,
                    atk_max_q, atk_set_cap, atk_out);
  });
  c_atk->add_option("--out", atk_out, "Write the outcome here instead of stdout");

  std::string vet_f, vet_q, vet_variant = "polylwe";
  double vet_w = 0.0;
  vetting::VetOptions vet_opts;
  std::uint64_t vet_small_order = 16;
  CLI::App* c_vet = app.add_subcommand("vet", "Vulnerability report for (f, q, w)");
  c_vet->add_option("--f", vet_f, "Defining polynomial")->required();
  c_vet->add_option("--q", vet_q, "Prime modulus")->required();
  c_vet->add_option("--w", vet_w, "Gaussian width w = sqrt(2 pi) sigma")->required();
  c_vet->add_option("--variant", vet_variant, "polylwe or ringlwe")
      ->check(CLI::IsMember({"polylwe", "ringlwe"}));
  c_vet->add_option("--spectral-cap", vet_opts.spectral_degree_cap,
                    "Largest degree for exact spectral statistics");
  c_vet->add_option("--small-order-bound", vet_small_order, "Root order considered small");
  c_vet->add_option("--precision", vet_opts.precision_bits, "Embedding precision bits");
  add_budget_options(c_vet, vet_opts.factor_budget);
  c_vet->callback([&] {
    vet_opts.small_order_bound = BigInt(vet_small_order);
    rc = cmd_vet(vet_f, vet_q, vet_w, vet_variant, vet_opts);
  });

  std::string findq_f;
  unsigned findq_m = 0;
  ring::FactorBudget findq_budget;
  CLI::App* c_findq = app.add_subcommand("findq", "Largest prime in the Bezout denominators");
  c_findq->add_option("--f", findq_f, "Defining polynomial")->required();
  c_findq->add_option("--m", findq_m, "Cyclotomic index m")->required();
  add_budget_options(c_findq, findq_budget);
  c_findq->callback([&] { rc = cmd_findq(findq_f, findq_m, findq_budget); });

  unsigned search_n = 0;
  int search_alpha = 1;
  std::string search_amin, search_amax, search_bmin, search_bmax, search_qmin = "0";
  ring::FactorBudget search_budget;
  CLI::App* c_search = app.add_subcommand("search", "Scan trinomials x^n + a x + b");
  c_search->add_option("--n", search_n, "Degree")->required();
  c_search->add_option("--alpha", search_alpha, "Target root, 1 or -1")
      ->check(CLI::IsMember({1, -1}));
  c_search->add_option("--a-min", search_amin, "Low end of a")->required();
  c_search->add_option("--a-max", search_amax, "High end of a")->required();
  c_search->add_option("--b-min", search_bmin, "Low end of b")->required();
  c_search->add_option("--b-max", search_bmax, "High end of b")->required();
  c_search->add_option("--q-min", search_qmin, "Keep hits whose q is at least this");
  add_budget_options(c_search, search_budget);
  c_search->callback([&] {
    rc = cmd_search(search_n, search_alpha, search_amin, search_amax, search_bmin, search_bmax,
                    search_qmin, search_budget);
  });

  unsigned fam_n = 0;
  std::string fam_q;
  double fam_w = 0.0;
  ring::FactorBudget fam_budget;
  CLI::App* c_fam = app.add_subcommand("family-check", "Monogenicity and feasibility conditions "
                                                       "for f = x^n + q - 1");
  c_fam->add_option("--n", fam_n, "Degree")->required();
  c_fam->add_option("--q", fam_q, "Prime modulus")->required();
  c_fam->add_option("--w", fam_w, "Gaussian width")->required();
  add_budget_options(c_fam, fam_budget);
  c_fam->callback([&] { rc = cmd_family_check(fam_n, fam_q, fam_w, fam_budget); });

  unsigned cyc_m = 0;
  std::string cyc_q;
  CLI::App* c_cyc = app.add_subcommand("cyclo-check", "Orders of the roots of Phi_m mod q");
  c_cyc->add_option("--m", cyc_m, "Cyclotomic index")->required();
  c_cyc->add_option("--q", cyc_q, "Prime modulus")->required();
  c_cyc->callback([&] { rc = cmd_cyclo_check(cyc_m, cyc_q); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
