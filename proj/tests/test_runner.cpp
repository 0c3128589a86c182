#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "weakring/attack.hpp"
#include "weakring/errors.hpp"
#include "weakring/poly.hpp"
#include "weakring/primes.hpp"
#include "weakring/ringcore.hpp"
#include "weakring/runner.hpp"

using namespace weakring;
using namespace weakring::runner;
using ring::IntPolynomial;
using ring::PrimeModulus;
namespace fs = std::filesystem;

namespace {

IntPolynomial x4_plus_256() { return IntPolynomial({256, 0, 0, 0, 1}); }

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.f = x4_plus_256();
  cfg.q = PrimeModulus::make(BigInt(257));
  cfg.w = 7.5199;
  cfg.variant = ExpVariant::polylwe;
  cfg.ell = 12;
  cfg.trials = 2;
  cfg.seed = 7;
  cfg.precision_bits = 128;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "weakring_runner_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

void expect_schema(const std::string& path, const std::string& needle) {
  try {
    load_config(path);
    CHECK_MESSAGE(false, ("expected SchemaViolation mentioning " + needle));
  } catch (const Error& e) {
    CHECK(e.code() == Err::SchemaViolation);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
  }
}

nlohmann::json minimal_config_json() {
  nlohmann::json j;
  j["f"] = {{"coeffs", {"256", "0", "0", "0", "1"}}, {"var", "x"}};
  j["q"] = "257";
  j["w"] = 7.5199;
  j["variant"] = "polylwe";
  j["ell"] = 12;
  j["trials"] = 2;
  j["seed"] = 7;
  return j;
}

}  // namespace

TEST_CASE("config files round trip through save and load") {
  TempDir tmp;
  ExperimentConfig cfg = base_config();
  cfg.workers = 2;
  cfg.control = Control::uniform_b;
  cfg.cache_dir = "/tmp/somewhere";
  cfg.budgets.max_q = 1 << 20;
  cfg.budgets.set_cardinality_cap = 12345;
  cfg.budgets.factoring.trial_division_bound = 999;
  cfg.budgets.factoring.rho_iterations = 888;

  std::string path = tmp.file("cfg.json");
  save_config(cfg, path);
  ExperimentConfig back = load_config(path);
  CHECK(back == cfg);
  CHECK(back.to_json() == cfg.to_json());

  std::string path2 = tmp.file("cfg2.json");
  save_config(back, path2);
  CHECK(load_config(path2) == cfg);

  nlohmann::json j = nlohmann::json::parse(cfg.to_json());
  CHECK(j.at("kind") == "experiment_config");
  CHECK(j.at("q") == "257");
  CHECK(j.at("seed") == "7");
  CHECK(j.at("control") == "uniform_b");
  CHECK(j.at("budgets").at("max_q") == (1 << 20));

  ExperimentConfig other = cfg;
  other.seed = 8;
  CHECK(!(other == cfg));
}

TEST_CASE("malformed configs fail with field-level messages") {
  TempDir tmp;
  std::string p = tmp.file("bad.json");

  write_text(p, "not json at all");
  expect_schema(p, "config");

  nlohmann::json j = minimal_config_json();
  j["sigma"] = 3;
  write_text(p, j.dump());
  expect_schema(p, "config.sigma");

  j = minimal_config_json();
  j.erase("seed");
  write_text(p, j.dump());
  expect_schema(p, "config.seed");

  j = minimal_config_json();
  j["q"] = "91";
  write_text(p, j.dump());
  expect_schema(p, "config.q");

  j = minimal_config_json();
  j["variant"] = "both";
  write_text(p, j.dump());
  expect_schema(p, "config.variant");

  j = minimal_config_json();
  j["trials"] = 0;
  write_text(p, j.dump());
  expect_schema(p, "config.trials");

  j = minimal_config_json();
  j["w"] = "wide";
  write_text(p, j.dump());
  expect_schema(p, "config.w");

  j = minimal_config_json();
  j["budgets"] = {{"bogus", 1}};
  write_text(p, j.dump());
  expect_schema(p, "config.budgets.bogus");

  // ringlwe needs the attack root: f(1) = 3 != 0 mod 257.
  j = minimal_config_json();
  j["f"] = {{"coeffs", {"2", "0", "1"}}, {"var", "x"}};
  j["variant"] = "ringlwe";
  write_text(p, j.dump());
  expect_schema(p, "f(1)");

  CHECK_THROWS_AS(load_config(tmp.file("missing.json")), Error);
}

TEST_CASE("the printed full-scale parameter row parses and validates") {
  TempDir tmp;
  nlohmann::json j = minimal_config_json();
  std::vector<std::string> coeffs(1025, "0");
  coeffs[0] = "2147483646";
  coeffs[1024] = "1";
  j["f"] = {{"coeffs", coeffs}, {"var", "x"}};
  j["q"] = "2147483647";
  j["w"] = 3.192;
  j["ell"] = 40;
  j["trials"] = 10;
  j["seed"] = 1;
  std::string p = tmp.file("row1.json");
  write_text(p, j.dump());
  ExperimentConfig cfg = load_config(p);
  CHECK(cfg.f.degree() == 1024);
  CHECK(cfg.q.q == 2147483647);
  CHECK(cfg.ell == 40);
  CHECK(ring::poly_eval_mod(cfg.f, BigInt(1), cfg.q) == 0);
}

TEST_CASE("run_experiment is deterministic in the config seed") {
  ExperimentConfig cfg = base_config();
  ExperimentReport a = run_experiment(cfg);
  ExperimentReport b = run_experiment(cfg);
  CHECK(a.success_count == b.success_count);
  CHECK(a.tau == b.tau);
  CHECK(a.smoke.mean_ratio == b.smoke.mean_ratio);
  REQUIRE(a.trials.size() == 2);
  REQUIRE(b.trials.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.trials[i].planted_residue == b.trials[i].planted_residue);
    CHECK(a.trials[i].correct == b.trials[i].correct);
    CHECK(a.trials[i].outcome.verdict == b.trials[i].outcome.verdict);
    CHECK(a.trials[i].outcome.survivor_count == b.trials[i].outcome.survivor_count);
  }
  // tau = q / (2 sqrt(2) w n (q-1)^(3/8)) = 257 / (2 sqrt(2) * 7.5199 * 4 * 8)
  CHECK(a.tau.convert_to<double>() == doctest::Approx(0.37761).epsilon(1e-3));
  CHECK(a.feasibility_quantity == a.tau);
  CHECK(a.total_seconds >= a.setup_seconds);
  std::size_t correct = 0;
  for (const TrialResult& t : a.trials) correct += t.correct;
  CHECK(a.success_count == correct);
  CHECK(!a.environment.empty());
}

TEST_CASE("vanishing width succeeds in every trial with exact diagnostics") {
  ExperimentConfig cfg = base_config();
  cfg.w = 1e-4;
  cfg.trials = 3;
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.success_count == 3);
  for (const TrialResult& t : rep.trials) {
    CHECK(t.error.empty());
    CHECK(t.correct);
    CHECK(t.sanity_ok);
    CHECK(t.planted_survival_fraction == 1.0);
    CHECK(t.outcome.verdict == attack::Verdict::guess);
    REQUIRE(t.histograms.size() == 3);
    // With sigma ~ 4e-5 every error coefficient is zero.
    CHECK(t.histograms[0].zero_count == 4 * cfg.ell);
    // All residuals at the planted residue are zero.
    CHECK(t.histograms[2].zero_count == cfg.ell);
  }
}

TEST_CASE("the uniform-b control never produces a success") {
  ExperimentConfig cfg = base_config();
  cfg.ell = 16;
  cfg.trials = 3;
  cfg.control = Control::uniform_b;
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.success_count == 0);
  for (const TrialResult& t : rep.trials) {
    CHECK(t.error.empty());
    CHECK(!t.correct);
    CHECK(t.sanity_ok);  // no generation contract to violate
    CHECK(t.outcome.verdict == attack::Verdict::not_plwe);
  }
}

TEST_CASE("per-trial failures are isolated and reported") {
  ExperimentConfig cfg = base_config();
  cfg.budgets.max_q = 100;  // below q: every attack refuses
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.success_count == 0);
  REQUIRE(rep.trials.size() == 2);
  for (const TrialResult& t : rep.trials) {
    CHECK(!t.error.empty());
    CHECK(t.error.find("AttackInfeasible") != std::string::npos);
    CHECK(!t.correct);
  }
}

TEST_CASE("generate_trial_samples reproduces the experiment's inputs") {
  ExperimentConfig cfg = base_config();
  cfg.w = 1e-4;
  cfg.ell = 16;

  sampling::LweSampleSet s0 = generate_trial_samples(cfg, 0);
  CHECK(s0.to_jsonl() == generate_trial_samples(cfg, 0).to_jsonl());
  sampling::LweSampleSet s1 = generate_trial_samples(cfg, 1);
  CHECK(s0.secret_commitment != s1.secret_commitment);

  ExperimentConfig ctl = cfg;
  ctl.control = Control::uniform_b;
  sampling::LweSampleSet u0 = generate_trial_samples(ctl, 0);
  CHECK(u0.poly_samples[0].a == s0.poly_samples[0].a);
  CHECK(u0.poly_samples[0].b != s0.poly_samples[0].b);

  cfg.trials = 1;
  ExperimentReport rep = run_experiment(cfg);
  REQUIRE(rep.trials.size() == 1);
  ring::RootInfo one;
  one.root = 1;
  one.order = 1;
  one.is_one = true;
  attack::AttackOutcome out = attack::attack_small_error(s0, one, cfg.q);
  REQUIRE(out.verdict == attack::Verdict::guess);
  CHECK(BigInt(*out.guess) == rep.trials[0].planted_residue);
}

TEST_CASE("ringlwe experiments run end to end") {
  TempDir tmp;
  ExperimentConfig cfg = base_config();
  cfg.variant = ExpVariant::ringlwe;
  cfg.w = 2.5066282746310002;  // sigma = 1
  cfg.ell = 16;
  cfg.trials = 2;
  cfg.seed = 3;
  cfg.cache_dir = tmp.file("cache");
  fs::create_directories(cfg.cache_dir);

  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.trials.size() == 2);
  for (const TrialResult& t : rep.trials) {
    CHECK(t.error.empty());
    CHECK(t.sanity_ok);
    CHECK(t.planted_survival_fraction == 1.0);
    CHECK(t.histograms.size() == 3);
  }
  CHECK(rep.success_count == 2);

  // The embedding cache was populated and a rerun reuses it bit-for-bit.
  CHECK(!fs::is_empty(cfg.cache_dir));
  ExperimentReport again = run_experiment(cfg);
  CHECK(again.success_count == rep.success_count);
  CHECK(again.trials[0].planted_residue == rep.trials[0].planted_residue);
}

TEST_CASE("reports serialize to well-formed JSON") {
  TempDir tmp;
  ExperimentConfig cfg = base_config();
  ExperimentReport rep = run_experiment(cfg);
  std::string path = tmp.file("report.json");
  save_report(rep, path);

  std::ifstream is(path);
  nlohmann::json j = nlohmann::json::parse(is);
  CHECK(j.at("kind") == "experiment_report");
  CHECK(j.at("config").at("q") == "257");
  CHECK(j.at("trials").size() == 2);
  CHECK(j.at("trials_run") == 2);
  CHECK(std::stod(j.at("tau").get<std::string>()) == doctest::Approx(0.37761).epsilon(1e-3));
  CHECK(j.at("environment").get<std::string>().find("compiler") != std::string::npos);
  CHECK(j.at("smoke").contains("mean_ratio"));
  for (const auto& t : j.at("trials")) {
    CHECK(t.contains("index"));
    CHECK(t.contains("planted_residue"));
    CHECK(!t.contains("error"));  // only aborted trials carry an error
    CHECK(t.at("outcome").is_object());
    CHECK(t.at("histograms").size() == 3);
  }
}
