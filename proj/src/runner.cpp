// Experiment orchestration: strict config parsing, per-trial generation and
// attack, diagnostics, and the JSON report.
#include "weakring/runner.hpp"

#include <mpfr.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "weakring/embedding.hpp"
#include "weakring/errors.hpp"
#include "weakring/modpoly.hpp"
#include "weakring/ringcore.hpp"
#include "weakring/rng.hpp"
#include "weakring/util.hpp"

namespace weakring::runner {

using json = nlohmann::json;
using ring::IntPolynomial;
using ring::PrimeModulus;
using ring::ZqPoly;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw Error(Err::SchemaViolation, path + ": " + why);
}

std::uint64_t u64_field(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      bad(path, "expected an unsigned integer");
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      bad(path, "integer out of range");
    }
  }
  bad(path, "expected an unsigned integer");
}

BigInt bigint_field(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return BigInt(j.get<std::uint64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      bad(path, "expected an unsigned integer");
    return BigInt(s);
  }
  bad(path, "expected an unsigned integer");
}

std::string string_field(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) bad(path + "." + it.key(), "unknown key");
  }
}

const char* variant_name(ExpVariant v) {
  return v == ExpVariant::polylwe ? "polylwe" : "ringlwe";
}
const char* control_name(Control c) { return c == Control::genuine ? "genuine" : "uniform_b"; }

void validate_config(const ExperimentConfig& c) {
  if (c.f.degree() < 1 || !c.f.is_monic()) bad("config.f", "f must be monic of degree >= 1");
  if (!c.q.fits_u64()) bad("config.q", "experiments require q < 2^64");
  if (!(c.w > 0.0) || !std::isfinite(c.w)) bad("config.w", "width w must be a positive number");
  if (c.ell == 0) bad("config.ell", "need at least one sample per trial");
  if (c.trials == 0) bad("config.trials", "need at least one trial");
  if (c.workers < 1) bad("config.workers", "need at least one worker");
  if (c.precision_bits < 64) bad("config.precision_bits", "need at least 64 bits");
  std::uint64_t qu = c.q.as_u64();
  bool at_one = ring::poly_eval_mod(c.f, BigInt(1), c.q) == 0;
  bool at_minus_one = qu > 2 && ring::poly_eval_mod(c.f, BigInt(qu - 1), c.q) == 0;
  if (c.variant == ExpVariant::ringlwe) {
    if (!at_one) bad("config.f", "ringlwe runs attack at alpha = 1, but f(1) != 0 mod q");
  } else if (!at_one && !at_minus_one) {
    bad("config.f", "polylwe runs attack at alpha = +-1, but neither f(1) nor f(-1) is 0 mod q");
  }
}

std::string environment_fingerprint() {
  std::ostringstream os;
  os << "compiler " << __VERSION__ << "; boost " << BOOST_LIB_VERSION << "; eigen "
     << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION
     << "; mpfr " << MPFR_VERSION_STRING << "; hw_threads "
     << std::thread::hardware_concurrency();
  return os.str();
}

struct TrialContext {
  const ExperimentConfig& cfg;
  const embedding::EmbeddingData& emb;
  const sampling::GaussianSpec& spec;
  std::uint64_t qu = 0;
  int n = 0;
  ZqPoly fq;
  ring::RootInfo alpha;
  std::uint64_t alpha_res = 1;
};

void replace_b_uniform(sampling::LweSampleSet& set, const embedding::EmbeddingData& emb,
                       std::uint64_t qu, std::uint64_t ctl_seed) {
  if (set.variant == sampling::Variant::polylwe_coefficient) {
    for (std::size_t i = 0; i < set.poly_samples.size(); ++i) {
      RngStream rng(derive_seed(ctl_seed, i));
      for (std::uint64_t& bj : set.poly_samples[i].b) bj = rng.uniform_u64(qu);
    }
    return;
  }
  PrecisionGuard guard(emb.precision_bits + 32);
  int n = emb.n();
  for (std::size_t i = 0; i < set.emb_samples.size(); ++i) {
    RngStream rng(derive_seed(ctl_seed, i));
    embedding::RealVector c(n);
    for (int k = 0; k < n; ++k) c(k) = Real(rng.uniform_u64(qu));
    embedding::RealVector y = emb.M * c;
    std::vector<Real>& b = set.emb_samples[i].b;
    for (int k = 0; k < n; ++k) b[static_cast<std::size_t>(k)] = y(k);
  }
}

ZqPoly residue_coords(const std::vector<Real>& v, const embedding::EmbeddingData& emb,
                      std::uint64_t qu) {
  std::vector<BigInt> c = embedding::lattice_coordinates(v, emb);
  ZqPoly out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    BigInt r = c[i] % qu;
    if (r < 0) r += qu;
    out[i] = r.convert_to<std::uint64_t>();
  }
  return out;
}

// Error-coefficient, a(alpha), and residual histograms; the planted residue's
// survival fraction; and the generation sanity check.
void trial_diagnostics(const TrialContext& ctx, const sampling::LweSampleSet& set,
                       const ZqPoly& s_poly, std::uint64_t planted, TrialResult& tr) {
  std::uint64_t qu = ctx.qu;
  std::size_t n = static_cast<std::size_t>(ctx.n);
  std::vector<std::uint64_t> errs, abars, resids;
  errs.reserve(set.count() * n);
  abars.reserve(set.count());
  resids.reserve(set.count());
  bool genuine = ctx.cfg.control == Control::genuine;
  bool sane = true;
  long bound = static_cast<long>(std::ceil(2.0 * ctx.spec.sigma));

  for (std::size_t i = 0; i < set.count(); ++i) {
    ZqPoly a, b;
    if (set.variant == sampling::Variant::polylwe_coefficient) {
      a = set.poly_samples[i].a;
      b = set.poly_samples[i].b;
    } else {
      PrecisionGuard guard(ctx.emb.precision_bits + 32);
      a = residue_coords(set.emb_samples[i].a, ctx.emb, qu);
      b = residue_coords(set.emb_samples[i].b, ctx.emb, qu);
    }
    ZqPoly at = a;
    ring::zq_trim(at);
    ZqPoly prod = ring::zq_mulmod(at, s_poly, ctx.fq, qu);
    prod.resize(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t e = ring::submod_u64(b[k], prod[k], qu);
      errs.push_back(e);
      if (genuine && set.variant == sampling::Variant::polylwe_coefficient) {
        long eb = e > qu / 2 ? static_cast<long>(e) - static_cast<long>(qu)
                             : static_cast<long>(e);
        if (eb > bound || eb < -bound) sane = false;
      }
    }
    std::uint64_t abar = ring::zq_eval(at, ctx.alpha_res, qu);
    std::uint64_t bbar = ring::zq_eval(b, ctx.alpha_res, qu);
    abars.push_back(abar);
    resids.push_back(ring::submod_u64(bbar, ring::mulmod_u64(planted, abar, qu), qu));

    // Transport multiplicativity: theta(a*s) must land on abar * planted.
    if (genuine && i == 0 && set.variant == sampling::Variant::ringlwe_embedded) {
      PrecisionGuard guard(ctx.emb.precision_bits + 32);
      embedding::RealVector wc(ctx.n);
      for (std::size_t k = 0; k < n; ++k) wc(static_cast<int>(k)) = Real(prod[k]);
      embedding::RealVector wy = ctx.emb.M * wc;
      std::vector<Real> wr(n);
      for (std::size_t k = 0; k < n; ++k) wr[k] = wy(static_cast<int>(k));
      BigInt got = embedding::transport_to_residue(wr, ctx.emb, BigInt(1), ctx.cfg.q);
      if (got != BigInt(ring::mulmod_u64(abar, planted, qu))) sane = false;
    }
  }

  std::size_t accepted = 0;
  for (std::uint64_t r : resids)
    if (attack::small_error_accepts(r, qu)) ++accepted;
  tr.planted_survival_fraction =
      resids.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(resids.size());
  // Under the uniform-b control there is no generation contract to check.
  tr.sanity_ok = genuine ? sane : true;
  tr.histograms = {attack::histogram_mod_q(errs, ctx.cfg.q),
                   attack::histogram_mod_q(abars, ctx.cfg.q),
                   attack::histogram_mod_q(resids, ctx.cfg.q)};
}

std::vector<std::uint64_t> trial_secret(const ExperimentConfig& cfg, std::uint64_t qu,
                                        std::size_t n, std::size_t t) {
  RngStream srng(derive_seed(cfg.seed, t, 1));
  std::vector<std::uint64_t> s_coords(n);
  for (std::uint64_t& v : s_coords) v = srng.uniform_u64(qu);
  return s_coords;
}

sampling::LweSampleSet trial_sample_set(const ExperimentConfig& cfg,
                                        const embedding::EmbeddingData& emb,
                                        const sampling::GaussianSpec& spec,
                                        const std::vector<std::uint64_t>& s_coords,
                                        std::size_t t) {
  sampling::LweSampleSet set;
  if (cfg.variant == ExpVariant::polylwe) {
    std::vector<BigInt> sc;
    sc.reserve(s_coords.size());
    for (std::uint64_t v : s_coords) sc.emplace_back(v);
    set = sampling::gen_polylwe_samples(cfg.f, cfg.q, spec, IntPolynomial(sc), cfg.ell,
                                        derive_seed(cfg.seed, t, 2));
  } else {
    set = sampling::gen_ringlwe_samples(emb, cfg.q, spec, s_coords, cfg.ell,
                                        derive_seed(cfg.seed, t, 2));
  }
  if (cfg.control == Control::uniform_b)
    replace_b_uniform(set, emb, cfg.q.as_u64(), derive_seed(cfg.seed, t, 3));
  return set;
}

struct Setup {
  embedding::EmbeddingData emb;
  sampling::GaussianSpec spec;
};

Setup make_setup(const ExperimentConfig& config) {
  Setup s;
  if (config.variant == ExpVariant::ringlwe) {
    s.emb = config.cache_dir.empty()
                ? embedding::build_embedding(config.f, config.precision_bits)
                : embedding::cached_embedding(config.f, config.precision_bits, config.cache_dir);
  } else {
    // The coefficient lattice: diagnostics only, no canonical geometry needed.
    s.emb = embedding::identity_embedding(config.f, 64);
  }
  s.spec = sampling::GaussianSpec::from_width(
      config.w, config.variant == ExpVariant::polylwe ? sampling::Truncation::hard_2sigma
                                                      : sampling::Truncation::norm_warn_only);
  if (config.variant == ExpVariant::ringlwe) {
    PrecisionGuard guard(96);
    Real ds = pow_real(s.emb.det_abs, Real(1) / config.f.degree());
    s.spec.sigma_prime = Real(Real(s.spec.sigma) * ds).convert_to<double>();
  }
  s.spec.validate();
  return s;
}

TrialResult run_trial(const TrialContext& ctx, std::size_t t) {
  TrialResult tr;
  tr.index = t;
  const ExperimentConfig& cfg = ctx.cfg;
  std::uint64_t qu = ctx.qu;

  std::vector<std::uint64_t> s_coords =
      trial_secret(cfg, qu, static_cast<std::size_t>(ctx.n), t);
  ZqPoly s_poly(s_coords);
  ring::zq_trim(s_poly);

  Clock::time_point g0 = Clock::now();
  sampling::LweSampleSet set = trial_sample_set(cfg, ctx.emb, ctx.spec, s_coords, t);
  tr.gen_seconds = seconds_since(g0);

  if (cfg.variant == ExpVariant::polylwe) {
    tr.planted_residue = BigInt(ring::zq_eval(s_poly, ctx.alpha_res, qu));
  } else {
    std::uint64_t acc = 0;
    for (std::uint64_t v : s_coords) acc = ring::addmod_u64(acc, v, qu);
    tr.planted_residue = BigInt(acc);
  }
  std::uint64_t planted = tr.planted_residue.convert_to<std::uint64_t>();

  trial_diagnostics(ctx, set, s_poly, planted, tr);

  attack::AttackConfig acfg;
  acfg.max_q = cfg.budgets.max_q;
  acfg.workers = cfg.workers;
  acfg.progress = cfg.progress;
  Clock::time_point a0 = Clock::now();
  if (cfg.variant == ExpVariant::polylwe)
    tr.outcome = attack::attack_small_error(set, ctx.alpha, cfg.q, acfg);
  else
    tr.outcome = attack::attack_ringlwe(set, ctx.emb, cfg.q, acfg);
  tr.attack_seconds = seconds_since(a0);
  tr.correct = tr.outcome.verdict == attack::Verdict::guess && tr.outcome.guess &&
               *tr.outcome.guess == planted;
  return tr;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  json j;
  j["kind"] = "experiment_config";
  j["f"] = json::parse(f.to_json());
  j["q"] = q.q.str();
  j["w"] = w;
  j["variant"] = variant_name(variant);
  j["ell"] = ell;
  j["trials"] = trials;
  j["seed"] = std::to_string(seed);
  j["precision_bits"] = precision_bits;
  j["workers"] = workers;
  j["budgets"] = {{"factoring_trial_division", budgets.factoring.trial_division_bound},
                  {"factoring_rho_iterations", budgets.factoring.rho_iterations},
                  {"set_cardinality_cap", budgets.set_cardinality_cap},
                  {"max_q", budgets.max_q}};
  j["control"] = control_name(control);
  j["cache_dir"] = cache_dir;
  return j.dump(2);
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return f == o.f && q.q == o.q.q && w == o.w && variant == o.variant && ell == o.ell &&
         trials == o.trials && seed == o.seed && precision_bits == o.precision_bits &&
         workers == o.workers &&
         budgets.factoring.trial_division_bound == o.budgets.factoring.trial_division_bound &&
         budgets.factoring.rho_iterations == o.budgets.factoring.rho_iterations &&
         budgets.set_cardinality_cap == o.budgets.set_cardinality_cap &&
         budgets.max_q == o.budgets.max_q && control == o.control && cache_dir == o.cache_dir;
}

ExperimentConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    bad("config", ex.what());
  }
  if (!j.is_object()) bad("config", "expected a JSON object");
  check_keys(j, "config",
             {"kind", "f", "q", "w", "variant", "ell", "trials", "seed", "precision_bits",
              "workers", "budgets", "control", "cache_dir"});
  if (j.contains("kind") && j.at("kind") != "experiment_config")
    bad("config.kind", "expected \"experiment_config\"");
  for (const char* k : {"f", "q", "w", "variant", "ell", "trials", "seed"})
    if (!j.contains(k)) bad(std::string("config.") + k, "missing required key");

  ExperimentConfig c;
  try {
    c.f = IntPolynomial::from_json(j.at("f").dump());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    bad("config.f", ex.what());
  }
  try {
    c.q = PrimeModulus::make(bigint_field(j.at("q"), "config.q"));
  } catch (const std::invalid_argument& ex) {
    bad("config.q", ex.what());
  }
  std::string var = string_field(j.at("variant"), "config.variant");
  if (var == "polylwe")
    c.variant = ExpVariant::polylwe;
  else if (var == "ringlwe")
    c.variant = ExpVariant::ringlwe;
  else
    bad("config.variant", "expected \"polylwe\" or \"ringlwe\"");
  if (!j.at("w").is_number()) bad("config.w", "expected a number");
  c.w = j.at("w").get<double>();
  c.ell = static_cast<std::size_t>(u64_field(j.at("ell"), "config.ell"));
  c.trials = static_cast<std::size_t>(u64_field(j.at("trials"), "config.trials"));
  c.seed = u64_field(j.at("seed"), "config.seed");
  if (j.contains("precision_bits")) {
    std::uint64_t p = u64_field(j.at("precision_bits"), "config.precision_bits");
    if (p > (std::uint64_t(1) << 24)) bad("config.precision_bits", "precision out of range");
    c.precision_bits = static_cast<unsigned>(p);
  }
  if (j.contains("workers")) {
    std::uint64_t wk = u64_field(j.at("workers"), "config.workers");
    if (wk == 0 || wk > 4096) bad("config.workers", "expected 1..4096");
    c.workers = static_cast<int>(wk);
  }
  if (j.contains("budgets")) {
    const json& b = j.at("budgets");
    if (!b.is_object()) bad("config.budgets", "expected a JSON object");
    check_keys(b, "config.budgets",
               {"factoring_trial_division", "factoring_rho_iterations", "set_cardinality_cap",
                "max_q"});
    if (b.contains("factoring_trial_division"))
      c.budgets.factoring.trial_division_bound =
          u64_field(b.at("factoring_trial_division"), "config.budgets.factoring_trial_division");
    if (b.contains("factoring_rho_iterations"))
      c.budgets.factoring.rho_iterations =
          u64_field(b.at("factoring_rho_iterations"), "config.budgets.factoring_rho_iterations");
    if (b.contains("set_cardinality_cap"))
      c.budgets.set_cardinality_cap =
          u64_field(b.at("set_cardinality_cap"), "config.budgets.set_cardinality_cap");
    if (b.contains("max_q")) c.budgets.max_q = u64_field(b.at("max_q"), "config.budgets.max_q");
  }
  if (j.contains("control")) {
    std::string ctl = string_field(j.at("control"), "config.control");
    if (ctl == "genuine")
      c.control = Control::genuine;
    else if (ctl == "uniform_b")
      c.control = Control::uniform_b;
    else
      bad("config.control", "expected \"genuine\" or \"uniform_b\"");
  }
  if (j.contains("cache_dir")) c.cache_dir = string_field(j.at("cache_dir"), "config.cache_dir");
  validate_config(c);
  return c;
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  atomic_write_file(path, config.to_json() + "\n");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  Clock::time_point t0 = Clock::now();
  ExperimentReport rep;
  rep.config = config;
  rep.environment = environment_fingerprint();
  int n = config.f.degree();
  std::uint64_t qu = config.q.as_u64();

  rep.tau = embedding::tau(static_cast<unsigned>(n), config.q.q, Real(config.w), 96);
  rep.feasibility_quantity = rep.tau;

  Clock::time_point s0 = Clock::now();
  Setup setup = make_setup(config);
  rep.setup_seconds = seconds_since(s0);
  const embedding::EmbeddingData& emb = setup.emb;
  const sampling::GaussianSpec& spec = setup.spec;

  rep.smoke = sampling::error_norm_stats(5, emb, spec, derive_seed(config.seed, 0, 0xE0));

  std::uint64_t ar = 1;
  if (config.variant == ExpVariant::polylwe &&
      ring::poly_eval_mod(config.f, BigInt(1), config.q) != 0)
    ar = qu - 1;
  ring::RootInfo alpha;
  alpha.root = BigInt(ar);
  alpha.order = BigInt(ar == 1 ? 1 : 2);
  alpha.is_one = ar == 1;
  alpha.is_minus_one = ar == qu - 1;
  alpha.is_unit = true;

  TrialContext ctx{config, emb, spec, qu, n, ring::zq_reduce(config.f, qu), alpha, ar};

  for (std::size_t t = 0; t < config.trials; ++t) {
    TrialResult tr;
    try {
      tr = run_trial(ctx, t);
    } catch (const std::exception& ex) {
      tr = TrialResult{};
      tr.index = t;
      tr.error = ex.what();
    }
    if (tr.error.empty() && tr.correct) ++rep.success_count;
    if (config.progress) {
      std::ostream& os = *config.progress;
      os << "trial " << (t + 1) << "/" << config.trials;
      if (!tr.error.empty()) {
        os << " error: " << tr.error;
      } else {
        os << " correct=" << (tr.correct ? 1 : 0) << " survivors="
           << tr.outcome.survivor_count << " gen=" << tr.gen_seconds
           << "s attack=" << tr.attack_seconds << "s";
      }
      os << std::endl;
    }
    rep.trials.push_back(std::move(tr));
  }
  rep.total_seconds = seconds_since(t0);
  return rep;
}

sampling::LweSampleSet generate_trial_samples(const ExperimentConfig& config, std::size_t trial) {
  validate_config(config);
  Setup setup = make_setup(config);
  std::vector<std::uint64_t> s_coords = trial_secret(
      config, config.q.as_u64(), static_cast<std::size_t>(config.f.degree()), trial);
  return trial_sample_set(config, setup.emb, setup.spec, s_coords, trial);
}

std::string ExperimentReport::to_json() const {
  json j;
  j["kind"] = "experiment_report";
  j["config"] = json::parse(config.to_json());
  j["tau"] = real_to_decimal(tau, 30);
  j["feasibility_quantity"] = real_to_decimal(feasibility_quantity, 30);
  j["success_count"] = success_count;
  j["trials_run"] = trials.size();
  j["smoke"] = {{"mean_ratio", smoke.mean_ratio},
                {"max_ratio", smoke.max_ratio},
                {"norm_warning", smoke.norm_warning}};
  j["setup_seconds"] = setup_seconds;
  j["total_seconds"] = total_seconds;
  j["environment"] = environment;
  json trs = json::array();
  for (const TrialResult& tr : trials) {
    json e;
    e["index"] = tr.index;
    e["correct"] = tr.correct;
    e["planted_residue"] = tr.planted_residue.str();
    e["gen_seconds"] = tr.gen_seconds;
    e["attack_seconds"] = tr.attack_seconds;
    e["planted_survival_fraction"] = tr.planted_survival_fraction;
    e["sanity_ok"] = tr.sanity_ok;
    if (!tr.error.empty()) {
      e["error"] = tr.error;
      e["outcome"] = nullptr;
    } else {
      e["outcome"] = json::parse(tr.outcome.to_json());
    }
    json hs = json::array();
    for (const attack::HistogramModQ& h : tr.histograms)
      hs.push_back({{"buckets", h.buckets}, {"zero_count", h.zero_count}});
    e["histograms"] = hs;
    trs.push_back(std::move(e));
  }
  j["trials"] = trs;
  return j.dump(2);
}

void save_report(const ExperimentReport& report, const std::string& path) {
  atomic_write_file(path, report.to_json() + "\n");
}

}  // namespace weakring::runner
