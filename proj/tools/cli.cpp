#include "cli.hpp"

#include "cmekit/cme.hpp"
#include "cmekit/corpus.hpp"
#include "cmekit/empirical.hpp"
#include "cmekit/error.hpp"
#include "cmekit/gaussian.hpp"
#include "cmekit/io.hpp"
#include "cmekit/report.hpp"
#include "cmekit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace cmekit::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Globals {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string format;
  bool timing = false;
};

struct Source {
  std::string spec;
  std::string corpus = "fullrank-random";
  std::size_t count = 1;
};

void add_source(CLI::App *cmd, Source &src, bool with_count) {
  cmd->add_option("--spec", src.spec, "JointSpec JSON file (overrides --corpus)");
  cmd->add_option("--corpus", src.corpus, "Built-in corpus")
      ->check(CLI::IsMember(corpus_names()))
      ->capture_default_str();
  if (with_count)
    cmd->add_option("--count", src.count, "Corpus members, seeds seed .. seed+count-1")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

std::vector<std::pair<std::string, JointSpec>> load(const Source &src, std::uint64_t seed) {
  if (!src.spec.empty()) return {{"spec", read_joint_spec(src.spec)}};
  const auto id = parse_corpus(src.corpus);
  if (!id) throw InvalidSpec("unknown corpus " + src.corpus);
  std::vector<std::pair<std::string, JointSpec>> out;
  for (std::size_t i = 0; i < src.count; ++i)
    out.emplace_back(src.corpus + "#" + std::to_string(seed + i), corpus_joint(*id, seed + i));
  return out;
}

class Emitter {
public:
  Emitter(const Globals &g, std::ostream &out) : g_(g), out_(out) {}

  void write(const std::string &text) const { write_to(g_.out, text); }

  void write_to(const std::string &path, const std::string &text) const {
    if (path.empty() || path == "-") {
      out_ << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
  }

  bool json(bool json_by_default) const {
    return g_.format.empty() ? json_by_default : g_.format == "json";
  }

private:
  const Globals &g_;
  std::ostream &out_;
};

class Stopwatch {
public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int finish(RunReport &report, const Globals &g, const Emitter &emit, const Stopwatch &clock) {
  report.seed = g.seed;
  if (g.timing) report.elapsed_ms = clock.ms();
  emit.write(emit.json(true) ? report.to_json() : report.to_csv());
  return report.passed() ? kPass : kCheckFailure;
}

// -- verify -------------------------------------------------------------------

struct VerifyArgs {
  Source src{.spec = {}, .corpus = "fullrank-random", .count = 20};
  double check_tol = 1e-8;
};

int cmd_verify(const VerifyArgs &a, const Globals &g, const Tolerance &tol, const Emitter &emit) {
  Stopwatch clock;
  VerifyOptions opt;
  opt.tol = tol;
  opt.check_tol = a.check_tol;
  RunReport report = verify_suite(a.src.spec.empty() ? a.src.corpus : a.src.spec,
                                  load(a.src, g.seed), opt);
  return finish(report, g, emit, clock);
}

// -- convergence --------------------------------------------------------------

struct ConvergenceArgs {
  Source src;
  std::string variant = "centred";
  std::string basis = "centred";
};

int cmd_convergence(const ConvergenceArgs &a, const Globals &g, const Tolerance &tol,
                    const Emitter &emit) {
  const PreparedJoint pj = prepare(load(a.src, g.seed).front().second, tol);
  const CmeVariant variant = a.variant == "centred" ? CmeVariant::centred : CmeVariant::uncentred;
  const TruncationBasis basis = a.basis == "centred" ? TruncationBasis::centred_covariance
                                                     : TruncationBasis::uncentred_covariance;
  const auto sweep = pj.hx.rank > 0 ? truncation_sweep(pj.moments, pj.oracle, variant, tol, basis)
                                    : std::vector<SweepPoint>{};
  if (emit.json(false)) {
    ordered_json j;
    j["variant"] = a.variant;
    j["basis"] = a.basis;
    j["seed"] = g.seed;
    j["tolerance"] = {{"rtol", tol.rtol}, {"atol", tol.atol}};
    auto rows = ordered_json::array();
    for (const auto &p : sweep)
      rows.push_back({{"n", p.n}, {"error", p.error}, {"range_residual", p.range_residual}});
    j["rows"] = std::move(rows);
    emit.write(j.dump(2) + "\n");
  } else {
    std::string text = "n,error,range_residual\n";
    for (const auto &p : sweep)
      text += csv_row({std::to_string(p.n), format_double(p.error), format_double(p.range_residual)});
    emit.write(text);
  }
  const bool finite = std::all_of(sweep.begin(), sweep.end(),
                                  [](const SweepPoint &p) { return std::isfinite(p.error); });
  return finite ? kPass : kCheckFailure;
}

// -- empirical ----------------------------------------------------------------

struct EmpiricalArgs {
  Source src;
  std::string estimator = "regularized";
  double epsilon = 0.0;
  long rank = 0;
  std::vector<std::size_t> sample_counts{100, 400, 1600, 6400};
  std::size_t seeds = 10;
};

int cmd_empirical(const EmpiricalArgs &a, const Globals &g, const Tolerance &tol, const Emitter &emit) {
  const PreparedJoint pj = prepare(load(a.src, g.seed).front().second, tol);
  EstimatorConfig config;
  config.kind = a.estimator == "naive"       ? EstimatorConfig::Kind::naive
                : a.estimator == "truncated" ? EstimatorConfig::Kind::truncated
                                             : EstimatorConfig::Kind::regularized;
  config.epsilon = a.epsilon;
  config.rank = a.rank;
  config.tol = tol;
  std::vector<std::uint64_t> seeds(a.seeds);
  std::iota(seeds.begin(), seeds.end(), g.seed);
  const auto rows = convergence_study(pj.spec.joint, pj.hx, pj.gy, config, a.sample_counts, seeds);

  if (emit.json(false)) {
    ordered_json j;
    j["estimator"] = a.estimator;
    j["seed"] = g.seed;
    j["tolerance"] = {{"rtol", tol.rtol}, {"atol", tol.atol}};
    auto arr = ordered_json::array();
    for (const auto &r : rows)
      arr.push_back({{"J", r.sample_count}, {"seed", r.seed}, {"error", r.error},
                     {"schedule_value", r.schedule_value}});
    j["rows"] = std::move(arr);
    auto summary = ordered_json::array();
    for (const auto &s : summarize(rows))
      summary.push_back({{"J", s.sample_count}, {"mean", s.mean}, {"sd", s.sd}});
    j["summary"] = std::move(summary);
    emit.write(j.dump(2) + "\n");
  } else {
    std::string text = "J,seed,error,schedule_value\n";
    for (const auto &r : rows)
      text += csv_row({std::to_string(r.sample_count), std::to_string(r.seed), format_double(r.error),
                       format_double(r.schedule_value)});
    emit.write(text);
  }
  return kPass;
}

// -- gaussian -----------------------------------------------------------------

struct GaussianArgs {
  Source src{.spec = {}, .corpus = "fullrank-random", .count = 20};
  std::string mode = "example";
  std::vector<long> ranks{4, 8, 16};
  double check_tol = 1e-8;
};

int gaussian_example(const GaussianArgs &a, const Globals &g, const Tolerance &tol,
                     const Emitter &emit) {
  Stopwatch clock;
  RunReport report;
  report.suite = "gaussian-example";
  report.tol = tol;
  std::string text = "n,q_hat_norm,min_sv_cv,min_sv_cvu,sv_ratio,block_min_eigenvalue\n";
  for (long n : a.ranks) {
    const IncompatibleExample ex = incompatible_example(n, tol);
    report.expect_le("example_n=" + std::to_string(n) + "/q_hat_norm",
                     std::abs(ex.q_hat_norm - static_cast<double>(n)), a.check_tol,
                     "norm " + format_double(ex.q_hat_norm));
    text += csv_row({std::to_string(n), format_double(ex.q_hat_norm), format_double(ex.min_sv_cv),
                     format_double(ex.min_sv_cvu), format_double(ex.sv_ratio),
                     format_double(ex.block_min_eigenvalue)});
  }
  if (emit.json(true)) return finish(report, g, emit, clock);
  emit.write(text);
  return report.passed() ? kPass : kCheckFailure;
}

int gaussian_bridge(const GaussianArgs &a, const Globals &g, const Tolerance &tol,
                    const Emitter &emit) {
  Stopwatch clock;
  RunReport report;
  report.suite = "gaussian-bridge";
  report.tol = tol;
  for (const auto &[label, spec] : load(a.src, g.seed)) {
    const PreparedJoint pj = prepare(spec, tol);
    const auto as = check_assumptions(pj.moments, pj.kernel_x_report, tol);
    const BridgeReport br = verify_bridge(spec.joint, pj.moments, tol);
    const auto add = [&, &label = label](const char *name, double residual) {
      Check c{label + "/" + name, CheckStatus::pass, residual, a.check_tol, {}};
      if (!(residual <= a.check_tol)) {
        c.status = as.assumption_b ? CheckStatus::fail : CheckStatus::expected_failure;
        if (!as.assumption_b) c.detail = "H_C density does not hold";
      }
      report.add(std::move(c));
    };
    add("mean", br.mean_error);
    add("covariance", br.cov_error);
    report.expect_true(label + "/flags", br.flags_agree,
                       std::string("compatibility=") + (br.compatible ? "true" : "false"));
    if (br.compatible) {
      const GaussianJoint gj = bridge_from_moments(pj.moments);
      const auto res = projection_residuals(gj, oblique_projection(gj, tol), tol);
      report.expect_le(label + "/oblique_projection", res.max(), 1e-10);
    }
  }
  return finish(report, g, emit, clock);
}

int gaussian_incompatible(const Globals &g, const Tolerance &tol, const Emitter &emit) {
  Stopwatch clock;
  RunReport report;
  report.suite = "gaussian-incompatible";
  report.tol = tol;
  const GaussianJoint block = synthetic_incompatible_block();
  const InclusionResult compat = is_compatible(block, tol);
  report.add({"synthetic_block/compatibility", compat.included ? CheckStatus::fail : CheckStatus::pass,
              compat.residual, tol.rtol,
              std::string("compatibility=") + (compat.included ? "true" : "false") +
                  ", block min eigenvalue " + format_double(block.block_min_eigenvalue())});
  return finish(report, g, emit, clock);
}

// -- spectrum -----------------------------------------------------------------

struct SpectrumArgs {
  long n = 500;
  long sample_count = 2000;
  std::size_t seeds = 5;
  std::string distribution = "normal";
};

int cmd_spectrum(const SpectrumArgs &a, const Globals &g, const Emitter &emit) {
  const EntryDistribution dist =
      a.distribution == "normal" ? EntryDistribution::normal : EntryDistribution::rademacher;
  std::vector<SpectrumResult> results(a.seeds);
  for (std::size_t i = 0; i < a.seeds; ++i)
    results[i] = spectrum_experiment(a.n, a.sample_count, g.seed + i, dist);
  SpectrumResult mean;
  for (const auto &r : results) {
    mean.lambda_min += r.lambda_min / static_cast<double>(a.seeds);
    mean.lambda_max += r.lambda_max / static_cast<double>(a.seeds);
  }
  const double gamma = static_cast<double>(a.n) / static_cast<double>(a.sample_count);
  const SpectrumResult limit = spectrum_limits(gamma);

  if (emit.json(false)) {
    ordered_json j;
    j["n"] = a.n;
    j["J"] = a.sample_count;
    j["gamma"] = gamma;
    j["distribution"] = a.distribution;
    auto rows = ordered_json::array();
    for (std::size_t i = 0; i < a.seeds; ++i)
      rows.push_back({{"seed", g.seed + i},
                      {"lambda_min", results[i].lambda_min},
                      {"lambda_max", results[i].lambda_max}});
    j["rows"] = std::move(rows);
    j["mean"] = {{"lambda_min", mean.lambda_min}, {"lambda_max", mean.lambda_max}};
    j["limit"] = {{"lambda_min", limit.lambda_min}, {"lambda_max", limit.lambda_max}};
    emit.write(j.dump(2) + "\n");
  } else {
    std::string text = "seed,lambda_min,lambda_max\n";
    for (std::size_t i = 0; i < a.seeds; ++i)
      text += csv_row({std::to_string(g.seed + i), format_double(results[i].lambda_min),
                       format_double(results[i].lambda_max)});
    text += csv_row({"mean", format_double(mean.lambda_min), format_double(mean.lambda_max)});
    text += csv_row({"limit", format_double(limit.lambda_min), format_double(limit.lambda_max)});
    emit.write(text);
  }
  return kPass;
}

// -- gen ----------------------------------------------------------------------

struct GenArgs {
  Source src;
  std::size_t samples = 0;
  std::string manifest;
};

int cmd_gen(const GenArgs &a, const Globals &g, const Emitter &emit) {
  const JointSpec spec = load(a.src, g.seed).front().second;
  if (a.samples == 0) {
    emit.write(joint_spec_to_json(spec));
    return kPass;
  }
  const SampleSet s = draw_samples(spec.joint, a.samples, g.seed);
  std::ostringstream csv;
  write_samples_csv(csv, s, spec.joint);
  emit.write(csv.str());
  std::string manifest = a.manifest;
  if (manifest.empty() && !g.out.empty() && g.out != "-") manifest = g.out + ".manifest.json";
  if (!manifest.empty()) emit.write_to(manifest, sample_manifest_json(s));
  return kPass;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Conditional mean embeddings on finite spaces: checks, sweeps and reports", "cmekit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--tol-rtol", g.rtol, "Relative pseudo-inverse / range tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol-atol", g.atol, "Absolute tolerance floor")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Base seed (env CMEKIT_SEED replaces the default)")
      ->envname("CMEKIT_SEED")
      ->capture_default_str();
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "csv or json (default depends on the command)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--timing", g.timing, "Include wall-clock timing in JSON reports");

  VerifyArgs verify;
  auto *v = app.add_subcommand("verify", "Oracle, pathology, weak-identity, marginal, bridge and "
                                         "assumption checks");
  add_source(v, verify.src, true);
  v->add_option("--check-tol", verify.check_tol, "Tolerance of oracle and bridge checks")
      ->capture_default_str();

  ConvergenceArgs conv;
  auto *c = app.add_subcommand("convergence", "Truncation sweep e(n), CSV n,error,range_residual");
  add_source(c, conv.src, false);
  c->add_option("--variant", conv.variant)->check(CLI::IsMember({"centred", "uncentred"}))
      ->capture_default_str();
  c->add_option("--basis", conv.basis, "Covariance supplying the truncation eigenbasis")
      ->check(CLI::IsMember({"centred", "uncentred"}))
      ->capture_default_str();

  EmpiricalArgs emp;
  auto *e = app.add_subcommand("empirical", "Sample-size study, CSV J,seed,error,schedule_value");
  add_source(e, emp.src, false);
  e->add_option("--estimator", emp.estimator)
      ->check(CLI::IsMember({"naive", "regularized", "truncated"}))
      ->capture_default_str();
  e->add_option("--epsilon", emp.epsilon, "Fixed ridge (0: J^-1/2)")->capture_default_str();
  e->add_option("--rank", emp.rank, "Fixed truncation rank (0: ceil(J^1/3))")->capture_default_str();
  e->add_option("--J", emp.sample_counts, "Sample sizes")->delimiter(',')->capture_default_str();
  e->add_option("--seeds", emp.seeds, "Seeds per sample size")->check(CLI::PositiveNumber)
      ->capture_default_str();

  GaussianArgs gauss;
  auto *ga = app.add_subcommand("gaussian", "Gaussian conditioning bridge and oblique projections");
  add_source(ga, gauss.src, true);
  ga->add_option("--mode", gauss.mode)->check(CLI::IsMember({"bridge", "example", "incompatible"}))
      ->capture_default_str();
  ga->add_option("--n", gauss.ranks, "Truncation ranks of the diagonal example")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ga->add_option("--check-tol", gauss.check_tol)->capture_default_str();

  SpectrumArgs spec;
  auto *s = app.add_subcommand("spectrum", "Extreme eigenvalues of whitened sample covariances");
  s->add_option("--n", spec.n, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--J", spec.sample_count, "Samples")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--seeds", spec.seeds)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--distribution", spec.distribution)
      ->check(CLI::IsMember({"normal", "rademacher"}))
      ->capture_default_str();

  GenArgs gen;
  auto *gn = app.add_subcommand("gen", "Write a corpus JointSpec, or samples drawn from it");
  add_source(gn, gen.src, false);
  gn->add_option("--samples", gen.samples, "Draw this many samples (CSV x_label,y_label)");
  gn->add_option("--manifest", gen.manifest, "Sidecar manifest path (default: <out>.manifest.json)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kPass : kInvalidSpec;
  }

  try {
    const Tolerance tol(g.rtol, g.atol);
    const Emitter emit(g, out);
    if (*v) return cmd_verify(verify, g, tol, emit);
    if (*c) return cmd_convergence(conv, g, tol, emit);
    if (*e) return cmd_empirical(emp, g, tol, emit);
    if (*ga) {
      if (gauss.mode == "bridge") return gaussian_bridge(gauss, g, tol, emit);
      if (gauss.mode == "incompatible") return gaussian_incompatible(g, tol, emit);
      return gaussian_example(gauss, g, tol, emit);
    }
    if (*s) return cmd_spectrum(spec, g, emit);
    if (*gn) return cmd_gen(gen, g, emit);
  } catch (const InvalidSpec &ex) {
    err << "invalid spec: " << ex.what() << "\n";
    return kInvalidSpec;
  } catch (const RankOutOfBounds &ex) {
    err << "invalid argument: " << ex.what() << "\n";
    return kInvalidSpec;
  } catch (const std::exception &ex) {
    err << "error: " << ex.what() << "\n";
    return kCheckFailure;
  }
  return kInvalidSpec;
}

} // namespace cmekit::cli
