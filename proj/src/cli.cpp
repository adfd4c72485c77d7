#include "tnperm/cli.hpp"

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tnperm/errors.hpp"
#include "tnperm/experiments.hpp"
#include "tnperm/oracle.hpp"
#include "tnperm/recover.hpp"
#include "tnperm/seeding.hpp"
#include "tnperm/serialize.hpp"

namespace tnperm {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20240611;

/// Options shared by the experiment-style subcommands. Only flags the user
/// actually passed override the config file.
struct ExperimentFlags {
  std::string config;
  std::string mode;
  int d = 0;
  std::vector<int> n, r;
  int R = 0;
  int voters = 0;
  std::vector<double> sigma;
  int trials = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string profile;
  std::string rank_mode;
  double beta = 0.0;
  std::string baseline_tol;
  int threads = 0;
  std::string out = "results";
  bool entropy = false;
  std::vector<CLI::Option*> given;
};

void add_experiment_flags(CLI::App* sub, ExperimentFlags& f, bool with_mode) {
  auto track = [&](CLI::Option* o) { f.given.push_back(o); };
  sub->add_option("--config", f.config, "JSON file mirroring the flag names")->check(CLI::ExistingFile);
  if (with_mode) track(sub->add_option("--mode", f.mode, "ring, train, potts or baseline"));
  track(sub->add_option("--d", f.d, "tensor order"));
  track(sub->add_option("--n", f.n, "physical dims: scalar or comma list")->delimiter(','));
  track(sub->add_option("--r", f.r, "bond dims: scalar or comma list")->delimiter(','));
  track(sub->add_option("--R", f.R, "rank parameter"));
  track(sub->add_option("--voters", f.voters, "odd number of voters per order test"));
  track(sub->add_option("--sigma", f.sigma, "noise grid, comma list")->delimiter(','));
  track(sub->add_option("--trials", f.trials, "trials per grid point"));
  track(sub->add_option("--seed", f.seed, "master seed"));
  track(sub->add_option("--profile", f.profile, "full_rank or near_deficient"));
  track(sub->add_option("--rank-mode", f.rank_mode, "singular_value or exact_rank"));
  track(sub->add_option("--beta", f.beta, "Potts inverse temperature"));
  track(sub->add_option("--baseline-tol", f.baseline_tol, "baseline rank rule: standard or noise_floor"));
  track(sub->add_option("--threads", f.threads, "worker threads, 0 = all cores"));
  sub->add_option("--out", f.out, "output directory");
  sub->add_flag("--seed-from-entropy", f.entropy, "draw the master seed from the system entropy source");
}

bool given(const ExperimentFlags& f, const char* name) {
  for (const CLI::Option* o : f.given) {
    if (o->get_name() == name && o->count() > 0) return true;
  }
  return false;
}

TrialConfig build_config(const ExperimentFlags& f, std::optional<TrialMode> forced) {
  json file;
  if (!f.config.empty()) file = read_json_file(f.config);
  TrialMode mode = TrialMode::ring;
  if (forced) {
    mode = *forced;
  } else if (given(f, "--mode")) {
    mode = parse_trial_mode(f.mode);
  } else if (file.is_object() && file.contains("mode")) {
    mode = parse_trial_mode(file.at("mode").get<std::string>());
  }
  TrialConfig cfg = default_config(mode);
  if (!file.is_null()) cfg = trial_config_from_json(file, cfg);
  cfg.mode = mode;
  if (given(f, "--d")) cfg.d = f.d;
  if (given(f, "--n")) cfg.n = f.n;
  if (given(f, "--r")) cfg.r = f.r;
  if (given(f, "--R")) cfg.R = f.R;
  if (given(f, "--voters")) cfg.voters = f.voters;
  if (given(f, "--sigma")) cfg.sigma = f.sigma;
  if (given(f, "--trials")) cfg.trials = f.trials;
  if (given(f, "--seed")) cfg.seed = f.seed;
  if (given(f, "--profile")) cfg.profile = parse_profile(f.profile);
  if (given(f, "--rank-mode")) cfg = trial_config_from_json(json{{"rank_mode", f.rank_mode}}, cfg);
  if (given(f, "--beta")) cfg.beta = f.beta;
  if (given(f, "--baseline-tol")) cfg = trial_config_from_json(json{{"baseline_tol", f.baseline_tol}}, cfg);
  if (given(f, "--threads")) cfg.threads = f.threads;
  if (f.entropy) cfg.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  cfg.validate();
  return cfg;
}

SuccessCurve run_curve(const TrialConfig& cfg, const fs::path& csv, std::ostream& err) {
  CurveOptions opts;
  opts.checkpoint = csv;
  opts.on_point = [&](const CurvePoint& p) {
    err << fmt::format("sigma_e={:.6g} rate={:.4f} ({}/{}, undecided {})\n", p.sigma_e, p.rate(), p.successes,
                       p.trials, p.undecided);
  };
  return success_curve(cfg, opts);
}

struct RecoverFlags {
  std::string cores;
  int R = 2;
  int voters = 1;
  double sigma = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::string rank_mode = "singular_value";
  std::vector<int> axes;
  std::string out;
};

void add_recover_flags(CLI::App* sub, RecoverFlags& f) {
  sub->add_option("--cores", f.cores, "core stack JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--R", f.R, "rank parameter");
  sub->add_option("--voters", f.voters, "odd number of voters per order test");
  sub->add_option("--sigma", f.sigma, "observation noise standard deviation");
  sub->add_option("--seed", f.seed, "seed for background draws and noise");
  sub->add_option("--rank-mode", f.rank_mode, "singular_value or exact_rank");
  sub->add_option("--out", f.out, "also write the JSON result to this file");
}

RecoveryConfig recovery_config(const RecoverFlags& f) {
  RecoveryConfig cfg;
  cfg.R = f.R;
  cfg.voters = f.voters;
  cfg.seed = f.seed;
  if (f.rank_mode == "exact_rank") {
    cfg.rank_mode = RankMode::exact_rank;
  } else if (f.rank_mode != "singular_value") {
    throw DomainError(fmt::format("unknown rank mode '{}'", f.rank_mode));
  }
  cfg.validate();
  return cfg;
}

std::shared_ptr<EntryOracle> load_oracle(const RecoverFlags& f) {
  const CoreStack stack = core_stack_from_json(read_json_file(f.cores));
  return make_noisy_oracle(make_exact_oracle(stack), f.sigma, derive_seed(f.seed, {2}));
}

void emit_json(const json& j, const RecoverFlags& f, std::ostream& out) {
  out << j.dump() << '\n';
  if (!f.out.empty()) write_json_file(f.out, j);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recover the hidden loop or path order of a tensor ring / tensor train from entry queries"};
  app.require_subcommand(1);

  RecoverFlags rec;
  auto* ring = app.add_subcommand("recover-ring", "recover the loop order from a saved core stack");
  auto* train = app.add_subcommand("recover-train", "recover the path order from a saved core stack");
  add_recover_flags(ring, rec);
  add_recover_flags(train, rec);

  auto* order4 = app.add_subcommand("order4", "cyclic order of four axes");
  auto* order3 = app.add_subcommand("order3", "linear order of three axes");
  add_recover_flags(order4, rec);
  add_recover_flags(order3, rec);
  order4->add_option("--axes", rec.axes, "four distinct axes")->required()->delimiter(',')->expected(4);
  order3->add_option("--axes", rec.axes, "three distinct axes")->required()->delimiter(',')->expected(3);

  ExperimentFlags exp, potts, cmp;
  auto* experiment = app.add_subcommand("experiment", "success rate vs noise level");
  add_experiment_flags(experiment, exp, true);
  auto* potts_cmd = app.add_subcommand("potts", "loop recovery on Potts free energies");
  add_experiment_flags(potts_cmd, potts, false);
  auto* compare = app.add_subcommand("baseline-compare", "path recovery vs the greedy rank baseline");
  add_experiment_flags(compare, cmp, false);

  std::string sc_mode = "ring", sc_profile = "full_rank", sc_out;
  int sc_d = 8;
  std::vector<int> sc_n{4}, sc_r{3};
  std::uint64_t sc_seed = kDefaultSeed;
  auto* sample = app.add_subcommand("sample-cores", "write a random core stack with a random hidden order");
  sample->add_option("--mode", sc_mode, "ring or train");
  sample->add_option("--d", sc_d, "tensor order");
  sample->add_option("--n", sc_n, "physical dims")->delimiter(',');
  sample->add_option("--r", sc_r, "bond dims")->delimiter(',');
  sample->add_option("--profile", sc_profile, "full_rank or near_deficient");
  sample->add_option("--seed", sc_seed, "seed");
  sample->add_option("--out", sc_out, "output JSON file")->required();

  std::string ca_mode = "ring";
  int ca_d = 8, ca_R = 2;
  std::vector<int> ca_n{4}, ca_r{3}, ca_perm;
  auto* check = app.add_subcommand("check-assumptions", "check the dimension conditions for exact recovery");
  check->add_option("--mode", ca_mode, "ring or train");
  check->add_option("--d", ca_d, "tensor order");
  check->add_option("--n", ca_n, "physical dims")->delimiter(',');
  check->add_option("--r", ca_r, "bond dims")->delimiter(',');
  check->add_option("--R", ca_R, "rank parameter");
  check->add_option("--perm", ca_perm, "chain order (default identity)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ring->parsed() || train->parsed()) {
      const auto oracle = load_oracle(rec);
      RecoveryTrace trace;
      const Permutation p = ring->parsed() ? recover_ring(*oracle, recovery_config(rec), &trace)
                                           : recover_train(*oracle, recovery_config(rec), &trace);
      emit_json(json{{"perm", p.images()},
                     {"class_witnesses", trace.decisions},
                     {"order_calls", trace.order_calls},
                     {"queries", oracle->stats().count}},
                rec, out);
      return 0;
    }
    if (order4->parsed()) {
      const auto oracle = load_oracle(rec);
      const RecoveryConfig cfg = recovery_config(rec);
      const auto o = order_four_tr(*oracle, {rec.axes[0], rec.axes[1], rec.axes[2], rec.axes[3]}, cfg, cfg.seed);
      emit_json(json{{"order", o.tuple}, {"queries", oracle->stats().count}}, rec, out);
      return 0;
    }
    if (order3->parsed()) {
      const auto oracle = load_oracle(rec);
      const RecoveryConfig cfg = recovery_config(rec);
      const auto o = order_three_tt(*oracle, {rec.axes[0], rec.axes[1], rec.axes[2]}, cfg, cfg.seed);
      emit_json(json{{"order", o.tuple}, {"queries", oracle->stats().count}}, rec, out);
      return 0;
    }
    if (experiment->parsed() || potts_cmd->parsed()) {
      const bool is_potts = potts_cmd->parsed();
      const ExperimentFlags& f = is_potts ? potts : exp;
      const TrialConfig cfg = build_config(f, is_potts ? std::optional(TrialMode::potts) : std::nullopt);
      const fs::path dir = f.out;
      const std::string stem = to_string(cfg.mode);
      const SuccessCurve curve = run_curve(cfg, dir / (stem + ".csv"), err);
      write_svg(dir / (stem + ".svg"), {curve}, fmt::format("{} recovery, d = {}", stem, cfg.d));
      write_json_file(dir / (stem + ".config.json"), to_json(cfg));
      out << format_csv(curve);
      return 0;
    }
    if (compare->parsed()) {
      TrialConfig proposed = build_config(cmp, TrialMode::train);
      const bool d_in_file = !cmp.config.empty() && read_json_file(cmp.config).contains("d");
      if (!given(cmp, "--d") && !d_in_file) proposed.d = default_config(TrialMode::baseline).d;
      if (!given(cmp, "--voters")) proposed.voters = 5;
      proposed.validate();
      TrialConfig baseline = proposed;
      baseline.mode = TrialMode::baseline;
      const fs::path dir = cmp.out;
      SuccessCurve a = run_curve(proposed, dir / "proposed.csv", err);
      SuccessCurve b = run_curve(baseline, dir / "baseline.csv", err);
      a.label = fmt::format("ternary insertion, {} voters", proposed.voters);
      b.label = "greedy rank baseline";
      write_svg(dir / "compare.svg", {a, b}, fmt::format("path recovery, d = {}", proposed.d));
      write_json_file(dir / "compare.config.json", to_json(proposed));
      out << "# proposed\n" << format_csv(a) << "# baseline\n" << format_csv(b);
      return 0;
    }
    if (sample->parsed()) {
      const Mode mode = parse_mode(sc_mode);
      const PhysicalDims dims = sc_n.size() == 1 ? PhysicalDims::uniform(sc_d, sc_n[0]) : PhysicalDims(sc_n);
      const BondDims bonds = sc_r.size() != 1       ? BondDims(sc_r)
                             : mode == Mode::train ? BondDims::train(sc_d, sc_r[0])
                                                   : BondDims::uniform(sc_d, sc_r[0]);
      std::mt19937_64 rng(sc_seed);
      const Permutation tau = Permutation::random(sc_d, rng);
      const CoreStack stack = sample_cores(dims, bonds, tau, mode, parse_profile(sc_profile), rng());
      write_json_file(sc_out, to_json(stack));
      out << json{{"perm", tau.images()}}.dump() << '\n';
      return 0;
    }
    if (check->parsed()) {
      const Mode mode = parse_mode(ca_mode);
      const PhysicalDims dims = ca_n.size() == 1 ? PhysicalDims::uniform(ca_d, ca_n[0]) : PhysicalDims(ca_n);
      const BondDims bonds = ca_r.size() != 1       ? BondDims(ca_r)
                             : mode == Mode::train ? BondDims::train(ca_d, ca_r[0])
                                                   : BondDims::uniform(ca_d, ca_r[0]);
      const Permutation perm = ca_perm.empty() ? Permutation::identity(ca_d) : Permutation(ca_perm);
      const AssumptionReport report = check_assumptions(dims, bonds, ca_R, mode, perm);
      out << report.to_string();
      return report.all_pass() ? 0 : 1;
    }
  } catch (const UndecidableError& e) {
    err << "undecidable: " << e.what() << '\n';
    return 3;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tnperm
