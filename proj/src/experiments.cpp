#include "tnperm/experiments.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "tnperm/errors.hpp"
#include "tnperm/oracle.hpp"
#include "tnperm/seeding.hpp"

namespace tnperm {

using nlohmann::json;

std::string to_string(TrialMode mode) {
  switch (mode) {
    case TrialMode::ring: return "ring";
    case TrialMode::train: return "train";
    case TrialMode::potts: return "potts";
    case TrialMode::baseline: return "baseline";
  }
  return "?";
}

TrialMode parse_trial_mode(const std::string& text) {
  if (text == "ring" || text == "tr") return TrialMode::ring;
  if (text == "train" || text == "tt") return TrialMode::train;
  if (text == "potts") return TrialMode::potts;
  if (text == "baseline" || text == "baseline-compare" || text == "baseline_compare") return TrialMode::baseline;
  throw DomainError(fmt::format("unknown trial mode '{}'", text));
}

namespace {

void check_list(const std::vector<int>& v, int d, const char* name) {
  if (v.size() != 1 && static_cast<int>(v.size()) != d) {
    throw DomainError(fmt::format("'{}' needs 1 or d = {} values, got {}", name, d, v.size()));
  }
  for (int x : v) {
    if (x < 1) throw DomainError(fmt::format("'{}' values must be >= 1, got {}", name, x));
  }
}

bool is_train_like(TrialMode m) { return m == TrialMode::train || m == TrialMode::baseline; }

}  // namespace

void TrialConfig::validate() const {
  const int min_d = is_train_like(mode) ? 3 : 4;
  if (d < min_d) throw DomainError(fmt::format("'d' = {} must be >= {} for mode {}", d, min_d, to_string(mode)));
  check_list(n, d, "n");
  check_list(r, d, "r");
  if (mode == TrialMode::potts && (n.size() != 1 || r.size() != 1)) {
    throw DomainError("potts mode takes a single pool size 'n' and spin count 'r'");
  }
  if (R < 1) throw DomainError(fmt::format("'R' = {} must be >= 1", R));
  if (voters < 1 || voters % 2 == 0) throw DomainError(fmt::format("'voters' = {} must be odd and >= 1", voters));
  if (trials < 1) throw DomainError(fmt::format("'trials' = {} must be >= 1", trials));
  if (sigma.empty()) throw DomainError("'sigma' grid is empty");
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError(fmt::format("'sigma' value {} must be finite and >= 0", s));
  }
  if (!(beta > 0.0)) throw DomainError(fmt::format("'beta' = {} must be > 0", beta));
  if (threads < 0) throw DomainError(fmt::format("'threads' = {} must be >= 0", threads));
}

PhysicalDims TrialConfig::physical_dims() const {
  if (n.size() == 1) return PhysicalDims::uniform(d, n[0]);
  return PhysicalDims(n);
}

BondDims TrialConfig::bond_dims() const {
  if (r.size() != 1) return BondDims(r);
  return is_train_like(mode) ? BondDims::train(d, r[0]) : BondDims::uniform(d, r[0]);
}

RecoveryConfig TrialConfig::recovery(std::uint64_t s) const {
  RecoveryConfig out;
  out.R = R;
  out.voters = voters;
  out.rank_mode = rank_mode;
  out.seed = s;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw DomainError(fmt::format("bad grid {}:{}:{}", lo, step, hi));
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(std::round((lo + k * step) * 1e12) / 1e12);
  return out;
}

TrialConfig default_config(TrialMode mode) {
  TrialConfig cfg;
  cfg.mode = mode;
  switch (mode) {
    case TrialMode::ring:
      cfg.sigma = linear_grid(0.0, 0.1, 0.01);
      break;
    case TrialMode::train:
      cfg.sigma = linear_grid(0.0, 1.0, 0.1);
      break;
    case TrialMode::baseline:
      cfg.d = 6;
      cfg.sigma = linear_grid(0.0, 1.0, 0.1);
      break;
    case TrialMode::potts:
      cfg.d = 6;
      cfg.n = {5};
      cfg.r = {3};
      cfg.sigma = {0.0};
      break;
  }
  return cfg;
}

json to_json(const TrialConfig& cfg) {
  return json{{"mode", to_string(cfg.mode)},
              {"d", cfg.d},
              {"n", cfg.n},
              {"r", cfg.r},
              {"R", cfg.R},
              {"profile", to_string(cfg.profile)},
              {"sigma", cfg.sigma},
              {"voters", cfg.voters},
              {"trials", cfg.trials},
              {"seed", cfg.seed},
              {"rank_mode", cfg.rank_mode == RankMode::singular_value ? "singular_value" : "exact_rank"},
              {"beta", cfg.beta},
              {"baseline_tol", cfg.baseline_noise_floor ? "noise_floor" : "standard"},
              {"threads", cfg.threads}};
}

TrialConfig trial_config_from_json(const json& j, TrialConfig cfg) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "mode") {
        cfg.mode = parse_trial_mode(value.get<std::string>());
      } else if (key == "d") {
        cfg.d = value.get<int>();
      } else if (key == "n" || key == "r") {
        auto& dst = key == "n" ? cfg.n : cfg.r;
        dst = value.is_array() ? value.get<std::vector<int>>() : std::vector<int>{value.get<int>()};
      } else if (key == "R") {
        cfg.R = value.get<int>();
      } else if (key == "profile") {
        cfg.profile = parse_profile(value.get<std::string>());
      } else if (key == "sigma") {
        cfg.sigma = value.is_array() ? value.get<std::vector<double>>() : std::vector<double>{value.get<double>()};
      } else if (key == "voters") {
        cfg.voters = value.get<int>();
      } else if (key == "trials") {
        cfg.trials = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "rank_mode") {
        const auto s = value.get<std::string>();
        if (s == "singular_value") {
          cfg.rank_mode = RankMode::singular_value;
        } else if (s == "exact_rank") {
          cfg.rank_mode = RankMode::exact_rank;
        } else {
          throw DomainError(fmt::format("unknown rank mode '{}'", s));
        }
      } else if (key == "beta") {
        cfg.beta = value.get<double>();
      } else if (key == "baseline_tol") {
        const auto s = value.get<std::string>();
        if (s != "standard" && s != "noise_floor") throw DomainError(fmt::format("unknown baseline tolerance '{}'", s));
        cfg.baseline_noise_floor = s == "noise_floor";
      } else if (key == "threads") {
        cfg.threads = value.get<int>();
      } else {
        throw DomainError("unknown key");
      }
    } catch (const json::exception& e) {
      throw DomainError(fmt::format("config field '{}': {}", key, e.what()));
    } catch (const DomainError& e) {
      throw DomainError(fmt::format("config field '{}': {}", key, e.what()));
    }
  }
  return cfg;
}

TrialOutcome run_trial(const TrialConfig& cfg, int trial_index, double sigma_e) {
  cfg.validate();
  if (!(sigma_e >= 0.0) || !std::isfinite(sigma_e)) {
    throw DomainError(fmt::format("noise level must be finite and >= 0, got {}", sigma_e));
  }
  if (sigma_e == 0.0) sigma_e = 0.0;  // fold -0.0 into +0.0 for the seed key
  const std::uint64_t trial_seed =
      derive_seed(cfg.seed, {std::bit_cast<std::uint64_t>(sigma_e), static_cast<std::uint64_t>(trial_index)});

  std::mt19937_64 rng(derive_seed(trial_seed, {1}));
  const Permutation tau = Permutation::random(cfg.d, rng);
  const std::uint64_t data_seed = rng();

  std::shared_ptr<EntryOracle> exact;
  Mode mode = is_train_like(cfg.mode) ? Mode::train : Mode::ring;
  if (cfg.mode == TrialMode::potts) {
    PottsSpec spec;
    spec.r = cfg.r[0];
    spec.beta = cfg.beta;
    spec.couplings = sample_coupling_pool(cfg.r[0], cfg.n[0], data_seed);
    spec.tau = tau;
    exact = make_potts_oracle(std::move(spec));
  } else {
    exact = make_exact_oracle(sample_cores(cfg.physical_dims(), cfg.bond_dims(), tau, mode, cfg.profile, data_seed));
  }
  auto oracle = make_noisy_oracle(exact, sigma_e, derive_seed(trial_seed, {2}));

  TrialOutcome out;
  try {
    Permutation found;
    switch (cfg.mode) {
      case TrialMode::ring:
      case TrialMode::potts:
        found = recover_ring(*oracle, cfg.recovery(derive_seed(trial_seed, {3})));
        break;
      case TrialMode::train:
        found = recover_train(*oracle, cfg.recovery(derive_seed(trial_seed, {3})));
        break;
      case TrialMode::baseline:
        found = baseline_tt(*oracle, cfg.baseline_noise_floor ? RankTolerance::noise_floor(sigma_e)
                                                              : RankTolerance::standard());
        break;
    }
    out.success = same_class(found, tau, mode);
  } catch (const UndecidableError&) {
    out.undecided = true;
  }
  out.queries = oracle->stats().count;
  return out;
}

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

CurvePoint run_point(const TrialConfig& cfg, double sigma_e) {
  const int workers = std::max(
      1, std::min(cfg.trials, cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      try {
        outcomes[static_cast<std::size_t>(t)] = run_trial(cfg, t, sigma_e);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.trials;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  CurvePoint p;
  p.sigma_e = sigma_e;
  p.trials = cfg.trials;
  for (const auto& o : outcomes) {
    p.successes += o.success ? 1 : 0;
    p.undecided += o.undecided ? 1 : 0;
  }
  return p;
}

}  // namespace

SuccessCurve success_curve(const TrialConfig& cfg, const CurveOptions& opts) {
  cfg.validate();
  SuccessCurve curve;
  curve.label = to_string(cfg.mode);

  // The CSV keeps 6 significant digits, so reuse is keyed by the printed value.
  std::map<std::string, CurvePoint> done;
  if (opts.checkpoint && std::filesystem::exists(*opts.checkpoint)) {
    for (const CurvePoint& p : read_csv(*opts.checkpoint).points) {
      if (p.trials == cfg.trials) done.emplace(fmt::format("{:.6g}", p.sigma_e), p);
    }
  }
  for (double s : cfg.sigma) {
    auto it = done.find(fmt::format("{:.6g}", s));
    CurvePoint p = it != done.end() ? it->second : run_point(cfg, s);
    p.sigma_e = s;
    curve.points.push_back(p);
    if (opts.checkpoint) write_csv(*opts.checkpoint, curve);
    if (opts.on_point) opts.on_point(p);
  }
  return curve;
}

std::string format_csv(const SuccessCurve& curve) {
  std::string out = "sigma_e,trials,successes,undecided,rate,ci_low,ci_high\n";
  for (const CurvePoint& p : curve.points) {
    const WilsonInterval ci = p.interval();
    out += fmt::format("{:.6g},{},{},{},{:.6g},{:.6g},{:.6g}\n", p.sigma_e, p.trials, p.successes, p.undecided,
                       p.rate(), ci.low, ci.high);
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const SuccessCurve& curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << format_csv(curve);
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

SuccessCurve parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "sigma_e,trials,successes,undecided,rate,ci_low,ci_high") {
    throw DomainError("CSV header does not match sigma_e,trials,successes,undecided,rate,ci_low,ci_high");
  }
  SuccessCurve curve;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw DomainError(fmt::format("CSV line {} has {} fields, expected 7", lineno, f.size()));
    CurvePoint p;
    try {
      p.sigma_e = std::stod(f[0]);
      p.trials = std::stoi(f[1]);
      p.successes = std::stoi(f[2]);
      p.undecided = std::stoi(f[3]);
    } catch (const std::exception&) {
      throw DomainError(fmt::format("CSV line {} is malformed", lineno));
    }
    if (p.trials < 0 || p.successes < 0 || p.successes > p.trials || p.undecided < 0) {
      throw DomainError(fmt::format("CSV line {} has inconsistent counts", lineno));
    }
    curve.points.push_back(p);
  }
  return curve;
}

SuccessCurve read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  SuccessCurve curve = parse_csv(buf.str());
  curve.label = path.stem().string();
  return curve;
}

void write_svg(const std::filesystem::path& path, const std::vector<SuccessCurve>& curves, const std::string& title) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << render_svg(curves, title);
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

void emit_outputs(const SuccessCurve& curve, const OutputPaths& paths) {
  if (curve.points.empty()) throw DomainError("cannot emit an empty curve");
  write_csv(paths.csv, curve);
  write_svg(paths.svg, {curve}, curve.label);
}

}  // namespace tnperm
