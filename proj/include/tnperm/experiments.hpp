#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnperm/recover.hpp"
#include "tnperm/tensor_core.hpp"

namespace tnperm {

enum class TrialMode { ring, train, potts, baseline };

std::string to_string(TrialMode mode);
/// Accepts "ring", "train", "potts", "baseline", "baseline-compare".
TrialMode parse_trial_mode(const std::string& text);

struct TrialConfig {
  TrialMode mode = TrialMode::ring;
  int d = 8;
  /// One value (uniform) or d values. Potts: the coupling pool size.
  std::vector<int> n{4};
  /// One value (uniform; train forces the outer bond to 1) or d values.
  /// Potts: the number of spin states.
  std::vector<int> r{3};
  int R = 2;
  Profile profile = Profile::full_rank;
  std::vector<double> sigma{0.0};
  int voters = 1;
  int trials = 200;
  std::uint64_t seed = 20240611;
  RankMode rank_mode = RankMode::singular_value;
  /// Potts inverse temperature.
  double beta = 10.0;
  /// Rank rule of the baseline: the standard eps rule, or that rule plus the
  /// expected top singular value of the noise (needs sigma_e to be known).
  bool baseline_noise_floor = false;
  /// Worker threads; 0 = hardware concurrency.
  int threads = 0;

  void validate() const;
  PhysicalDims physical_dims() const;
  BondDims bond_dims() const;
  RecoveryConfig recovery(std::uint64_t seed) const;
};

/// Defaults per mode (grids: ring 0..0.1 step 0.01, train/baseline 0..1 step 0.1,
/// Potts d = 6, pool 5, 3 spins, beta = 10, noiseless).
TrialConfig default_config(TrialMode mode);

nlohmann::json to_json(const TrialConfig& cfg);
/// Missing keys keep the values already in `base`.
TrialConfig trial_config_from_json(const nlohmann::json& j, TrialConfig base);

std::vector<double> linear_grid(double lo, double hi, double step);

struct TrialOutcome {
  bool success = false;
  bool undecided = false;
  std::uint64_t queries = 0;
};

/// One Monte Carlo trial; deterministic in (cfg.seed, sigma_e, trial_index).
TrialOutcome run_trial(const TrialConfig& cfg, int trial_index, double sigma_e);

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

/// 95% Wilson score interval for `successes` out of `trials`.
WilsonInterval wilson_interval(int successes, int trials, double z = 1.959963984540054);

struct CurvePoint {
  double sigma_e = 0.0;
  int trials = 0;
  int successes = 0;
  int undecided = 0;

  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
  WilsonInterval interval() const { return wilson_interval(successes, trials); }
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct SuccessCurve {
  std::string label;
  std::vector<CurvePoint> points;
};

struct CurveOptions {
  /// When set, every finished grid point is appended here, and points already
  /// present with the same trial count are reused instead of recomputed.
  std::optional<std::filesystem::path> checkpoint;
  /// Called after each grid point.
  std::function<void(const CurvePoint&)> on_point;
};

SuccessCurve success_curve(const TrialConfig& cfg, const CurveOptions& opts = {});

std::string format_csv(const SuccessCurve& curve);
void write_csv(const std::filesystem::path& path, const SuccessCurve& curve);
SuccessCurve read_csv(const std::filesystem::path& path);
SuccessCurve parse_csv(const std::string& text);

/// Self-contained SVG line plot of rate vs sigma_e, one polyline per curve.
std::string render_svg(const std::vector<SuccessCurve>& curves, const std::string& title);
void write_svg(const std::filesystem::path& path, const std::vector<SuccessCurve>& curves, const std::string& title);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path svg;
};

/// CSV and SVG for one curve. Empty curve -> DomainError.
void emit_outputs(const SuccessCurve& curve, const OutputPaths& paths);

}  // namespace tnperm
