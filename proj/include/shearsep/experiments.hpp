#pragma once

// Monte-Carlo experiments: configuration, execution and reports.

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shearsep/fields.hpp"
#include "shearsep/flow.hpp"
#include "shearsep/noise.hpp"

namespace shearsep::experiments {

enum class ExperimentKind { SingleScale, RescaledBlock, Multiscale, Explosive, NonuniquenessDemo, HeuristicScaling };

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct NoiseConfig {
  noise::NoiseKind kind = noise::Brownian{};
  double amplitude = 1.0;
  /// Grid cells per block of the finest simulated scale.
  int cells_per_block = 8;
  /// Refuse grids with more nodes than this (CapacityError).
  std::size_t max_nodes = std::size_t{1} << 26;
};

struct SingleScaleSweep {
  std::vector<std::int64_t> blocks{100, 1000, 10000};
  double L = 1.0;
  double read_separation = 4.0;
  /// Gauss nodes per noise cell for the per-block second moments.
  int moment_nodes = 16;
  /// Also compute the normalised sums for the CLT comparison.
  bool clt = true;
};

struct RescaledSetting {
  double exponent = 0.25;  // rho or alpha
  int n = 4;
};
struct RescaledSweep {
  std::vector<RescaledSetting> settings;
  /// Hölder exponent of the noise norm for v^alpha thresholds.
  double beta = 1.0;
  /// Trials rerun with the direct seed in the twin to check the scaling pathwise.
  int pathwise_trials = 16;
};

struct ScalePair {
  int m = 8;  // start at T^m
  int n = 8;  // read at T^n
};
struct MultiscaleSweep {
  std::vector<ScalePair> pairs;
  /// Initial separation as a multiple of 2^(-m+2).
  double separation_factor = 1.0;
  double beta = 1.0;
  /// Lower bound on every per-scale doubling frequency.
  double doubling_floor = 0.8;
};

struct ExplosiveSweep {
  std::vector<int> n;
  std::vector<double> delta;
  std::vector<double> r;
  std::vector<int> m;
};

struct DemoSweep {
  int n = 4;
  std::vector<int> m;
  int directions = 16;
  Vec2 origin;
  /// Order in which fan members are launched (identity if empty).
  std::vector<int> launch_order;
};

struct HeuristicSweep {
  std::vector<std::int64_t> blocks{100, 1000, 10000};
  double read_separation = 4.0;
  double gain_ratio = 2.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SingleScale;
  fields::FieldParams field;
  NoiseConfig noise;
  std::int64_t trials = 1000;
  /// Trials sharing one frozen noise path; 0 means all of them, 1 is annealed.
  std::int64_t batch_size = 0;
  std::uint64_t field_seed = 1;
  std::uint64_t noise_seed = 2;
  flow::IntegratorConfig integrator;
  bool override_preconditions = false;
  /// Worker threads (0: OpenMP default, capped by SHEARSEP_THREADS).
  int threads = 0;
  /// Collect per-trial traces for the first few trials.
  bool trace = false;

  SingleScaleSweep single_scale;
  RescaledSweep rescaled;
  MultiscaleSweep multiscale;
  ExplosiveSweep explosive;
  DemoSweep demo;
  HeuristicSweep heuristic;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& cfg);

using Labelled = std::vector<std::pair<std::string, double>>;

/// One row of the result table.
struct SweepPoint {
  std::string label;
  Labelled params;
  double estimate = 0.0;
  double se = 0.0;
  /// Closed-form bound (NaN when the experiment has none).
  double bound = std::numeric_limits<double>::quiet_NaN();
  bool vacuous = false;
  Labelled extra;

  /// Value of a parameter or extra column; throws std::out_of_range if absent.
  double get(const std::string& key) const;
};

struct Verdict {
  std::string id;
  std::string description;
  bool passed = false;
  double value = 0.0;
};

struct TraceFile {
  std::string name;
  std::string contents;
};

struct ExperimentReport {
  ExperimentKind experiment = ExperimentKind::SingleScale;
  fields::FieldParams field;
  std::uint64_t spec_hash = 0;
  std::uint64_t field_seed = 0;
  std::uint64_t noise_seed = 0;
  std::int64_t trials = 0;
  std::vector<SweepPoint> points;
  std::vector<Verdict> verdicts;
  Labelled summary;
  double runtime_seconds = 0.0;
  std::vector<TraceFile> traces;

  bool all_passed() const;
  const Verdict& verdict(const std::string& id) const;
  double summary_value(const std::string& key) const;
};

/// Report as JSON; runtime is omitted when include_runtime is false so that
/// reruns can be compared byte for byte.
std::string report_json(const ExperimentReport& report, bool include_runtime = true);
/// CSV `label,<params>,estimate,stderr,bound,clamped,vacuous,<extras>`.
std::string table_csv(const ExperimentReport& report);

ExperimentReport run_single_scale(const ExperimentConfig& cfg);
ExperimentReport run_rescaled_block(const ExperimentConfig& cfg);
ExperimentReport run_multiscale(const ExperimentConfig& cfg);
ExperimentReport run_explosive(const ExperimentConfig& cfg);
ExperimentReport run_nonuniqueness_demo(const ExperimentConfig& cfg);
ExperimentReport run_heuristic_scaling(const ExperimentConfig& cfg);
/// Dispatch on cfg.experiment.
ExperimentReport run(const ExperimentConfig& cfg);

/// Noise path of the configured kind on a grid of step dt covering [t0, t1].
noise::NoisePath make_noise(const NoiseConfig& cfg, std::uint64_t seed, double t0, double t1, double dt);

}  // namespace shearsep::experiments
