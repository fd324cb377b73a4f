#pragma once

// Experiment orchestration: dataset preparation, the per-epoch training
// loop, evaluation, metrics persistence, and hyper-parameter sweeps.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cmd/labelspace.hpp"
#include "cmd/mkd.hpp"
#include "cmd/ndmath.hpp"
#include "cmd/nn.hpp"
#include "cmd/selection.hpp"
#include "cmd/selfkd.hpp"

namespace cmd {

struct BlobsSpec {
  std::size_t classes = 10;
  std::size_t per_class = 500;
  std::size_t test_per_class = 200;
  std::size_t dim = 8;
  double spread = 1.0;
  std::uint64_t seed = 1;
};

struct CsvSpec {
  std::string train_path;
  std::string test_path;
};

struct ModelSpec {
  std::vector<std::size_t> hidden = {64, 64};
};

struct OptimizerSpec {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<int> milestones = {50, 80};
  double decay_factor = 0.1;
};

struct ExperimentConfig {
  std::variant<BlobsSpec, CsvSpec> dataset = BlobsSpec{};
  NoiseSpec noise;
  ModelSpec model;
  OptimizerSpec optimizer;
  TrustParams trust_a;
  TrustParams trust_b;
  MkdAlgo algo = MkdAlgo::Independent;
  double eps_mkd = 0.5;
  SelectionPolicy selection;  // gamma is overwritten with epochs
  int epochs = 100;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;
  std::string out_dir;
};

// Strict JSON parsing: unknown keys, wrong types, and out-of-range values
// raise ConfigError carrying the dotted field path.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);

// Semantic validation (also called by run_experiment). Throws ConfigError.
void validate(const ExperimentConfig& config);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double test_acc_a = 0.0, test_acc_b = 0.0;
  double train_noisy_acc_a = 0.0, train_noisy_acc_b = 0.0;
  double train_clean_acc_a = 0.0, train_clean_acc_b = 0.0;
  double mean_eps_a = 0.0, mean_eps_b = 0.0;
  double chi = 0.0;
  std::size_t count_a2b = 0, count_b2a = 0;
  double loss_a = 0.0, loss_b = 0.0;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;

  // Headline number: mean of both models' final-epoch test accuracy.
  double final_mean_acc() const;
};

// Optional observation points for tests; models are the live training
// instances, valid for the duration of the callback.
struct RunHooks {
  std::function<void(int epoch, const Learner& a, const Learner& b)>
      on_epoch_end;
};

// Fraction of rows whose argmax logit equals the label; ties break toward
// the lowest class index. Throws InvalidInput on an empty set.
double evaluate(const MlpModel& model, const Matrix& features,
                const std::vector<int>& labels);

// Train per config; writes <out_dir>/metrics.csv incrementally when
// out_dir is set. Deterministic given (config, seed). Throws ConfigError on
// invalid config and DivergedError when a loss turns non-finite.
RunMetrics run_experiment(const ExperimentConfig& config,
                          const RunHooks* hooks = nullptr);

// Grid axes for sweeps; empty axes fall back to the base config's value.
struct SweepGrid {
  std::vector<double> eta;
  std::vector<double> b2;
  std::vector<double> noise_rate;
  std::vector<std::string> method;  // self-KD method for both models
};

struct SweepCellResult {
  std::string cell_id;
  double eta = 0.0;
  double b2 = 0.0;
  NoiseKind noise_kind = NoiseKind::None;
  double noise_rate = 0.0;
  std::string method;
  std::size_t seed_count = 0;  // seeds that completed
  double mean_final_acc = 0.0;
  double std_final_acc = 0.0;
  bool failed = false;  // no seed completed
};

// One run per grid point per seed; per-run errors are recorded and the
// remaining grid continues. Writes summary_path when nonempty. Cells run on
// up to `workers` threads.
std::vector<SweepCellResult> run_sweep(const ExperimentConfig& base,
                                       const SweepGrid& grid,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::string& summary_path,
                                       int workers = 1);

void write_summary_csv(const std::vector<SweepCellResult>& cells,
                       const std::string& path);

// Sweep description file: a base experiment config plus grid axes, seeds,
// worker count, and the summary CSV path.
struct SweepConfig {
  ExperimentConfig base;
  SweepGrid grid;
  std::vector<std::uint64_t> seeds = {1};
  int workers = 1;
  std::string summary_path;
};

SweepConfig sweep_from_json_text(const std::string& text);
SweepConfig sweep_from_json_file(const std::string& path);

}  // namespace cmd
