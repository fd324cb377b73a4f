#include "cmd/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "cmd/error.hpp"

namespace cmd {

namespace {

// Seed stream tags for the independent random streams of one run.
constexpr std::uint64_t kStreamInitA = 101;
constexpr std::uint64_t kStreamInitB = 102;
constexpr std::uint64_t kStreamShuffleBase = 200;
constexpr std::uint64_t kStreamNoise = 300;

struct Dataset {
  NoisySplit train;
  NoisySplit test;
  std::size_t classes = 0;
};

Dataset build_dataset(const ExperimentConfig& config) {
  Dataset data;
  if (const auto* csv = std::get_if<CsvSpec>(&config.dataset)) {
    data.train = load_split_csv(csv->train_path);
    data.test = load_split_csv(csv->test_path);
    if (data.train.dim() != data.test.dim())
      throw ConfigError("dataset.test", "feature dimension differs from train");
    data.classes = std::max(data.train.classes, data.test.classes);
    data.train.classes = data.classes;
    data.test.classes = data.classes;
  } else {
    const auto& blobs = std::get<BlobsSpec>(config.dataset);
    SplitPair pair =
        make_blobs_pair(blobs.classes, blobs.per_class, blobs.test_per_class,
                        blobs.dim, blobs.spread, blobs.seed);
    data.train = std::move(pair.train);
    data.test = std::move(pair.test);
    data.classes = blobs.classes;
  }

  if (config.noise.kind != NoiseKind::None) {
    NoiseSpec spec = config.noise;
    if (spec.seed == 0) spec.seed = derive_seed(config.seed, kStreamNoise);
    data.train.noisy = inject_noise(data.train.clean, data.classes, spec);
    data.train.noise = spec;
  }
  return data;
}

std::vector<int> predict_labels(const MlpModel& model, const Matrix& features) {
  Matrix logits = forward(model, features);
  std::vector<int> out(logits.rows);
  for (std::size_t i = 0; i < logits.rows; ++i)
    out[i] = static_cast<int>(ndmath::argmax(logits.row(i), logits.cols));
  return out;
}

double accuracy_of(const std::vector<int>& predicted,
                   const std::vector<int>& labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (predicted[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

void format_csv_row(std::string& out, const EpochRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                "%.12g,%zu,%zu,%.12g,%.12g\n",
                r.epoch, r.lr, r.test_acc_a, r.test_acc_b, r.train_noisy_acc_a,
                r.train_noisy_acc_b, r.train_clean_acc_a, r.train_clean_acc_b,
                r.mean_eps_a, r.mean_eps_b, r.chi, r.count_a2b, r.count_b2a,
                r.loss_a, r.loss_b);
  out = buf;
}

constexpr const char* kMetricsHeader =
    "epoch,lr,test_acc_a,test_acc_b,train_noisy_acc_a,train_noisy_acc_b,"
    "train_clean_acc_a,train_clean_acc_b,mean_eps_a,mean_eps_b,chi,"
    "count_a2b,count_b2a,loss_a,loss_b\n";

Learner make_learner(const ExperimentConfig& config, std::size_t input_dim,
                     std::size_t classes, const TrustParams& trust,
                     std::uint64_t init_stream) {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), config.model.hidden.begin(),
              config.model.hidden.end());
  dims.push_back(classes);
  Rng rng(derive_seed(config.seed, init_stream));
  Learner learner;
  learner.model = make_mlp(dims, rng);
  learner.opt = make_sgd(learner.model, config.optimizer.lr,
                         config.optimizer.momentum,
                         config.optimizer.weight_decay);
  learner.trust = trust;
  return learner;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
  Matrix out(end - begin, src.cols);
  for (std::size_t i = begin; i < end; ++i)
    std::copy_n(src.row(order[i]), src.cols, out.row(i - begin));
  return out;
}

}  // namespace

double RunMetrics::final_mean_acc() const {
  if (epochs.empty()) return 0.0;
  const EpochRecord& last = epochs.back();
  return 0.5 * (last.test_acc_a + last.test_acc_b);
}

double evaluate(const MlpModel& model, const Matrix& features,
                const std::vector<int>& labels) {
  if (features.rows == 0) throw InvalidInput("evaluate: empty set");
  if (features.rows != labels.size())
    throw InvalidInput("evaluate: label count mismatch");
  return accuracy_of(predict_labels(model, features), labels);
}

RunMetrics run_experiment(const ExperimentConfig& config,
                          const RunHooks* hooks) {
  validate(config);
  Dataset data = build_dataset(config);
  std::size_t n = data.train.size();
  if (n == 0) throw ConfigError("dataset", "empty training set");

  SelectionPolicy policy = config.selection;
  policy.gamma = config.epochs;
  policy.classes = data.classes;
  if (config.algo == MkdAlgo::Cmd) validate(policy);

  LrSchedule schedule{config.optimizer.lr, config.optimizer.milestones,
                      config.optimizer.decay_factor};

  Learner a = make_learner(config, data.train.dim(), data.classes,
                           config.trust_a, kStreamInitA);
  Learner b = make_learner(config, data.train.dim(), data.classes,
                           config.trust_b, kStreamInitB);

  std::ofstream csv;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::string path = config.out_dir + "/metrics.csv";
    csv.open(path, std::ios::binary);
    if (!csv) throw ConfigError("out_dir", "cannot write " + path);
    csv << kMetricsHeader;
    csv.flush();
  }

  RunMetrics metrics;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t iteration = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    StepContext ctx{epoch, config.epochs, lr_at(schedule, epoch)};
    Rng shuffle_rng(derive_seed(config.seed, kStreamShuffleBase +
                                                 static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    double chi = config.algo == MkdAlgo::Cmd ? threshold(policy, epoch) : 0.0;
    double loss_sum_a = 0.0, loss_sum_b = 0.0;
    double eps_sum_a = 0.0, eps_sum_b = 0.0;
    std::size_t count_a2b = 0, count_b2a = 0;

    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      std::size_t end = std::min(n, begin + config.batch_size);
      Matrix features = gather_rows(data.train.features, order, begin, end);
      std::vector<int> labels(end - begin);
      for (std::size_t i = begin; i < end; ++i)
        labels[i - begin] = data.train.noisy[order[i]];
      ++iteration;

      DistillBatchResult step;
      try {
        switch (config.algo) {
          case MkdAlgo::Cmd:
            step = cmd_batch(a, b, features, labels, policy, ctx);
            break;
          case MkdAlgo::SyncMkd:
            step = sync_mkd_batch(a, b, features, labels, config.eps_mkd, ctx);
            break;
          case MkdAlgo::AsyncMkd:
            step = async_mkd_step(a, b, features, labels, iteration,
                                  config.eps_mkd, ctx);
            break;
          case MkdAlgo::T2S:
            step = t2s_batch(a, b, features, labels, config.eps_mkd, ctx);
            break;
          case MkdAlgo::Independent:
            step = independent_batch(a, b, features, labels, ctx);
            break;
        }
      } catch (const InvalidInput& e) {
        throw DivergedError(epoch, e.what());
      }
      if (!std::isfinite(step.loss_a) || !std::isfinite(step.loss_b))
        throw DivergedError(epoch, "non-finite loss");

      double weight = static_cast<double>(end - begin);
      loss_sum_a += step.loss_a * weight;
      loss_sum_b += step.loss_b * weight;
      eps_sum_a += step.mean_eps_a * weight;
      eps_sum_b += step.mean_eps_b * weight;
      count_a2b += step.count_a2b;
      count_b2a += step.count_b2a;
    }

    std::vector<int> train_pred_a = predict_labels(a.model, data.train.features);
    std::vector<int> train_pred_b = predict_labels(b.model, data.train.features);

    EpochRecord record;
    record.epoch = epoch;
    record.lr = ctx.lr;
    record.test_acc_a = evaluate(a.model, data.test.features, data.test.clean);
    record.test_acc_b = evaluate(b.model, data.test.features, data.test.clean);
    record.train_noisy_acc_a = accuracy_of(train_pred_a, data.train.noisy);
    record.train_noisy_acc_b = accuracy_of(train_pred_b, data.train.noisy);
    record.train_clean_acc_a = accuracy_of(train_pred_a, data.train.clean);
    record.train_clean_acc_b = accuracy_of(train_pred_b, data.train.clean);
    record.mean_eps_a = eps_sum_a / static_cast<double>(n);
    record.mean_eps_b = eps_sum_b / static_cast<double>(n);
    record.chi = chi;
    record.count_a2b = count_a2b;
    record.count_b2a = count_b2a;
    record.loss_a = loss_sum_a / static_cast<double>(n);
    record.loss_b = loss_sum_b / static_cast<double>(n);
    metrics.epochs.push_back(record);

    if (csv.is_open()) {
      std::string row;
      format_csv_row(row, record);
      csv << row;
      csv.flush();
    }
    if (hooks && hooks->on_epoch_end) hooks->on_epoch_end(epoch, a, b);
  }
  return metrics;
}

namespace {

struct SweepCell {
  double eta;
  double b2;
  double noise_rate;
  std::string method;
  bool has_eta, has_b2, has_rate, has_method;
};

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell,
                             std::uint64_t seed, const std::string& cell_id) {
  ExperimentConfig config = base;
  if (cell.has_eta) config.selection.eta = cell.eta;
  if (cell.has_b2) config.selection.b2 = cell.b2;
  if (cell.has_rate) config.noise.rate = cell.noise_rate;
  if (cell.has_method) {
    TrustMethod method = trust_method_from_string(cell.method);
    config.trust_a.method = method;
    config.trust_b.method = method;
  }
  config.seed = seed;
  if (!base.out_dir.empty())
    config.out_dir =
        base.out_dir + "/" + cell_id + "/seed" + std::to_string(seed);
  return config;
}

}  // namespace

std::vector<SweepCellResult> run_sweep(const ExperimentConfig& base,
                                       const SweepGrid& grid,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::string& summary_path,
                                       int workers) {
  if (seeds.empty()) throw InvalidInput("run_sweep: need at least one seed");
  if (workers < 1) throw InvalidInput("run_sweep: workers must be >= 1");

  std::vector<double> etas = grid.eta.empty()
                                 ? std::vector<double>{base.selection.eta}
                                 : grid.eta;
  std::vector<double> b2s =
      grid.b2.empty() ? std::vector<double>{base.selection.b2} : grid.b2;
  std::vector<double> rates = grid.noise_rate.empty()
                                  ? std::vector<double>{base.noise.rate}
                                  : grid.noise_rate;
  std::vector<std::string> methods =
      grid.method.empty() ? std::vector<std::string>{to_string(base.trust_a.method)}
                          : grid.method;

  std::vector<SweepCell> cells;
  for (double eta : etas)
    for (double b2 : b2s)
      for (double rate : rates)
        for (const std::string& method : methods)
          cells.push_back({eta, b2, rate, method, !grid.eta.empty(),
                           !grid.b2.empty(), !grid.noise_rate.empty(),
                           !grid.method.empty()});

  std::vector<SweepCellResult> results(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const SweepCell& cell = cells[idx];
      char id[16];
      std::snprintf(id, sizeof id, "c%03zu", idx);

      SweepCellResult result;
      result.cell_id = id;
      result.eta = cell.eta;
      result.b2 = cell.b2;
      result.noise_kind = base.noise.kind;
      result.noise_rate = cell.noise_rate;
      result.method = cell.method;

      std::vector<double> finals;
      for (std::uint64_t seed : seeds) {
        try {
          ExperimentConfig config = cell_config(base, cell, seed, id);
          finals.push_back(run_experiment(config).final_mean_acc());
        } catch (const std::exception&) {
          // Failed seeds are simply not counted; the cell reports how many
          // completed.
        }
      }
      result.seed_count = finals.size();
      if (finals.empty()) {
        result.failed = true;
        result.mean_final_acc = std::nan("");
        result.std_final_acc = std::nan("");
      } else {
        double mean = std::accumulate(finals.begin(), finals.end(), 0.0) /
                      static_cast<double>(finals.size());
        double var = 0.0;
        for (double v : finals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(finals.size());
        result.mean_final_acc = mean;
        result.std_final_acc = std::sqrt(var);
      }
      results[idx] = std::move(result);
    }
  };

  if (workers == 1 || cells.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    int count = std::min<std::size_t>(workers, cells.size());
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  if (!summary_path.empty()) write_summary_csv(results, summary_path);
  return results;
}

void write_summary_csv(const std::vector<SweepCellResult>& cells,
                       const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("write_summary_csv: cannot open " + path);
  out << "cell_id,eta,b2,noise_kind,noise_rate,method,seed_count,"
         "mean_final_acc,std_final_acc\n";
  char buf[256];
  for (const SweepCellResult& cell : cells) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%s,%.12g,%s,%zu,%.12g,%.12g\n",
                  cell.cell_id.c_str(), cell.eta, cell.b2,
                  to_string(cell.noise_kind).c_str(), cell.noise_rate,
                  cell.method.c_str(), cell.seed_count, cell.mean_final_acc,
                  cell.std_final_acc);
    out << buf;
  }
  if (!out) throw InvalidInput("write_summary_csv: write failed for " + path);
}

}  // namespace cmd
