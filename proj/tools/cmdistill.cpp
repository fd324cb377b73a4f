// Command-line front end: dataset generation, single training runs,
// hyper-parameter sweeps, and plot-ready curve extraction.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmd/error.hpp"
#include "cmd/harness.hpp"
#include "cmd/labelspace.hpp"

namespace {

struct GenDataArgs {
  std::size_t classes = 10;
  std::size_t per_class = 500;
  std::size_t dim = 8;
  double spread = 1.0;
  std::string noise = "none";
  double rate = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string test_out;
  std::size_t test_per_class = 200;
};

int run_gen_data(const GenDataArgs& args) {
  cmd::NoiseKind kind = cmd::noise_kind_from_string(args.noise);
  if (!(args.rate >= 0.0 && args.rate <= 1.0))
    throw cmd::InvalidInput("--rate must be in [0,1]");

  cmd::NoisySplit train;
  if (args.test_out.empty()) {
    train = cmd::make_blobs(args.classes, args.per_class, args.dim,
                            args.spread, args.seed);
  } else {
    cmd::SplitPair pair =
        cmd::make_blobs_pair(args.classes, args.per_class, args.test_per_class,
                             args.dim, args.spread, args.seed);
    train = std::move(pair.train);
    cmd::save_split_csv(pair.test, args.test_out);
  }
  cmd::NoiseSpec spec{kind, args.rate, cmd::derive_seed(args.seed, 300)};
  train.noisy = cmd::inject_noise(train.clean, args.classes, spec);
  train.noise = spec;
  cmd::save_split_csv(train, args.out);

  nlohmann::json meta;
  meta["classes"] = args.classes;
  meta["per_class"] = args.per_class;
  meta["dim"] = args.dim;
  meta["spread"] = args.spread;
  meta["noise"] = args.noise;
  meta["rate"] = args.rate;
  meta["seed"] = args.seed;
  meta["out"] = args.out;
  if (!args.test_out.empty()) {
    meta["test_out"] = args.test_out;
    meta["test_per_class"] = args.test_per_class;
  }
  std::ofstream side(args.out + ".meta.json", std::ios::binary);
  if (!side)
    throw cmd::InvalidInput("cannot write " + args.out + ".meta.json");
  side << meta.dump(2) << '\n';
  return 0;
}

struct TrainArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& args) {
  cmd::ExperimentConfig config = cmd::config_from_json_file(args.config_path);
  if (args.seed) config.seed = *args.seed;
  cmd::RunMetrics metrics = cmd::run_experiment(config);
  std::printf("final_mean_acc=%.12g\n", metrics.final_mean_acc());
  return 0;
}

int run_sweep_cmd(const std::string& config_path) {
  cmd::SweepConfig sweep = cmd::sweep_from_json_file(config_path);
  std::vector<cmd::SweepCellResult> cells =
      cmd::run_sweep(sweep.base, sweep.grid, sweep.seeds, sweep.summary_path,
                     sweep.workers);
  for (const cmd::SweepCellResult& cell : cells)
    std::printf("%s eta=%g b2=%g rate=%g method=%s seeds=%zu mean=%.6g std=%.6g\n",
                cell.cell_id.c_str(), cell.eta, cell.b2, cell.noise_rate,
                cell.method.c_str(), cell.seed_count, cell.mean_final_acc,
                cell.std_final_acc);
  if (!sweep.summary_path.empty())
    std::printf("summary=%s\n", sweep.summary_path.c_str());
  return 0;
}

struct ReportArgs {
  std::string metrics_path;
  std::string curve;
  std::string out;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

double cell_as_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw cmd::InvalidInput("metrics CSV: bad number '" + s + "'");
  return v;
}

int run_report(const ReportArgs& args) {
  std::ifstream in(args.metrics_path, std::ios::binary);
  if (!in) throw cmd::InvalidInput("cannot open " + args.metrics_path);
  std::string line;
  if (!std::getline(in, line))
    throw cmd::InvalidInput("metrics CSV is empty: " + args.metrics_path);
  std::vector<std::string> header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw cmd::InvalidInput("metrics CSV is missing column " + name);
  };
  std::size_t col_epoch = column("epoch");

  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw cmd::InvalidInput("cannot write " + args.out);
  out << "epoch,value\n";
  char buf[64];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw cmd::InvalidInput("metrics CSV: ragged row");
    double value = 0.0;
    if (args.curve == "acc") {
      value = 0.5 * (cell_as_double(cells[column("test_acc_a")]) +
                     cell_as_double(cells[column("test_acc_b")]));
    } else if (args.curve == "comm") {
      value = cell_as_double(cells[column("count_a2b")]) +
              cell_as_double(cells[column("count_b2a")]);
    } else {
      value = cell_as_double(cells[column("chi")]);
    }
    std::snprintf(buf, sizeof buf, "%s,%.12g\n",
                  cells[col_epoch].c_str(), value);
    out << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confident-knowledge mutual distillation toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-data", "Generate a noisy blobs dataset CSV");
  gen_cmd->add_option("--classes", gen.classes, "Number of classes")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  gen_cmd->add_option("--per-class", gen.per_class, "Training points per class")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dim", gen.dim, "Feature dimension")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--spread", gen.spread, "Cluster standard deviation")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--noise", gen.noise, "Noise kind")
      ->check(CLI::IsMember({"none", "sym", "pairflip"}));
  gen_cmd->add_option("--rate", gen.rate, "Noise rate in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
  gen_cmd->add_option("--test-out", gen.test_out,
                      "Optional clean test split CSV path");
  gen_cmd->add_option("--test-per-class", gen.test_per_class,
                      "Test points per class (with --test-out)")
      ->check(CLI::PositiveNumber);

  TrainArgs train;
  std::uint64_t seed_override = 0;
  CLI::App* train_cmd = app.add_subcommand("train", "Run one experiment");
  train_cmd->add_option("--config", train.config_path, "Experiment JSON config")
      ->required();
  CLI::Option* seed_opt =
      train_cmd->add_option("--seed", seed_override, "Override the config seed");

  std::string sweep_config;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Run a hyper-parameter sweep");
  sweep_cmd->add_option("--config", sweep_config, "Sweep JSON config")
      ->required();

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Extract a plot-ready (epoch,value) curve from a metrics CSV");
  report_cmd->add_option("--metrics", report.metrics_path, "Metrics CSV path")
      ->required();
  report_cmd->add_option("--curve", report.curve, "Curve to extract")
      ->required()
      ->check(CLI::IsMember({"acc", "comm", "chi"}));
  report_cmd->add_option("--out", report.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_data(gen);
    if (train_cmd->parsed()) {
      if (seed_opt->count() > 0) train.seed = seed_override;
      return run_train(train);
    }
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep_config);
    if (report_cmd->parsed()) return run_report(report);
  } catch (const cmd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const cmd::DivergedError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return 3;
  } catch (const cmd::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
