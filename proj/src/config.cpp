// Strict JSON config parsing. Unknown keys, wrong types, and out-of-range
// values are rejected with the dotted path of the offending field.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cmd/error.hpp"
#include "cmd/harness.hpp"

namespace cmd {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::size_t get_count(const json& j, const std::string& path,
                      std::int64_t min_value) {
  std::int64_t v = get_integer(j, path);
  if (v < min_value)
    throw ConfigError(path, "must be >= " + std::to_string(min_value));
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    throw ConfigError(path, "expected an integer seed");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0)
    throw ConfigError(path, "seed must be >= 0");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <typename Fn>
auto parse_enum(const json& j, const std::string& path, Fn&& from_string) {
  try {
    return from_string(get_string(j, path));
  } catch (const InvalidInput& e) {
    throw ConfigError(path, e.what());
  }
}

void parse_dataset(const json& j, ExperimentConfig& config) {
  require_object(j, "dataset");
  std::string kind = j.count("kind") ? get_string(j.at("kind"), "dataset.kind")
                                     : std::string("blobs");
  if (kind == "blobs") {
    reject_unknown(j, "dataset",
                   {"kind", "classes", "per_class", "test_per_class", "dim",
                    "spread", "seed"});
    BlobsSpec blobs;
    if (j.count("classes"))
      blobs.classes = get_count(j.at("classes"), "dataset.classes", 2);
    if (j.count("per_class"))
      blobs.per_class = get_count(j.at("per_class"), "dataset.per_class", 1);
    if (j.count("test_per_class"))
      blobs.test_per_class =
          get_count(j.at("test_per_class"), "dataset.test_per_class", 1);
    if (j.count("dim")) blobs.dim = get_count(j.at("dim"), "dataset.dim", 1);
    if (j.count("spread")) {
      blobs.spread = get_number(j.at("spread"), "dataset.spread");
      if (!(blobs.spread >= 0.0))
        throw ConfigError("dataset.spread", "must be >= 0");
    }
    if (j.count("seed")) blobs.seed = get_seed(j.at("seed"), "dataset.seed");
    config.dataset = blobs;
  } else if (kind == "csv") {
    reject_unknown(j, "dataset", {"kind", "train", "test"});
    CsvSpec csv;
    if (!j.count("train")) throw ConfigError("dataset.train", "required");
    if (!j.count("test")) throw ConfigError("dataset.test", "required");
    csv.train_path = get_string(j.at("train"), "dataset.train");
    csv.test_path = get_string(j.at("test"), "dataset.test");
    config.dataset = csv;
  } else {
    throw ConfigError("dataset.kind", "expected 'blobs' or 'csv'");
  }
}

void parse_noise(const json& j, NoiseSpec& noise) {
  require_object(j, "noise");
  reject_unknown(j, "noise", {"kind", "rate", "seed"});
  if (j.count("kind"))
    noise.kind = parse_enum(j.at("kind"), "noise.kind", noise_kind_from_string);
  if (j.count("rate")) {
    noise.rate = get_number(j.at("rate"), "noise.rate");
    if (!(noise.rate >= 0.0 && noise.rate <= 1.0))
      throw ConfigError("noise.rate", "must be in [0,1]");
  }
  if (j.count("seed")) noise.seed = get_seed(j.at("seed"), "noise.seed");
}

void parse_model(const json& j, ModelSpec& model) {
  require_object(j, "model");
  reject_unknown(j, "model", {"hidden"});
  if (j.count("hidden")) {
    const json& h = j.at("hidden");
    if (!h.is_array()) throw ConfigError("model.hidden", "expected an array");
    model.hidden.clear();
    for (std::size_t i = 0; i < h.size(); ++i)
      model.hidden.push_back(get_count(
          h[i], "model.hidden[" + std::to_string(i) + "]", 1));
  }
}

void parse_optimizer(const json& j, OptimizerSpec& opt) {
  require_object(j, "optimizer");
  reject_unknown(j, "optimizer",
                 {"lr", "momentum", "weight_decay", "milestones",
                  "decay_factor"});
  if (j.count("lr")) {
    opt.lr = get_number(j.at("lr"), "optimizer.lr");
    if (!(opt.lr > 0.0)) throw ConfigError("optimizer.lr", "must be > 0");
  }
  if (j.count("momentum")) {
    opt.momentum = get_number(j.at("momentum"), "optimizer.momentum");
    if (!(opt.momentum >= 0.0 && opt.momentum < 1.0))
      throw ConfigError("optimizer.momentum", "must be in [0,1)");
  }
  if (j.count("weight_decay")) {
    opt.weight_decay = get_number(j.at("weight_decay"),
                                  "optimizer.weight_decay");
    if (!(opt.weight_decay >= 0.0))
      throw ConfigError("optimizer.weight_decay", "must be >= 0");
  }
  if (j.count("milestones")) {
    const json& m = j.at("milestones");
    if (!m.is_array())
      throw ConfigError("optimizer.milestones", "expected an array");
    opt.milestones.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::string path = "optimizer.milestones[" + std::to_string(i) + "]";
      std::int64_t v = get_integer(m[i], path);
      if (v < 0) throw ConfigError(path, "must be >= 0");
      if (!opt.milestones.empty() && v <= opt.milestones.back())
        throw ConfigError(path, "milestones must be strictly increasing");
      opt.milestones.push_back(static_cast<int>(v));
    }
  }
  if (j.count("decay_factor")) {
    opt.decay_factor = get_number(j.at("decay_factor"),
                                  "optimizer.decay_factor");
    if (!(opt.decay_factor > 0.0 && opt.decay_factor < 1.0))
      throw ConfigError("optimizer.decay_factor", "must be in (0,1)");
  }
}

void parse_trust(const json& j, const std::string& path, TrustParams& trust) {
  require_object(j, path);
  reject_unknown(j, path, {"method", "epsilon", "b1", "rho"});
  if (j.count("method"))
    trust.method = parse_enum(j.at("method"), path + ".method",
                              trust_method_from_string);
  if (j.count("epsilon")) {
    trust.epsilon = get_number(j.at("epsilon"), path + ".epsilon");
    if (!(trust.epsilon >= 0.0 && trust.epsilon <= 1.0))
      throw ConfigError(path + ".epsilon", "must be in [0,1]");
  }
  if (j.count("b1")) trust.b1 = get_number(j.at("b1"), path + ".b1");
  if (j.count("rho")) {
    trust.rho = get_number(j.at("rho"), path + ".rho");
    if (!(trust.rho > 0.0 && trust.rho < 1.0))
      throw ConfigError(path + ".rho", "must be in (0,1)");
  }
}

void parse_self_kd(const json& j, ExperimentConfig& config) {
  require_object(j, "self_kd");
  if (j.count("a") || j.count("b")) {
    reject_unknown(j, "self_kd", {"a", "b"});
    if (j.count("a")) parse_trust(j.at("a"), "self_kd.a", config.trust_a);
    if (j.count("b")) parse_trust(j.at("b"), "self_kd.b", config.trust_b);
  } else {
    parse_trust(j, "self_kd", config.trust_a);
    config.trust_b = config.trust_a;
  }
}

void parse_selection(const json& j, SelectionPolicy& selection) {
  require_object(j, "selection");
  reject_unknown(j, "selection", {"mode", "eta", "b2"});
  if (j.count("mode"))
    selection.mode = parse_enum(j.at("mode"), "selection.mode",
                                selection_mode_from_string);
  if (j.count("eta"))
    selection.eta = get_number(j.at("eta"), "selection.eta");
  if (j.count("b2")) selection.b2 = get_number(j.at("b2"), "selection.b2");
  bool scaled = selection.mode == SelectionMode::Static ||
                selection.mode == SelectionMode::Progressive;
  if (scaled && !(selection.eta > 0.0))
    throw ConfigError("selection.eta", "must be > 0");
  if (selection.mode == SelectionMode::Static) selection.b2 = 0.0;
}

ExperimentConfig parse_experiment(const json& j, const std::string& path) {
  require_object(j, path.empty() ? "config" : path);
  std::string prefix = path.empty() ? "" : path + ".";
  reject_unknown(j, path,
                 {"dataset", "noise", "model", "optimizer", "self_kd", "algo",
                  "eps_mkd", "selection", "epochs", "batch_size", "seed",
                  "out_dir"});
  ExperimentConfig config;
  if (j.count("dataset")) parse_dataset(j.at("dataset"), config);
  if (j.count("noise")) parse_noise(j.at("noise"), config.noise);
  if (j.count("model")) parse_model(j.at("model"), config.model);
  if (j.count("optimizer")) parse_optimizer(j.at("optimizer"), config.optimizer);
  if (j.count("self_kd")) parse_self_kd(j.at("self_kd"), config);
  if (j.count("algo"))
    config.algo = parse_enum(j.at("algo"), prefix + "algo",
                             mkd_algo_from_string);
  if (j.count("eps_mkd")) {
    config.eps_mkd = get_number(j.at("eps_mkd"), prefix + "eps_mkd");
    if (!(config.eps_mkd >= 0.0 && config.eps_mkd <= 1.0))
      throw ConfigError(prefix + "eps_mkd", "must be in [0,1]");
  }
  if (j.count("selection")) parse_selection(j.at("selection"), config.selection);
  if (j.count("epochs")) {
    std::int64_t v = get_integer(j.at("epochs"), prefix + "epochs");
    if (v < 1) throw ConfigError(prefix + "epochs", "must be >= 1");
    config.epochs = static_cast<int>(v);
  }
  if (j.count("batch_size"))
    config.batch_size = get_count(j.at("batch_size"), prefix + "batch_size", 1);
  if (j.count("seed")) config.seed = get_seed(j.at("seed"), prefix + "seed");
  if (j.count("out_dir"))
    config.out_dir = get_string(j.at("out_dir"), prefix + "out_dir");
  return config;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("(file)", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  ExperimentConfig config = parse_experiment(parse_json_text(text), "");
  validate(config);
  return config;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  return config_from_json_text(read_file(path));
}

void validate(const ExperimentConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (!(config.eps_mkd >= 0.0 && config.eps_mkd <= 1.0))
    throw ConfigError("eps_mkd", "must be in [0,1]");
  if (!(config.noise.rate >= 0.0 && config.noise.rate <= 1.0))
    throw ConfigError("noise.rate", "must be in [0,1]");
  for (std::size_t h : config.model.hidden)
    if (h == 0) throw ConfigError("model.hidden", "layer sizes must be >= 1");
  if (!(config.optimizer.lr > 0.0))
    throw ConfigError("optimizer.lr", "must be > 0");
  if (!(config.optimizer.decay_factor > 0.0 &&
        config.optimizer.decay_factor < 1.0))
    throw ConfigError("optimizer.decay_factor", "must be in (0,1)");
  for (std::size_t i = 1; i < config.optimizer.milestones.size(); ++i)
    if (config.optimizer.milestones[i] <= config.optimizer.milestones[i - 1])
      throw ConfigError("optimizer.milestones",
                        "must be strictly increasing");
  bool scaled = config.selection.mode == SelectionMode::Static ||
                config.selection.mode == SelectionMode::Progressive;
  if (config.algo == MkdAlgo::Cmd && scaled && !(config.selection.eta > 0.0))
    throw ConfigError("selection.eta", "must be > 0");
  for (const TrustParams* trust : {&config.trust_a, &config.trust_b}) {
    if (!(trust->epsilon >= 0.0 && trust->epsilon <= 1.0))
      throw ConfigError("self_kd.epsilon", "must be in [0,1]");
    if (!(trust->rho > 0.0 && trust->rho < 1.0))
      throw ConfigError("self_kd.rho", "must be in (0,1)");
  }
  if (const auto* csv = std::get_if<CsvSpec>(&config.dataset)) {
    if (!std::filesystem::exists(csv->train_path))
      throw ConfigError("dataset.train", "file not found: " + csv->train_path);
    if (!std::filesystem::exists(csv->test_path))
      throw ConfigError("dataset.test", "file not found: " + csv->test_path);
  } else {
    const auto& blobs = std::get<BlobsSpec>(config.dataset);
    if (blobs.classes < 2) throw ConfigError("dataset.classes", "must be >= 2");
    if (blobs.per_class < 1)
      throw ConfigError("dataset.per_class", "must be >= 1");
    if (blobs.test_per_class < 1)
      throw ConfigError("dataset.test_per_class", "must be >= 1");
    if (blobs.dim < 1) throw ConfigError("dataset.dim", "must be >= 1");
    if (!(blobs.spread >= 0.0))
      throw ConfigError("dataset.spread", "must be >= 0");
  }
}

namespace {

std::vector<double> parse_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

SweepConfig sweep_from_json_text(const std::string& text) {
  json j = parse_json_text(text);
  require_object(j, "sweep");
  reject_unknown(j, "", {"base", "grid", "seeds", "workers", "summary"});
  SweepConfig sweep;
  if (!j.count("base")) throw ConfigError("base", "required");
  sweep.base = parse_experiment(j.at("base"), "base");
  validate(sweep.base);
  if (j.count("grid")) {
    const json& g = j.at("grid");
    require_object(g, "grid");
    reject_unknown(g, "grid", {"eta", "b2", "noise_rate", "method"});
    if (g.count("eta")) sweep.grid.eta = parse_number_array(g.at("eta"), "grid.eta");
    for (double eta : sweep.grid.eta)
      if (!(eta > 0.0)) throw ConfigError("grid.eta", "must be > 0");
    if (g.count("b2")) sweep.grid.b2 = parse_number_array(g.at("b2"), "grid.b2");
    if (g.count("noise_rate")) {
      sweep.grid.noise_rate =
          parse_number_array(g.at("noise_rate"), "grid.noise_rate");
      for (double r : sweep.grid.noise_rate)
        if (!(r >= 0.0 && r <= 1.0))
          throw ConfigError("grid.noise_rate", "must be in [0,1]");
      if (!sweep.grid.noise_rate.empty() &&
          sweep.base.noise.kind == NoiseKind::None)
        throw ConfigError("grid.noise_rate", "base noise kind is none");
    }
    if (g.count("method")) {
      const json& m = g.at("method");
      if (!m.is_array()) throw ConfigError("grid.method", "expected an array");
      for (std::size_t i = 0; i < m.size(); ++i) {
        std::string path = "grid.method[" + std::to_string(i) + "]";
        std::string name = get_string(m[i], path);
        parse_enum(m[i], path, trust_method_from_string);
        sweep.grid.method.push_back(name);
      }
    }
  }
  if (j.count("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array() || s.empty())
      throw ConfigError("seeds", "expected a nonempty array");
    sweep.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i)
      sweep.seeds.push_back(get_seed(s[i], "seeds[" + std::to_string(i) + "]"));
  }
  if (j.count("workers")) {
    std::int64_t w = get_integer(j.at("workers"), "workers");
    if (w < 1) throw ConfigError("workers", "must be >= 1");
    sweep.workers = static_cast<int>(w);
  }
  if (j.count("summary"))
    sweep.summary_path = get_string(j.at("summary"), "summary");
  return sweep;
}

SweepConfig sweep_from_json_file(const std::string& path) {
  return sweep_from_json_text(read_file(path));
}

}  // namespace cmd
