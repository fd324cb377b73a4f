#include "cmd/nn.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cmd/error.hpp"
#include "cmd/kernels.hpp"

namespace cmd {

namespace {

void check_shapes_match(const MlpModel& model, const Gradients& grads) {
  if (grads.w.size() != model.layers.size() ||
      grads.b.size() != model.layers.size())
    throw InvalidInput("gradient layer count mismatch");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    if (grads.w[l].rows != layer.w.rows || grads.w[l].cols != layer.w.cols ||
        grads.b[l].size() != layer.b.size())
      throw InvalidInput("gradient shape mismatch");
  }
}

std::string hex_of(double v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(v)));
  return buf;
}

double double_of_hex(const std::string& s) {
  if (s.size() != 16) throw InvalidInput("checkpoint: bad double encoding");
  std::uint64_t bits = 0;
  for (char c : s) {
    bits <<= 4;
    if (c >= '0' && c <= '9')
      bits |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      bits |= static_cast<std::uint64_t>(c - 'a' + 10);
    else
      throw InvalidInput("checkpoint: bad double encoding");
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

MlpModel make_mlp(const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw InvalidInput("make_mlp: need input and output dims");
  for (std::size_t d : dims)
    if (d == 0) throw InvalidInput("make_mlp: zero layer dimension");
  MlpModel model;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    std::size_t fan_in = dims[l];
    std::size_t fan_out = dims[l + 1];
    layer.w = Matrix(fan_out, fan_in);
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : layer.w.data) v = rng.uniform(-limit, limit);
    layer.b.assign(fan_out, 0.0);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Matrix forward(const MlpModel& model, const Matrix& x, ForwardCache* cache) {
  if (model.layers.empty()) throw InvalidState("forward: empty model");
  if (x.cols != model.input_dim())
    throw InvalidInput("forward: input dimension mismatch");
  if (x.rows == 0) throw InvalidInput("forward: empty batch");

  const auto& k = kern::ops();
  if (cache) {
    cache->model_version = model.version;
    cache->input = x;
    cache->preacts.clear();
    cache->activations.clear();
  }

  Matrix cur = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    Matrix z(cur.rows, layer.w.rows);
    k.matmul_nt(cur.data.data(), layer.w.data.data(), z.data.data(), cur.rows,
                cur.cols, layer.w.rows);
    for (std::size_t i = 0; i < z.rows; ++i)
      k.axpy(1.0, layer.b.data(), z.row(i), z.cols);
    bool last = l + 1 == model.layers.size();
    if (cache) cache->preacts.push_back(z);
    if (last) return z;
    Matrix h(z.rows, z.cols);
    k.relu(z.data.data(), h.data.data(), z.data.size());
    if (cache) cache->activations.push_back(h);
    cur = std::move(h);
  }
  return cur;  // unreachable
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& x) {
  Matrix m(1, x.size());
  m.data = x;
  Matrix logits = forward(model, m);
  return logits.data;
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (const Layer& layer : model.layers) {
    g.w.emplace_back(layer.w.rows, layer.w.cols);
    g.b.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Matrix& dlogits) {
  if (cache.model_version != model.version)
    throw InvalidState("backward: cache is stale");
  if (cache.preacts.size() != model.layers.size())
    throw InvalidState("backward: cache does not match model depth");
  if (dlogits.rows != cache.input.rows ||
      dlogits.cols != model.class_count())
    throw InvalidInput("backward: dlogits shape mismatch");

  const auto& k = kern::ops();
  Gradients grads = zero_gradients(model);
  Matrix dz = dlogits;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const Layer& layer = model.layers[l];
    const Matrix& below =
        l == 0 ? cache.input : cache.activations[l - 1];
    k.matmul_tn_acc(dz.data.data(), below.data.data(), grads.w[l].data.data(),
                    dz.rows, dz.cols, below.cols);
    k.col_sums(dz.data.data(), grads.b[l].data(), dz.rows, dz.cols);
    if (l == 0) break;
    Matrix dh(dz.rows, layer.w.cols);
    k.matmul_nn(dz.data.data(), layer.w.data.data(), dh.data.data(), dz.rows,
                dz.cols, layer.w.cols);
    k.relu_mask(cache.preacts[l - 1].data.data(), dh.data.data(),
                dh.data.size());
    dz = std::move(dh);
  }
  return grads;
}

void soft_ce_logit_grad(const double* probs, const double* target, double* out,
                        std::size_t n) {
  double total = kern::ops().sum(target, n);
  for (std::size_t i = 0; i < n; ++i) out[i] = probs[i] * total - target[i];
}

Gradients backward_soft_ce(const MlpModel& model, const ForwardCache& cache,
                           const Matrix& targets) {
  if (cache.preacts.empty()) throw InvalidState("backward: empty cache");
  const Matrix& logits = cache.preacts.back();
  if (targets.rows != logits.rows || targets.cols != logits.cols)
    throw InvalidInput("backward_soft_ce: target shape mismatch");
  Matrix probs = ndmath::softmax_rows(logits);
  Matrix dlogits(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i)
    soft_ce_logit_grad(probs.row(i), targets.row(i), dlogits.row(i),
                       logits.cols);
  kern::ops().scale(dlogits.data.data(), 1.0 / static_cast<double>(logits.rows),
                    dlogits.data.size());
  return backward(model, cache, dlogits);
}

SgdState make_sgd(const MlpModel& model, double lr, double momentum,
                  double weight_decay) {
  if (lr <= 0.0) throw InvalidInput("make_sgd: learning rate must be > 0");
  SgdState state;
  state.lr = lr;
  state.momentum = momentum;
  state.weight_decay = weight_decay;
  for (const Layer& layer : model.layers) {
    state.vel_w.emplace_back(layer.w.rows, layer.w.cols);
    state.vel_b.emplace_back(layer.b.size(), 0.0);
  }
  return state;
}

void sgd_step(SgdState& state, MlpModel& model, const Gradients& grads) {
  check_shapes_match(model, grads);
  if (state.vel_w.size() != model.layers.size())
    throw InvalidInput("sgd_step: velocity buffers do not match model");
  const auto& k = kern::ops();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Layer& layer = model.layers[l];
    k.sgd_update(layer.w.data.data(), state.vel_w[l].data.data(),
                 grads.w[l].data.data(), state.lr, state.momentum,
                 state.weight_decay, layer.w.data.size());
    k.sgd_update(layer.b.data(), state.vel_b[l].data(), grads.b[l].data(),
                 state.lr, state.momentum, state.weight_decay, layer.b.size());
  }
  ++model.version;
}

double lr_at(const LrSchedule& schedule, int epoch) {
  if (epoch < 0) throw InvalidInput("lr_at: epoch must be >= 0");
  int hits = 0;
  for (int m : schedule.milestones)
    if (m <= epoch) ++hits;
  return schedule.initial * std::pow(schedule.factor, hits);
}

void save_checkpoint(const MlpModel& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "cmdistill-mlp";
  j["version"] = 1;
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : model.layers) {
    nlohmann::json jl;
    jl["out"] = layer.w.rows;
    jl["in"] = layer.w.cols;
    nlohmann::json w = nlohmann::json::array();
    for (double v : layer.w.data) w.push_back(hex_of(v));
    nlohmann::json b = nlohmann::json::array();
    for (double v : layer.b) b.push_back(hex_of(v));
    jl["w"] = std::move(w);
    jl["b"] = std::move(b);
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("checkpoint: cannot open " + path);
  out << j.dump(2) << '\n';
}

MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("checkpoint: parse error: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "cmdistill-mlp" ||
      j.value("version", 0) != 1)
    throw InvalidInput("checkpoint: unrecognized format");
  MlpModel model;
  for (const auto& jl : j.at("layers")) {
    Layer layer;
    std::size_t out_dim = jl.at("out").get<std::size_t>();
    std::size_t in_dim = jl.at("in").get<std::size_t>();
    layer.w = Matrix(out_dim, in_dim);
    const auto& w = jl.at("w");
    const auto& b = jl.at("b");
    if (w.size() != out_dim * in_dim || b.size() != out_dim)
      throw InvalidInput("checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < layer.w.data.size(); ++i)
      layer.w.data[i] = double_of_hex(w[i].get<std::string>());
    layer.b.resize(out_dim);
    for (std::size_t i = 0; i < out_dim; ++i)
      layer.b[i] = double_of_hex(b[i].get<std::string>());
    model.layers.push_back(std::move(layer));
  }
  if (model.layers.empty()) throw InvalidInput("checkpoint: no layers");
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
    if (model.layers[l].w.rows != model.layers[l + 1].w.cols)
      throw InvalidInput("checkpoint: layer dimensions do not chain");
  return model;
}

}  // namespace cmd
