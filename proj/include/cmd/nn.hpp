#pragma once

// Small MLP classifier with hand-derived gradients.
//
// Layers are fully connected with ReLU between them; the last layer emits
// logits. Weights are He-uniform initialized, biases start at zero. The
// backward pass takes gradients at the logits, so any soft-target loss can
// drive it: the caller assembles d(logits) rows and gets parameter gradients
// back. For the common soft-target cross-entropy case the logit gradient is
//
//   dL/dz = softmax(z) * sum(target) - target
//
// which reduces to p - q when the target sums to one. Targets may have
// arbitrary (even negative) weights, so the sum(target) factor matters.

#include <cstdint>
#include <string>
#include <vector>

#include "cmd/ndmath.hpp"
#include "cmd/rng.hpp"

namespace cmd {

struct Layer {
  Matrix w;                // out x in
  std::vector<double> b;   // out
};

struct MlpModel {
  std::vector<Layer> layers;
  std::uint64_t version = 0;  // bumped on every parameter update

  std::size_t input_dim() const { return layers.front().w.cols; }
  std::size_t class_count() const { return layers.back().w.rows; }
};

// He-uniform init: w ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), b = 0.
// dims = {input, hidden..., classes}; needs at least input and output.
MlpModel make_mlp(const std::vector<std::size_t>& dims, Rng& rng);

struct ForwardCache {
  std::uint64_t model_version = 0;
  Matrix input;
  std::vector<Matrix> preacts;      // z per layer
  std::vector<Matrix> activations;  // relu(z) per hidden layer
};

// Batch forward; rows of x are samples. Returns logits (batch x C).
// The cache, when given, records what backward() needs.
Matrix forward(const MlpModel& model, const Matrix& x,
               ForwardCache* cache = nullptr);

// Single-sample convenience wrapper.
std::vector<double> forward(const MlpModel& model,
                            const std::vector<double>& x);

struct Gradients {
  std::vector<Matrix> w;
  std::vector<std::vector<double>> b;
};

Gradients zero_gradients(const MlpModel& model);

// Backpropagate per-logit gradients (batch x C) through the cached forward
// pass. Throws InvalidState if the cache does not match the model's current
// parameters, InvalidInput on shape mismatch.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Matrix& dlogits);

// Gradients of the mean soft-target cross-entropy over the batch,
// sum_i H(target_i, softmax(logits_i)) / batch.
Gradients backward_soft_ce(const MlpModel& model, const ForwardCache& cache,
                           const Matrix& targets);

// dL/dz for one sample: p * sum(target) - target.
void soft_ce_logit_grad(const double* probs, const double* target,
                        double* out, std::size_t n);

struct SgdState {
  double lr = 0.1;
  double momentum = 0.0;
  double weight_decay = 0.0;
  std::vector<Matrix> vel_w;
  std::vector<std::vector<double>> vel_b;
};

SgdState make_sgd(const MlpModel& model, double lr, double momentum,
                  double weight_decay);

// v <- momentum*v + g + weight_decay*p; p <- p - lr*v.
void sgd_step(SgdState& state, MlpModel& model, const Gradients& grads);

struct LrSchedule {
  double initial = 0.1;
  std::vector<int> milestones;  // strictly increasing
  double factor = 0.1;          // in (0,1)
};

// initial * factor^(number of milestones <= epoch).
double lr_at(const LrSchedule& schedule, int epoch);

// Versioned JSON checkpoint; doubles stored as hex bit patterns so a
// round-trip restores parameters bit-exactly.
void save_checkpoint(const MlpModel& model, const std::string& path);
MlpModel load_checkpoint(const std::string& path);

}  // namespace cmd
