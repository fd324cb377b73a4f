#pragma once

// Self label-correction family: each method refines the (possibly noisy)
// annotation q toward the model's own prediction p, then trains on
// cross-entropy against the refined target.
//
//   ce         q unchanged (eps = 0)
//   ls         (1-eps) q + eps u         fixed eps
//   cp         (1-eps) q - eps p         fixed eps; sums to 1-2*eps
//   bootsoft   (1-eps) q + eps p         fixed eps
//   proselflc  (1-eps) q + eps p         eps = h(t/T - 0.5, b1) * l(p)
//   mylc       (1-eps) q + eps p         eps = g(r) * l(p)
//
// mylc's global trust g(r) = h(r - rho, b1) comes from the model's overall
// certainty r over the current batch; l(p) is per-sample confidence.
// Refined targets are constants in the backward pass: no gradient flows
// through p inside the target.

#include <cstddef>
#include <string>
#include <vector>

#include "cmd/ndmath.hpp"

namespace cmd {

enum class TrustMethod { CE, LS, CP, BootSoft, ProSelfLC, MyLC };

TrustMethod trust_method_from_string(const std::string& s);
std::string to_string(TrustMethod method);

struct TrustParams {
  TrustMethod method = TrustMethod::CE;
  double epsilon = 0.0;  // fixed self-trust for ls/cp/bootsoft
  double b1 = 8.0;       // trust logistic gain for mylc/proselflc
  double rho = 0.5;      // certainty midpoint for mylc
};

// h(lambda, b) = 1 / (1 + exp(-lambda * b)).
double logistic(double lambda, double b);

// r = 1 - sum_i H(p_i) / (n * H(u)), clamped to [0,1]. Rows of preds are
// the batch predictions; throws InvalidInput when the batch is empty.
double model_certainty(const Matrix& preds, std::size_t classes);

// eps = g * l(p).
double my_lc_epsilon(const std::vector<double>& p, double g,
                     std::size_t classes);

// Refined target per method; CP may leave the distribution simplex.
std::vector<double> refine_label(TrustMethod method,
                                 const std::vector<double>& q,
                                 const std::vector<double>& p, double epsilon);

struct SelfKdResult {
  double loss = 0.0;
  std::vector<double> refined;
  double epsilon = 0.0;
};

// Resolve eps per method (using epoch t of total gamma and the batch
// predictions where the method needs them), refine, and score
// cross_entropy(refined, p).
SelfKdResult self_kd_loss(const TrustParams& params,
                          const std::vector<double>& q,
                          const std::vector<double>& p, int t, int gamma,
                          const Matrix& batch_preds);

struct SelfKdBatch {
  std::vector<std::vector<double>> refined;  // per sample
  std::vector<double> epsilons;
  double loss = 0.0;      // mean cross-entropy over the batch
  double mean_epsilon = 0.0;
};

// Batch version used by the trainers: computes the global-trust quantities
// once, then refines every row. labels are the training annotations.
SelfKdBatch self_kd_batch(const TrustParams& params,
                          const std::vector<int>& labels, const Matrix& probs,
                          int t, int gamma, std::size_t classes);

}  // namespace cmd
