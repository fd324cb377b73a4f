#pragma once

// Two-model trainers.
//
// CMD: each model trains on its own refined labels, plus cross-entropy
// against the peer's refined labels on exactly those samples where the
// peer's prediction entropy is below chi. Distillation terms are summed
// over the selected samples but divided by the full batch size.
//
// Baselines: SyncMKD mixes CE with KL against the peer's prediction and
// updates both models every step; AsyncMKD alternates which model updates
// by iteration parity; T2S distills a teacher into a student one-way;
// Independent trains both models with their own self-KD losses only.
//
// Peer knowledge (refined labels, predictions) is always a gradient
// constant. Both updates of a synchronized step are computed from
// pre-update parameters of both models.

#include <cstddef>
#include <string>
#include <vector>

#include "cmd/ndmath.hpp"
#include "cmd/nn.hpp"
#include "cmd/selection.hpp"
#include "cmd/selfkd.hpp"

namespace cmd {

enum class MkdAlgo { Cmd, SyncMkd, AsyncMkd, T2S, Independent };

MkdAlgo mkd_algo_from_string(const std::string& s);
std::string to_string(MkdAlgo algo);

// One model plus its optimizer and self-trust configuration.
struct Learner {
  MlpModel model;
  SgdState opt;
  TrustParams trust;
};

struct StepContext {
  int epoch = 0;         // 0-based
  int total_epochs = 1;
  double lr = 0.1;
};

struct DistillBatchResult {
  double loss_a = 0.0, loss_b = 0.0;
  double self_loss_a = 0.0, self_loss_b = 0.0;
  double distill_loss_a = 0.0, distill_loss_b = 0.0;
  std::size_t count_a2b = 0, count_b2a = 0;
  double mean_eps_a = 0.0, mean_eps_b = 0.0;
};

// Directional CMD loss: sum of cross_entropy(refined_src[i], p_dst row i)
// over i with h_src[i] < chi, divided by the full batch size. Also returns
// the selected count.
struct DirectionLoss {
  double loss = 0.0;
  std::size_t count = 0;
};
DirectionLoss cmd_direction_loss(
    const std::vector<std::vector<double>>& refined_src, const Matrix& p_dst,
    const std::vector<double>& h_src, double chi);

// One synchronized CMD step on a batch: forward both models, refine both
// label sets, select by the peer's entropies against chi(epoch), apply both
// SGD updates.
DistillBatchResult cmd_batch(Learner& a, Learner& b, const Matrix& features,
                             const std::vector<int>& labels,
                             const SelectionPolicy& policy,
                             const StepContext& ctx);

// (1-eps) H(q, p_student) + eps KL(p_teacher || p_student).
double t2s_loss(const std::vector<double>& q,
                const std::vector<double>& p_student,
                const std::vector<double>& p_teacher, double eps);

// L_A = (1-eps) H(q, p_A) + eps KL(p_B || p_A), L_B symmetric; both models
// update every step.
DistillBatchResult sync_mkd_batch(Learner& a, Learner& b,
                                  const Matrix& features,
                                  const std::vector<int>& labels,
                                  double eps_mkd, const StepContext& ctx);

// Odd iterations update only A, even only B; the idle model is untouched.
DistillBatchResult async_mkd_step(Learner& a, Learner& b,
                                  const Matrix& features,
                                  const std::vector<int>& labels,
                                  std::size_t iteration, double eps_mkd,
                                  const StepContext& ctx);

// Teacher (b) trains on plain CE; student (a) trains on t2s_loss against
// the teacher's current predictions.
DistillBatchResult t2s_batch(Learner& student, Learner& teacher,
                             const Matrix& features,
                             const std::vector<int>& labels, double eps_mkd,
                             const StepContext& ctx);

// Both models train on their own self-KD losses; no knowledge crosses.
DistillBatchResult independent_batch(Learner& a, Learner& b,
                                     const Matrix& features,
                                     const std::vector<int>& labels,
                                     const StepContext& ctx);

}  // namespace cmd
