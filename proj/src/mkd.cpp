#include "cmd/mkd.hpp"

#include <cmath>

#include "cmd/error.hpp"
#include "cmd/kernels.hpp"
#include "cmd/labelspace.hpp"

namespace cmd {

MkdAlgo mkd_algo_from_string(const std::string& s) {
  if (s == "cmd") return MkdAlgo::Cmd;
  if (s == "sync_mkd") return MkdAlgo::SyncMkd;
  if (s == "async_mkd") return MkdAlgo::AsyncMkd;
  if (s == "t2s") return MkdAlgo::T2S;
  if (s == "independent") return MkdAlgo::Independent;
  throw InvalidInput("unknown algorithm: " + s);
}

std::string to_string(MkdAlgo algo) {
  switch (algo) {
    case MkdAlgo::Cmd:
      return "cmd";
    case MkdAlgo::SyncMkd:
      return "sync_mkd";
    case MkdAlgo::AsyncMkd:
      return "async_mkd";
    case MkdAlgo::T2S:
      return "t2s";
    case MkdAlgo::Independent:
      return "independent";
  }
  return "unknown";
}

namespace {

void check_pair(const Learner& a, const Learner& b, const Matrix& features,
                const std::vector<int>& labels) {
  if (a.model.class_count() != b.model.class_count())
    throw InvalidInput("two-model step: class count mismatch");
  if (features.rows != labels.size())
    throw InvalidInput("two-model step: label count mismatch");
  if (features.rows == 0) throw InvalidInput("two-model step: empty batch");
}

// d(mean self loss)/d(logits): per-row soft-CE gradient scaled by 1/batch.
Matrix self_dlogits(const Matrix& probs, const SelfKdBatch& self) {
  Matrix d(probs.rows, probs.cols);
  for (std::size_t i = 0; i < probs.rows; ++i)
    soft_ce_logit_grad(probs.row(i), self.refined[i].data(), d.row(i),
                       probs.cols);
  kern::ops().scale(d.data.data(), 1.0 / static_cast<double>(probs.rows),
                    d.data.size());
  return d;
}

// Add the distillation gradient for the selected rows: targets are the
// peer's refined labels, contribution weighted 1/batch like the loss.
void add_distill_dlogits(Matrix& d, const Matrix& probs,
                         const std::vector<std::vector<double>>& peer_refined,
                         const std::vector<std::size_t>& selected) {
  const auto& k = kern::ops();
  double inv_batch = 1.0 / static_cast<double>(probs.rows);
  std::vector<double> g(probs.cols);
  for (std::size_t i : selected) {
    soft_ce_logit_grad(probs.row(i), peer_refined[i].data(), g.data(),
                       probs.cols);
    k.axpy(inv_batch, g.data(), d.row(i), probs.cols);
  }
}

std::vector<double> row_entropies(const Matrix& probs) {
  std::vector<double> h(probs.rows);
  for (std::size_t i = 0; i < probs.rows; ++i)
    h[i] = ndmath::entropy(probs.row(i), probs.cols);
  return h;
}

void apply_update(Learner& learner, const ForwardCache& cache,
                  const Matrix& dlogits, double lr) {
  Gradients grads = backward(learner.model, cache, dlogits);
  learner.opt.lr = lr;
  sgd_step(learner.opt, learner.model, grads);
}

// Mixed-target gradient for the KL-style baselines: the loss differs from
// soft CE against (1-eps) q + eps p_peer only by a constant, so the logit
// gradient is the same.
Matrix mixed_dlogits(const Matrix& probs, const std::vector<int>& labels,
                     const Matrix& peer_probs, double eps,
                     std::size_t classes) {
  Matrix d(probs.rows, probs.cols);
  std::vector<double> target(classes);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const double* peer = peer_probs.row(i);
    for (std::size_t j = 0; j < classes; ++j) target[j] = eps * peer[j];
    target[static_cast<std::size_t>(labels[i])] += 1.0 - eps;
    soft_ce_logit_grad(probs.row(i), target.data(), d.row(i), probs.cols);
  }
  kern::ops().scale(d.data.data(), 1.0 / static_cast<double>(probs.rows),
                    d.data.size());
  return d;
}

struct MixedLoss {
  double ce = 0.0;  // mean (1-eps) H(q, p)
  double kl = 0.0;  // mean eps KL(p_peer || p)
};

MixedLoss mixed_loss(const Matrix& probs, const std::vector<int>& labels,
                     const Matrix& peer_probs, double eps) {
  MixedLoss loss;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const double* p = probs.row(i);
    loss.ce -= std::log(p[static_cast<std::size_t>(labels[i])] + kLogGuard);
    loss.kl += ndmath::kl_divergence(peer_probs.row(i), p, probs.cols);
  }
  double inv_batch = 1.0 / static_cast<double>(probs.rows);
  loss.ce *= (1.0 - eps) * inv_batch;
  loss.kl *= eps * inv_batch;
  return loss;
}

void check_labels(const std::vector<int>& labels, std::size_t classes) {
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw InvalidInput("two-model step: label out of range");
}

}  // namespace

DirectionLoss cmd_direction_loss(
    const std::vector<std::vector<double>>& refined_src, const Matrix& p_dst,
    const std::vector<double>& h_src, double chi) {
  if (refined_src.size() != p_dst.rows || h_src.size() != p_dst.rows)
    throw InvalidInput("cmd_direction_loss: length mismatch");
  DirectionLoss out;
  double total = 0.0;
  for (std::size_t i = 0; i < p_dst.rows; ++i) {
    if (!(h_src[i] < chi)) continue;
    total += ndmath::cross_entropy(refined_src[i].data(), p_dst.row(i),
                                   p_dst.cols);
    ++out.count;
  }
  out.loss = total / static_cast<double>(p_dst.rows);
  return out;
}

DistillBatchResult cmd_batch(Learner& a, Learner& b, const Matrix& features,
                             const std::vector<int>& labels,
                             const SelectionPolicy& policy,
                             const StepContext& ctx) {
  check_pair(a, b, features, labels);
  std::size_t classes = a.model.class_count();
  check_labels(labels, classes);

  ForwardCache cache_a, cache_b;
  Matrix probs_a = ndmath::softmax_rows(forward(a.model, features, &cache_a));
  Matrix probs_b = ndmath::softmax_rows(forward(b.model, features, &cache_b));

  SelfKdBatch self_a = self_kd_batch(a.trust, labels, probs_a, ctx.epoch,
                                     ctx.total_epochs, classes);
  SelfKdBatch self_b = self_kd_batch(b.trust, labels, probs_b, ctx.epoch,
                                     ctx.total_epochs, classes);

  double chi = threshold(policy, ctx.epoch);
  std::vector<double> h_a = row_entropies(probs_a);
  std::vector<double> h_b = row_entropies(probs_b);
  DirectionLoss b2a = cmd_direction_loss(self_b.refined, probs_a, h_b, chi);
  DirectionLoss a2b = cmd_direction_loss(self_a.refined, probs_b, h_a, chi);

  Matrix dlogits_a = self_dlogits(probs_a, self_a);
  Matrix dlogits_b = self_dlogits(probs_b, self_b);
  std::vector<std::size_t> sel_b2a = select_batch(probs_b, chi);
  std::vector<std::size_t> sel_a2b = select_batch(probs_a, chi);
  add_distill_dlogits(dlogits_a, probs_a, self_b.refined, sel_b2a);
  add_distill_dlogits(dlogits_b, probs_b, self_a.refined, sel_a2b);

  apply_update(a, cache_a, dlogits_a, ctx.lr);
  apply_update(b, cache_b, dlogits_b, ctx.lr);

  DistillBatchResult result;
  result.self_loss_a = self_a.loss;
  result.self_loss_b = self_b.loss;
  result.distill_loss_a = b2a.loss;
  result.distill_loss_b = a2b.loss;
  result.loss_a = self_a.loss + b2a.loss;
  result.loss_b = self_b.loss + a2b.loss;
  result.count_b2a = b2a.count;
  result.count_a2b = a2b.count;
  result.mean_eps_a = self_a.mean_epsilon;
  result.mean_eps_b = self_b.mean_epsilon;
  return result;
}

double t2s_loss(const std::vector<double>& q,
                const std::vector<double>& p_student,
                const std::vector<double>& p_teacher, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw InvalidInput("t2s_loss: eps must be in [0,1]");
  if (q.size() != p_student.size() || q.size() != p_teacher.size())
    throw InvalidInput("t2s_loss: dimension mismatch");
  return (1.0 - eps) * ndmath::cross_entropy(q, p_student) +
         eps * ndmath::kl_divergence(p_teacher, p_student);
}

DistillBatchResult sync_mkd_batch(Learner& a, Learner& b,
                                  const Matrix& features,
                                  const std::vector<int>& labels,
                                  double eps_mkd, const StepContext& ctx) {
  check_pair(a, b, features, labels);
  if (!(eps_mkd >= 0.0 && eps_mkd <= 1.0))
    throw InvalidInput("sync_mkd_batch: eps must be in [0,1]");
  std::size_t classes = a.model.class_count();
  check_labels(labels, classes);

  ForwardCache cache_a, cache_b;
  Matrix probs_a = ndmath::softmax_rows(forward(a.model, features, &cache_a));
  Matrix probs_b = ndmath::softmax_rows(forward(b.model, features, &cache_b));

  MixedLoss loss_a = mixed_loss(probs_a, labels, probs_b, eps_mkd);
  MixedLoss loss_b = mixed_loss(probs_b, labels, probs_a, eps_mkd);
  Matrix dlogits_a = mixed_dlogits(probs_a, labels, probs_b, eps_mkd, classes);
  Matrix dlogits_b = mixed_dlogits(probs_b, labels, probs_a, eps_mkd, classes);

  apply_update(a, cache_a, dlogits_a, ctx.lr);
  apply_update(b, cache_b, dlogits_b, ctx.lr);

  DistillBatchResult result;
  result.self_loss_a = loss_a.ce;
  result.self_loss_b = loss_b.ce;
  result.distill_loss_a = loss_a.kl;
  result.distill_loss_b = loss_b.kl;
  result.loss_a = loss_a.ce + loss_a.kl;
  result.loss_b = loss_b.ce + loss_b.kl;
  result.count_a2b = labels.size();
  result.count_b2a = labels.size();
  return result;
}

DistillBatchResult async_mkd_step(Learner& a, Learner& b,
                                  const Matrix& features,
                                  const std::vector<int>& labels,
                                  std::size_t iteration, double eps_mkd,
                                  const StepContext& ctx) {
  check_pair(a, b, features, labels);
  if (!(eps_mkd >= 0.0 && eps_mkd <= 1.0))
    throw InvalidInput("async_mkd_step: eps must be in [0,1]");
  std::size_t classes = a.model.class_count();
  check_labels(labels, classes);

  bool update_a = iteration % 2 == 1;
  Learner& active = update_a ? a : b;
  Learner& idle = update_a ? b : a;

  ForwardCache cache;
  Matrix probs = ndmath::softmax_rows(forward(active.model, features, &cache));
  Matrix peer_probs = ndmath::softmax_rows(forward(idle.model, features));

  MixedLoss loss = mixed_loss(probs, labels, peer_probs, eps_mkd);
  Matrix dlogits = mixed_dlogits(probs, labels, peer_probs, eps_mkd, classes);
  apply_update(active, cache, dlogits, ctx.lr);

  DistillBatchResult result;
  if (update_a) {
    result.self_loss_a = loss.ce;
    result.distill_loss_a = loss.kl;
    result.loss_a = loss.ce + loss.kl;
    result.count_b2a = labels.size();
  } else {
    result.self_loss_b = loss.ce;
    result.distill_loss_b = loss.kl;
    result.loss_b = loss.ce + loss.kl;
    result.count_a2b = labels.size();
  }
  return result;
}

DistillBatchResult t2s_batch(Learner& student, Learner& teacher,
                             const Matrix& features,
                             const std::vector<int>& labels, double eps_mkd,
                             const StepContext& ctx) {
  check_pair(student, teacher, features, labels);
  if (!(eps_mkd >= 0.0 && eps_mkd <= 1.0))
    throw InvalidInput("t2s_batch: eps must be in [0,1]");
  std::size_t classes = student.model.class_count();
  check_labels(labels, classes);

  ForwardCache cache_s, cache_t;
  Matrix probs_s =
      ndmath::softmax_rows(forward(student.model, features, &cache_s));
  Matrix probs_t =
      ndmath::softmax_rows(forward(teacher.model, features, &cache_t));

  MixedLoss loss_s = mixed_loss(probs_s, labels, probs_t, eps_mkd);
  Matrix dlogits_s = mixed_dlogits(probs_s, labels, probs_t, eps_mkd, classes);

  TrustParams plain_ce;
  SelfKdBatch self_t = self_kd_batch(plain_ce, labels, probs_t, ctx.epoch,
                                     ctx.total_epochs, classes);
  Matrix dlogits_t = self_dlogits(probs_t, self_t);

  apply_update(student, cache_s, dlogits_s, ctx.lr);
  apply_update(teacher, cache_t, dlogits_t, ctx.lr);

  DistillBatchResult result;
  result.self_loss_a = loss_s.ce;
  result.distill_loss_a = loss_s.kl;
  result.loss_a = loss_s.ce + loss_s.kl;
  result.self_loss_b = self_t.loss;
  result.loss_b = self_t.loss;
  result.count_b2a = labels.size();
  return result;
}

DistillBatchResult independent_batch(Learner& a, Learner& b,
                                     const Matrix& features,
                                     const std::vector<int>& labels,
                                     const StepContext& ctx) {
  check_pair(a, b, features, labels);
  std::size_t classes = a.model.class_count();
  check_labels(labels, classes);

  ForwardCache cache_a, cache_b;
  Matrix probs_a = ndmath::softmax_rows(forward(a.model, features, &cache_a));
  Matrix probs_b = ndmath::softmax_rows(forward(b.model, features, &cache_b));

  SelfKdBatch self_a = self_kd_batch(a.trust, labels, probs_a, ctx.epoch,
                                     ctx.total_epochs, classes);
  SelfKdBatch self_b = self_kd_batch(b.trust, labels, probs_b, ctx.epoch,
                                     ctx.total_epochs, classes);
  Matrix dlogits_a = self_dlogits(probs_a, self_a);
  Matrix dlogits_b = self_dlogits(probs_b, self_b);

  apply_update(a, cache_a, dlogits_a, ctx.lr);
  apply_update(b, cache_b, dlogits_b, ctx.lr);

  DistillBatchResult result;
  result.self_loss_a = self_a.loss;
  result.self_loss_b = self_b.loss;
  result.loss_a = self_a.loss;
  result.loss_b = self_b.loss;
  result.mean_eps_a = self_a.mean_epsilon;
  result.mean_eps_b = self_b.mean_epsilon;
  return result;
}

}  // namespace cmd
