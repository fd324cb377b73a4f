#include "cmd/selfkd.hpp"

#include <algorithm>
#include <cmath>

#include "cmd/error.hpp"
#include "cmd/labelspace.hpp"

namespace cmd {

TrustMethod trust_method_from_string(const std::string& s) {
  if (s == "ce") return TrustMethod::CE;
  if (s == "ls") return TrustMethod::LS;
  if (s == "cp") return TrustMethod::CP;
  if (s == "bootsoft") return TrustMethod::BootSoft;
  if (s == "proselflc") return TrustMethod::ProSelfLC;
  if (s == "mylc") return TrustMethod::MyLC;
  throw InvalidInput("unknown self-KD method: " + s);
}

std::string to_string(TrustMethod method) {
  switch (method) {
    case TrustMethod::CE:
      return "ce";
    case TrustMethod::LS:
      return "ls";
    case TrustMethod::CP:
      return "cp";
    case TrustMethod::BootSoft:
      return "bootsoft";
    case TrustMethod::ProSelfLC:
      return "proselflc";
    case TrustMethod::MyLC:
      return "mylc";
  }
  return "unknown";
}

double logistic(double lambda, double b) {
  return 1.0 / (1.0 + std::exp(-lambda * b));
}

double model_certainty(const Matrix& preds, std::size_t classes) {
  if (preds.rows == 0) throw InvalidInput("model_certainty: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.rows; ++i)
    total += ndmath::entropy(preds.row(i), preds.cols);
  double r = 1.0 - total / (static_cast<double>(preds.rows) *
                            ndmath::uniform_entropy(classes));
  return std::clamp(r, 0.0, 1.0);
}

double my_lc_epsilon(const std::vector<double>& p, double g,
                     std::size_t classes) {
  return g * sample_confidence(p, classes);
}

std::vector<double> refine_label(TrustMethod method,
                                 const std::vector<double>& q,
                                 const std::vector<double>& p,
                                 double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw InvalidInput("refine_label: epsilon must be in [0,1]");
  if (q.size() != p.size())
    throw InvalidInput("refine_label: dimension mismatch");
  std::vector<double> out(q.size());
  switch (method) {
    case TrustMethod::CE:
      return q;
    case TrustMethod::LS: {
      double u = 1.0 / static_cast<double>(q.size());
      for (std::size_t i = 0; i < q.size(); ++i)
        out[i] = (1.0 - epsilon) * q[i] + epsilon * u;
      return out;
    }
    case TrustMethod::CP:
      for (std::size_t i = 0; i < q.size(); ++i)
        out[i] = (1.0 - epsilon) * q[i] - epsilon * p[i];
      return out;
    case TrustMethod::BootSoft:
    case TrustMethod::ProSelfLC:
    case TrustMethod::MyLC:
      for (std::size_t i = 0; i < q.size(); ++i)
        out[i] = (1.0 - epsilon) * q[i] + epsilon * p[i];
      return out;
  }
  throw InvalidInput("refine_label: unknown method");
}

namespace {

// Epsilon for the sample given the method; global_trust is the shared
// per-batch factor where the method has one (mylc's g, proselflc's time
// logistic), ignored otherwise.
double resolve_epsilon(const TrustParams& params, const std::vector<double>& p,
                       double global_trust, std::size_t classes) {
  switch (params.method) {
    case TrustMethod::CE:
      return 0.0;
    case TrustMethod::LS:
    case TrustMethod::CP:
    case TrustMethod::BootSoft:
      return params.epsilon;
    case TrustMethod::ProSelfLC:
    case TrustMethod::MyLC:
      return global_trust * sample_confidence(p, classes);
  }
  return 0.0;
}

double global_trust_factor(const TrustParams& params, const Matrix& batch_preds,
                           int t, int gamma, std::size_t classes) {
  if (params.method == TrustMethod::MyLC) {
    double r = model_certainty(batch_preds, classes);
    return logistic(r - params.rho, params.b1);
  }
  if (params.method == TrustMethod::ProSelfLC) {
    double progress = static_cast<double>(t) / static_cast<double>(gamma);
    return logistic(progress - 0.5, params.b1);
  }
  return 0.0;
}

void check_trust_params(const TrustParams& params) {
  if (!(params.epsilon >= 0.0 && params.epsilon <= 1.0))
    throw InvalidInput("self_kd: epsilon must be in [0,1]");
  if (!(params.rho > 0.0 && params.rho < 1.0))
    throw InvalidInput("self_kd: rho must be in (0,1)");
}

}  // namespace

SelfKdResult self_kd_loss(const TrustParams& params,
                          const std::vector<double>& q,
                          const std::vector<double>& p, int t, int gamma,
                          const Matrix& batch_preds) {
  if (gamma < 1) throw InvalidInput("self_kd_loss: gamma must be >= 1");
  check_trust_params(params);
  std::size_t classes = q.size();
  double g = global_trust_factor(params, batch_preds, t, gamma, classes);
  SelfKdResult result;
  result.epsilon = resolve_epsilon(params, p, g, classes);
  result.refined = refine_label(params.method, q, p, result.epsilon);
  result.loss = ndmath::cross_entropy(result.refined, p);
  return result;
}

SelfKdBatch self_kd_batch(const TrustParams& params,
                          const std::vector<int>& labels, const Matrix& probs,
                          int t, int gamma, std::size_t classes) {
  if (gamma < 1) throw InvalidInput("self_kd_batch: gamma must be >= 1");
  if (labels.size() != probs.rows)
    throw InvalidInput("self_kd_batch: label count mismatch");
  if (probs.cols != classes)
    throw InvalidInput("self_kd_batch: class count mismatch");
  check_trust_params(params);

  double g = global_trust_factor(params, probs, t, gamma, classes);
  SelfKdBatch batch;
  batch.refined.reserve(labels.size());
  batch.epsilons.reserve(labels.size());
  double loss_sum = 0.0, eps_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<double> p(probs.row(i), probs.row(i) + probs.cols);
    std::vector<double> q = one_hot(labels[i], classes);
    double eps = resolve_epsilon(params, p, g, classes);
    std::vector<double> refined = refine_label(params.method, q, p, eps);
    loss_sum += ndmath::cross_entropy(refined, p);
    eps_sum += eps;
    batch.epsilons.push_back(eps);
    batch.refined.push_back(std::move(refined));
  }
  batch.loss = loss_sum / static_cast<double>(labels.size());
  batch.mean_epsilon = eps_sum / static_cast<double>(labels.size());
  return batch;
}

}  // namespace cmd
