#include "cmd/selection.hpp"

#include <limits>

#include "cmd/error.hpp"
#include "cmd/selfkd.hpp"

namespace cmd {

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "zero") return SelectionMode::Zero;
  if (s == "all") return SelectionMode::All;
  if (s == "static") return SelectionMode::Static;
  if (s == "progressive") return SelectionMode::Progressive;
  throw InvalidInput("unknown selection mode: " + s);
}

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::Zero:
      return "zero";
    case SelectionMode::All:
      return "all";
    case SelectionMode::Static:
      return "static";
    case SelectionMode::Progressive:
      return "progressive";
  }
  return "unknown";
}

void validate(const SelectionPolicy& policy) {
  if (policy.gamma < 1)
    throw InvalidInput("selection: gamma must be >= 1");
  if (policy.classes < 2)
    throw InvalidInput("selection: need >= 2 classes");
  bool scaled = policy.mode == SelectionMode::Static ||
                policy.mode == SelectionMode::Progressive;
  if (scaled && !(policy.eta > 0.0))
    throw InvalidInput("selection: eta must be > 0");
}

double threshold(const SelectionPolicy& policy, int t) {
  validate(policy);
  if (t < 0 || t > policy.gamma)
    throw InvalidInput("threshold: epoch outside [0, gamma]");
  switch (policy.mode) {
    case SelectionMode::Zero:
      return 0.0;
    case SelectionMode::All:
      return std::numeric_limits<double>::infinity();
    case SelectionMode::Static:
      return ndmath::uniform_entropy(policy.classes) / policy.eta;
    case SelectionMode::Progressive: {
      double progress =
          static_cast<double>(t) / static_cast<double>(policy.gamma);
      return ndmath::uniform_entropy(policy.classes) / policy.eta * 2.0 *
             logistic(progress - 0.5, policy.b2);
    }
  }
  return 0.0;
}

bool is_confident(const double* p, std::size_t n, double chi) {
  return ndmath::entropy(p, n) < chi;
}

bool is_confident(const std::vector<double>& p, double chi) {
  return is_confident(p.data(), p.size(), chi);
}

std::vector<std::size_t> select_batch(const Matrix& preds, double chi) {
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < preds.rows; ++i)
    if (is_confident(preds.row(i), preds.cols, chi)) selected.push_back(i);
  return selected;
}

}  // namespace cmd
