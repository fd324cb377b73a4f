#pragma once

// Confident-knowledge selection: a prediction is confident when its entropy
// falls strictly below the epoch's threshold
//
//   chi(t) = H(u)/eta * 2 h(t/T - 0.5, b2)
//
// Static mode pins b2 = 0 (constant chi = H(u)/eta); Progressive lets chi
// rise (b2 > 0) or fall (b2 < 0) over training. Zero and All are explicit
// degenerate modes: select nothing, select everything.

#include <cstddef>
#include <string>
#include <vector>

#include "cmd/ndmath.hpp"

namespace cmd {

enum class SelectionMode { Zero, All, Static, Progressive };

SelectionMode selection_mode_from_string(const std::string& s);
std::string to_string(SelectionMode mode);

struct SelectionPolicy {
  SelectionMode mode = SelectionMode::Zero;
  double eta = 2.0;   // > 0, threshold scale (static/progressive)
  double b2 = 0.0;    // time gain (progressive)
  int gamma = 1;      // total epochs, >= 1
  std::size_t classes = 2;
};

// Validates the policy fields; throws InvalidInput on violations
// (eta <= 0 for static/progressive, gamma < 1, classes < 2).
void validate(const SelectionPolicy& policy);

// chi at epoch t; All yields +infinity. Throws InvalidInput unless
// 0 <= t <= gamma.
double threshold(const SelectionPolicy& policy, int t);

// H(p) < chi, strict.
bool is_confident(const std::vector<double>& p, double chi);
bool is_confident(const double* p, std::size_t n, double chi);

// Indices i with H(row i) < chi, in original order.
std::vector<std::size_t> select_batch(const Matrix& preds, double chi);

}  // namespace cmd
