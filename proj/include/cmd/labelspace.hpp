#pragma once

// Label distributions, confidence measures, label-noise injection, and the
// synthetic blobs dataset used by the experiment harness.

#include <cstdint>
#include <string>
#include <vector>

#include "cmd/ndmath.hpp"
#include "cmd/rng.hpp"

namespace cmd {

enum class NoiseKind { None, Symmetric, PairFlip };

NoiseKind noise_kind_from_string(const std::string& s);
std::string to_string(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double rate = 0.0;
  std::uint64_t seed = 0;
};

struct NoisySplit {
  Matrix features;              // n x d
  std::vector<int> clean;       // n, class indices
  std::vector<int> noisy;       // n; equals clean until noise is injected
  NoiseSpec noise;
  std::size_t classes = 0;

  std::size_t size() const { return clean.size(); }
  std::size_t dim() const { return features.cols; }
};

std::vector<double> one_hot(int y, std::size_t classes);

// l(p) = 1 - H(p)/H(u), clamped to [0,1]. Local per-sample confidence.
double sample_confidence(const std::vector<double>& p, std::size_t classes);
double sample_confidence(const double* p, std::size_t n, std::size_t classes);

// Each label independently flips with probability rate to a uniform draw
// over the other classes (never to itself).
std::vector<int> inject_symmetric(const std::vector<int>& labels,
                                  std::size_t classes, double rate, Rng& rng);

// Each label independently flips with probability rate to (y+1) mod classes.
std::vector<int> inject_pairflip(const std::vector<int>& labels,
                                 std::size_t classes, double rate, Rng& rng);

// Apply a NoiseSpec to clean labels (None returns them unchanged).
std::vector<int> inject_noise(const std::vector<int>& labels,
                              std::size_t classes, const NoiseSpec& spec);

// Gaussian clusters: per-class means drawn from a seeded standard normal,
// points = mean + spread * N(0, I). Labels are the cluster index, in class
// order (per_class of class 0, then class 1, ...). noisy starts equal to
// clean.
NoisySplit make_blobs(std::size_t classes, std::size_t per_class,
                      std::size_t dim, double spread, std::uint64_t seed);

// Train/test splits drawn from the same class means: one oversized blobs
// set partitioned per class, so generation is deterministic given the seed.
struct SplitPair {
  NoisySplit train;
  NoisySplit test;
};
SplitPair make_blobs_pair(std::size_t classes, std::size_t per_class,
                          std::size_t test_per_class, std::size_t dim,
                          double spread, std::uint64_t seed);

// CSV with header f0,...,f{d-1},clean_label,noisy_label. Loading accepts a
// clean-only variant (no noisy_label column); the noisy labels then copy the
// clean ones.
void save_split_csv(const NoisySplit& split, const std::string& path);
NoisySplit load_split_csv(const std::string& path);

}  // namespace cmd
