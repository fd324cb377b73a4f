#include "cmd/labelspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmd/error.hpp"

namespace cmd {

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::None;
  if (s == "sym") return NoiseKind::Symmetric;
  if (s == "pairflip") return NoiseKind::PairFlip;
  throw InvalidInput("unknown noise kind: " + s);
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::Symmetric:
      return "sym";
    case NoiseKind::PairFlip:
      return "pairflip";
  }
  return "unknown";
}

std::vector<double> one_hot(int y, std::size_t classes) {
  if (y < 0 || static_cast<std::size_t>(y) >= classes)
    throw InvalidInput("one_hot: label out of range");
  std::vector<double> q(classes, 0.0);
  q[static_cast<std::size_t>(y)] = 1.0;
  return q;
}

double sample_confidence(const double* p, std::size_t n, std::size_t classes) {
  double l = 1.0 - ndmath::entropy(p, n) / ndmath::uniform_entropy(classes);
  return std::clamp(l, 0.0, 1.0);
}

double sample_confidence(const std::vector<double>& p, std::size_t classes) {
  return sample_confidence(p.data(), p.size(), classes);
}

std::vector<int> inject_symmetric(const std::vector<int>& labels,
                                  std::size_t classes, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw InvalidInput("inject_symmetric: rate must be in [0,1]");
  if (classes < 2) throw InvalidInput("inject_symmetric: need >= 2 classes");
  std::vector<int> out = labels;
  for (int& y : out) {
    if (rng.uniform() >= rate) continue;
    auto other = static_cast<int>(rng.uniform_below(classes - 1));
    y = other >= y ? other + 1 : other;
  }
  return out;
}

std::vector<int> inject_pairflip(const std::vector<int>& labels,
                                 std::size_t classes, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw InvalidInput("inject_pairflip: rate must be in [0,1]");
  if (classes < 2) throw InvalidInput("inject_pairflip: need >= 2 classes");
  std::vector<int> out = labels;
  for (int& y : out)
    if (rng.uniform() < rate) y = (y + 1) % static_cast<int>(classes);
  return out;
}

std::vector<int> inject_noise(const std::vector<int>& labels,
                              std::size_t classes, const NoiseSpec& spec) {
  Rng rng(spec.seed);
  switch (spec.kind) {
    case NoiseKind::None:
      return labels;
    case NoiseKind::Symmetric:
      return inject_symmetric(labels, classes, spec.rate, rng);
    case NoiseKind::PairFlip:
      return inject_pairflip(labels, classes, spec.rate, rng);
  }
  return labels;
}

NoisySplit make_blobs(std::size_t classes, std::size_t per_class,
                      std::size_t dim, double spread, std::uint64_t seed) {
  if (classes < 2) throw InvalidInput("make_blobs: need >= 2 classes");
  if (per_class < 1) throw InvalidInput("make_blobs: need >= 1 point per class");
  if (dim < 1) throw InvalidInput("make_blobs: need >= 1 dimension");
  if (!(spread >= 0.0)) throw InvalidInput("make_blobs: spread must be >= 0");

  Rng mean_rng(derive_seed(seed, 0));
  Matrix means(classes, dim);
  for (double& v : means.data) v = mean_rng.normal();

  Rng point_rng(derive_seed(seed, 1));
  NoisySplit split;
  split.classes = classes;
  split.features = Matrix(classes * per_class, dim);
  split.clean.reserve(classes * per_class);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      double* row = split.features.row(c * per_class + i);
      for (std::size_t j = 0; j < dim; ++j)
        row[j] = means.at(c, j) + spread * point_rng.normal();
      split.clean.push_back(static_cast<int>(c));
    }
  }
  split.noisy = split.clean;
  return split;
}

SplitPair make_blobs_pair(std::size_t classes, std::size_t per_class,
                          std::size_t test_per_class, std::size_t dim,
                          double spread, std::uint64_t seed) {
  if (test_per_class < 1)
    throw InvalidInput("make_blobs_pair: need >= 1 test point per class");
  NoisySplit all =
      make_blobs(classes, per_class + test_per_class, dim, spread, seed);
  SplitPair pair;
  pair.train.classes = classes;
  pair.test.classes = classes;
  pair.train.features = Matrix(classes * per_class, dim);
  pair.test.features = Matrix(classes * test_per_class, dim);
  std::size_t chunk = per_class + test_per_class;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::copy_n(all.features.row(c * chunk + i), dim,
                  pair.train.features.row(c * per_class + i));
      pair.train.clean.push_back(static_cast<int>(c));
    }
    for (std::size_t i = 0; i < test_per_class; ++i) {
      std::copy_n(all.features.row(c * chunk + per_class + i), dim,
                  pair.test.features.row(c * test_per_class + i));
      pair.test.clean.push_back(static_cast<int>(c));
    }
  }
  pair.train.noisy = pair.train.clean;
  pair.test.noisy = pair.test.clean;
  return pair;
}

void save_split_csv(const NoisySplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("save_split_csv: cannot open " + path);
  for (std::size_t j = 0; j < split.dim(); ++j) out << 'f' << j << ',';
  out << "clean_label,noisy_label\n";
  char buf[32];
  for (std::size_t i = 0; i < split.size(); ++i) {
    const double* row = split.features.row(i);
    for (std::size_t j = 0; j < split.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << buf << ',';
    }
    out << split.clean[i] << ',' << split.noisy[i] << '\n';
  }
  if (!out) throw InvalidInput("save_split_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidInput("dataset CSV line " + std::to_string(line_no) +
                       ": bad number '" + s + "'");
  return v;
}

int parse_label(const std::string& s, std::size_t line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
    throw InvalidInput("dataset CSV line " + std::to_string(line_no) +
                       ": bad label '" + s + "'");
  return v;
}

}  // namespace

NoisySplit load_split_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("load_split_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw InvalidInput("load_split_csv: empty file " + path);

  std::vector<std::string> header = split_line(line);
  std::size_t dim = 0;
  while (dim < header.size() && header[dim] == "f" + std::to_string(dim)) ++dim;
  bool has_noisy;
  if (dim + 2 == header.size() && header[dim] == "clean_label" &&
      header[dim + 1] == "noisy_label") {
    has_noisy = true;
  } else if (dim + 1 == header.size() && header[dim] == "clean_label") {
    has_noisy = false;
  } else {
    throw InvalidInput("load_split_csv: bad header in " + path);
  }
  if (dim == 0) throw InvalidInput("load_split_csv: no feature columns in " + path);

  std::vector<double> values;
  std::vector<int> clean, noisy;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw InvalidInput("dataset CSV line " + std::to_string(line_no) +
                         ": expected " + std::to_string(header.size()) +
                         " columns, got " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < dim; ++j)
      values.push_back(parse_double(cells[j], line_no));
    clean.push_back(parse_label(cells[dim], line_no));
    noisy.push_back(has_noisy ? parse_label(cells[dim + 1], line_no)
                              : clean.back());
  }
  if (clean.empty()) throw InvalidInput("load_split_csv: no rows in " + path);

  NoisySplit split;
  split.features.rows = clean.size();
  split.features.cols = dim;
  split.features.data = std::move(values);
  int max_label = 0;
  for (std::size_t i = 0; i < clean.size(); ++i)
    max_label = std::max({max_label, clean[i], noisy[i]});
  split.classes = static_cast<std::size_t>(max_label) + 1;
  split.clean = std::move(clean);
  split.noisy = std::move(noisy);
  return split;
}

}  // namespace cmd
