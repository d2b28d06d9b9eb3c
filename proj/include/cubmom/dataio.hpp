#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cubmom::dataio {

/// Sparse binary-classification dataset. Feature indices are 0-based and
/// strictly increasing within a row; labels are normalized to {-1, +1}.
struct Dataset {
  int n = 0;
  int d = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> labels;
};

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line_, int column_, const std::string& what_)
      : std::runtime_error("parse error at line " + std::to_string(line_) +
                           ", column " + std::to_string(column_) + ": " + what_),
        line(line_),
        column(column_) {}
};

/// Parses SVMlight/LibSVM text: `<label> <idx>:<val> ...` per line, indices
/// 1-based strictly increasing, `#` starts a comment. Labels <= 0 map to -1,
/// > 0 to +1. The feature dimension is the largest index seen, or
/// `dim_override` when that is larger.
Dataset parse_libsvm(std::istream& in, int dim_override = 0);
Dataset parse_libsvm_file(const std::string& path, int dim_override = 0);

/// Canonical text form; parse(serialize(ds)) reproduces ds exactly.
std::string serialize(const Dataset& ds);

/// Gaussian features with labels sign(a.w*), flipped independently at rate
/// `noise`. Deterministic per seed. If `w_star` is non-null it receives the
/// generating hyperplane.
Dataset synth_logistic(int n, int d, std::uint64_t seed, double noise,
                       std::vector<double>* w_star = nullptr);

/// Uniform without-replacement subset of k rows; deterministic per seed.
Dataset subsample(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace cubmom::dataio
