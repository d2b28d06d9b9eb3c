#include "cubmom/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cubmom/rng.hpp"

namespace cubmom::dataio {

namespace {

void validate_dataset(const Dataset& ds) {
  if (ds.n < 1 || ds.d < 1)
    throw std::invalid_argument("dataset requires n >= 1 and d >= 1");
}

// from_chars does not accept a leading '+', which labels like "+1" carry
bool parse_double(const std::string& tok, double* out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  if (begin != end && *begin == '+') ++begin;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& tok, long* out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  if (begin != end && *begin == '+') ++begin;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, int dim_override) {
  Dataset ds;
  int max_index = 0;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);

    // tokenize, remembering 1-based column offsets for diagnostics
    std::vector<std::pair<std::string, int>> tokens;
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t start = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i > start)
        tokens.emplace_back(raw.substr(start, i - start), static_cast<int>(start) + 1);
    }
    if (tokens.empty()) continue;  // blank or comment-only line

    double label_raw = 0.0;
    if (!parse_double(tokens[0].first, &label_raw))
      throw ParseError(line_no, tokens[0].second,
                       "non-numeric label \"" + tokens[0].first + "\"");

    std::vector<std::pair<int, double>> row;
    int prev_index = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string& tok = tokens[t].first;
      const int col = tokens[t].second;
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(line_no, col, "malformed pair \"" + tok + "\"");
      long index = 0;
      if (!parse_int(tok.substr(0, colon), &index))
        throw ParseError(line_no, col,
                         "non-integer index in pair \"" + tok + "\"");
      if (index <= 0)
        throw ParseError(line_no, col,
                         "index must be positive in pair \"" + tok + "\"");
      if (index <= prev_index)
        throw ParseError(line_no, col,
                         "non-increasing index in pair \"" + tok + "\"");
      double value = 0.0;
      if (!parse_double(tok.substr(colon + 1), &value))
        throw ParseError(line_no, col,
                         "non-numeric value in pair \"" + tok + "\"");
      prev_index = static_cast<int>(index);
      max_index = std::max(max_index, prev_index);
      row.emplace_back(prev_index - 1, value);
    }

    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label_raw > 0.0 ? 1.0 : -1.0);
  }
  ds.n = static_cast<int>(ds.rows.size());
  ds.d = std::max({1, max_index, dim_override});
  validate_dataset(ds);
  return ds;
}

Dataset parse_libsvm_file(const std::string& path, int dim_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(in, dim_override);
}

std::string serialize(const Dataset& ds) {
  std::string out;
  char buf[64];
  for (int i = 0; i < ds.n; ++i) {
    out += ds.labels[i] > 0 ? "+1" : "-1";
    for (const auto& [idx, val] : ds.rows[i]) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g", idx + 1, val);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Dataset synth_logistic(int n, int d, std::uint64_t seed, double noise,
                       std::vector<double>* w_star) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_logistic: n, d >= 1");
  if (noise < 0.0 || noise >= 0.5)
    throw std::invalid_argument("synth_logistic: noise in [0, 0.5)");
  Rng rng(seed, /*stream=*/101);

  std::vector<double> w(d);
  for (auto& wi : w) wi = rng.normal();

  Dataset ds;
  ds.n = n;
  ds.d = d;
  ds.rows.resize(n);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& row = ds.rows[i];
    row.reserve(d);
    double margin = 0.0;
    for (int j = 0; j < d; ++j) {
      const double a = rng.normal();
      row.emplace_back(j, a);
      margin += a * w[j];
    }
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (noise > 0.0 && rng.uniform01() < noise) label = -label;
    ds.labels[i] = label;
  }
  if (w_star) *w_star = std::move(w);
  return ds;
}

Dataset subsample(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 1 || k > ds.n)
    throw std::invalid_argument("subsample: require 1 <= k <= n");
  Rng rng(seed, /*stream=*/202);
  std::vector<int> perm(ds.n);
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates prefix of length k
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(ds.n - i));
    std::swap(perm[i], perm[j]);
  }
  Dataset out;
  out.n = k;
  out.d = ds.d;
  out.rows.reserve(k);
  out.labels.reserve(k);
  for (int i = 0; i < k; ++i) {
    out.rows.push_back(ds.rows[perm[i]]);
    out.labels.push_back(ds.labels[perm[i]]);
  }
  return out;
}

}  // namespace cubmom::dataio
