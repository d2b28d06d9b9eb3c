#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "cubmom/dataio.hpp"
#include "cubmom/rng.hpp"

using namespace cubmom;
using dataio::Dataset;

namespace {

Dataset parse(const std::string& text, int dim_override = 0) {
  std::istringstream is(text);
  return dataio::parse_libsvm(is, dim_override);
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  return a.n == b.n && a.d == b.d && a.rows == b.rows && a.labels == b.labels;
}

// multiset comparison of (label, row) pairs, order-insensitive
bool same_multiset(const Dataset& a, const Dataset& b) {
  if (a.n != b.n || a.d != b.d) return false;
  using Row = std::pair<double, std::vector<std::pair<int, double>>>;
  std::multiset<Row> sa, sb;
  for (int i = 0; i < a.n; ++i) sa.insert({a.labels[i], a.rows[i]});
  for (int i = 0; i < b.n; ++i) sb.insert({b.labels[i], b.rows[i]});
  return sa == sb;
}

}  // namespace

TEST_CASE("parse basic record") {
  const Dataset ds = parse("+1 1:2.0 3:-1.5\n");
  CHECK(ds.n == 1);
  CHECK(ds.d == 3);
  REQUIRE(ds.rows[0].size() == 2);
  CHECK(ds.rows[0][0] == std::pair<int, double>{0, 2.0});
  CHECK(ds.rows[0][1] == std::pair<int, double>{2, -1.5});
  CHECK(ds.labels[0] == 1.0);
}

TEST_CASE("parse label-only line gives a zero row") {
  const Dataset ds = parse("-1\n");
  CHECK(ds.n == 1);
  CHECK(ds.d == 1);
  CHECK(ds.rows[0].empty());
  CHECK(ds.labels[0] == -1.0);
}

TEST_CASE("parse errors carry line and column") {
  CHECK_THROWS_AS(parse("1 3:abc\n"), dataio::ParseError);
  try {
    parse("1 3:abc\n");
  } catch (const dataio::ParseError& e) {
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("3:abc") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("x 1:2\n"), dataio::ParseError);       // bad label
  CHECK_THROWS_AS(parse("1 0:2\n"), dataio::ParseError);       // index <= 0
  CHECK_THROWS_AS(parse("1 2:1 2:3\n"), dataio::ParseError);   // non-increasing
  CHECK_THROWS_AS(parse("1 3:1 2:3\n"), dataio::ParseError);   // decreasing
  CHECK_THROWS_AS(parse("1 1.5:2\n"), dataio::ParseError);     // non-integer idx
  CHECK_THROWS_AS(parse("1 5\n"), dataio::ParseError);         // missing colon
  try {
    parse("+1 1:1\n-1 2:0.5 1:1\n");
  } catch (const dataio::ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("labels normalize: nonpositive to -1, positive to +1") {
  const Dataset ds = parse("0 1:1\n-3 1:1\n2.5 1:1\n");
  CHECK(ds.labels == std::vector<double>{-1.0, -1.0, 1.0});
}

TEST_CASE("comments, blank lines and crlf endings") {
  const Dataset ds = parse("# header comment\n+1 1:1 2:2 # trailing\r\n\n-1 2:5\r\n");
  CHECK(ds.n == 2);
  CHECK(ds.d == 2);
  CHECK(ds.rows[1][0] == std::pair<int, double>{1, 5.0});
}

TEST_CASE("dimension override only ever grows d") {
  CHECK(parse("+1 1:1\n", 7).d == 7);
  CHECK(parse("+1 9:1\n", 3).d == 9);
}

TEST_CASE("round trip through serialize") {
  Rng rng(11, 4);
  for (int trial = 0; trial < 30; ++trial) {
    Dataset ds;
    ds.n = 1 + static_cast<int>(rng.below(20));
    ds.d = 1 + static_cast<int>(rng.below(12));
    for (int i = 0; i < ds.n; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < ds.d; ++j)
        if (rng.uniform01() < 0.4) row.emplace_back(j, rng.normal());
      ds.rows.push_back(row);
      ds.labels.push_back(rng.uniform01() < 0.5 ? -1.0 : 1.0);
    }
    const Dataset reparsed = parse(dataio::serialize(ds), ds.d);
    REQUIRE(same_dataset(ds, reparsed));
    // serialize is a fixed point afterwards
    REQUIRE(dataio::serialize(reparsed) == dataio::serialize(ds));
  }
}

TEST_CASE("parsed indices stay within [0, d)") {
  const Dataset ds = parse("+1 1:1 4:2\n-1 2:3\n");
  for (const auto& row : ds.rows)
    for (const auto& [j, v] : row) {
      CHECK(j >= 0);
      CHECK(j < ds.d);
    }
}

TEST_CASE("synth_logistic determinism") {
  const Dataset a = dataio::synth_logistic(4, 2, 7, 0.0);
  const Dataset b = dataio::synth_logistic(4, 2, 7, 0.0);
  CHECK(same_dataset(a, b));
  const Dataset c = dataio::synth_logistic(4, 2, 8, 0.0);
  CHECK_FALSE(same_dataset(a, c));
}

TEST_CASE("synth_logistic noise=0 is separated by the generating hyperplane") {
  std::vector<double> w;
  const Dataset ds = dataio::synth_logistic(200, 6, 3, 0.0, &w);
  REQUIRE(static_cast<int>(w.size()) == 6);
  for (int i = 0; i < ds.n; ++i) {
    double margin = 0.0;
    for (const auto& [j, v] : ds.rows[i]) margin += v * w[j];
    CHECK(ds.labels[i] * margin >= 0.0);
  }
}

TEST_CASE("synth_logistic flip fraction concentrates") {
  std::vector<double> w;
  const Dataset ds = dataio::synth_logistic(2000, 20, 1, 0.1, &w);
  int flips = 0;
  for (int i = 0; i < ds.n; ++i) {
    double margin = 0.0;
    for (const auto& [j, v] : ds.rows[i]) margin += v * w[j];
    const double clean = margin >= 0.0 ? 1.0 : -1.0;
    if (ds.labels[i] != clean) ++flips;
  }
  const double fraction = static_cast<double>(flips) / ds.n;
  CHECK(fraction >= 0.06);
  CHECK(fraction <= 0.14);
}

TEST_CASE("synth_logistic rejects bad arguments") {
  CHECK_THROWS_AS(dataio::synth_logistic(0, 2, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dataio::synth_logistic(4, 2, 1, 0.5), std::invalid_argument);
}

TEST_CASE("subsample contracts") {
  const Dataset ds = dataio::synth_logistic(40, 3, 5, 0.2);
  const Dataset all = dataio::subsample(ds, 40, 9);
  CHECK(same_multiset(ds, all));

  const Dataset one = dataio::subsample(ds, 1, 9);
  CHECK(one.n == 1);
  CHECK(one.d == ds.d);
  bool found = false;
  for (int i = 0; i < ds.n; ++i)
    found = found || (ds.rows[i] == one.rows[0] && ds.labels[i] == one.labels[0]);
  CHECK(found);

  CHECK(same_dataset(dataio::subsample(ds, 17, 123), dataio::subsample(ds, 17, 123)));
  CHECK_THROWS_AS(dataio::subsample(ds, 41, 1), std::invalid_argument);
  CHECK_THROWS_AS(dataio::subsample(ds, 0, 1), std::invalid_argument);
}
