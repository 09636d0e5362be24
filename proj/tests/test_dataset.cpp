#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <set>
#include <sstream>

#include "arrowflow/dataset.hpp"

using namespace arrowflow;

TEST_CASE("csv parsing") {
  std::istringstream csv(
      "f1,f2,label\n"
      "1.0,2.0,b\n"
      "3.0,4.0,a\n"
      "5.5,-1.0,b\n");
  const Dataset ds = parse_csv(csv, "fixture");
  REQUIRE(ds.size() == 3);
  CHECK(ds.feature_names == std::vector<std::string>{"f1", "f2"});
  CHECK(ds.class_names == std::vector<std::string>{"a", "b"});  // sorted label order
  CHECK(ds.y == std::vector<int>{1, 0, 1});
  CHECK(ds.x.at(2, 0) == doctest::Approx(5.5));
  CHECK(ds.x.at(2, 1) == doctest::Approx(-1.0));
}

TEST_CASE("csv error paths") {
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_csv(empty, "empty"), std::runtime_error);

  std::istringstream header_only("a,b,label\n");
  CHECK_THROWS_AS(parse_csv(header_only, "header"), std::runtime_error);

  std::istringstream ragged("a,b,label\n1.0,2.0,x\n1.0,x\n");
  CHECK_THROWS_AS(parse_csv(ragged, "ragged"), std::runtime_error);

  std::istringstream non_numeric("a,b,label\n1.0,oops,x\n");
  CHECK_THROWS_AS(parse_csv(non_numeric, "non-numeric"), std::runtime_error);

  CHECK_THROWS_AS(load_csv("/nonexistent/path.csv"), std::runtime_error);
}

TEST_CASE("stratified split proportions and determinism") {
  // 100 samples, 2 balanced classes.
  Matrix x(100, 2);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    x.at(i, 0) = static_cast<double>(i);
    x.at(i, 1) = static_cast<double>(i) * 0.5;
    y[i] = i < 50 ? 0 : 1;
  }
  Dataset ds;
  ds.x = x;
  ds.y = y;
  ds.feature_names = {"a", "b"};
  ds.class_names = {"neg", "pos"};

  const auto [train, test] = stratified_split(ds, 0.2, 42);
  CHECK(train.size() == 80);
  CHECK(test.size() == 20);
  int test_per_class[2] = {0, 0};
  for (const int label : test.y) ++test_per_class[label];
  CHECK(test_per_class[0] == 10);
  CHECK(test_per_class[1] == 10);

  const auto [train2, test2] = stratified_split(ds, 0.2, 42);
  CHECK(train.x.data == train2.x.data);
  CHECK(test.y == test2.y);

  const auto [train3, test3] = stratified_split(ds, 0.2, 43);
  CHECK(train.x.data != train3.x.data);

  // Unbalanced classes keep counts within rounding of the fraction.
  Dataset skew;
  skew.x = Matrix(30, 1);
  skew.y.assign(30, 0);
  for (std::size_t i = 0; i < 30; ++i) {
    skew.x.at(i, 0) = static_cast<double>(i);
    skew.y[i] = i < 21 ? 0 : 1;
  }
  skew.class_names = {"a", "b"};
  skew.feature_names = {"f"};
  const auto [strain, stest] = stratified_split(skew, 0.2, 7);
  int per_class[2] = {0, 0};
  for (const int label : stest.y) ++per_class[label];
  CHECK(std::abs(per_class[0] - 0.2 * 21) <= 1.0);
  CHECK(std::abs(per_class[1] - 0.2 * 9) <= 1.0);

  Dataset tiny;
  tiny.x = Matrix(3, 1);
  tiny.y = {0, 0, 1};
  tiny.class_names = {"a", "b"};
  tiny.feature_names = {"f"};
  CHECK_THROWS_AS(stratified_split(tiny, 0.2, 1), std::invalid_argument);
}

TEST_CASE("native rank encoding") {
  const std::vector<double> x = {5.0, 1.0, 3.0};
  CHECK(native_rank_encode(x) == Permutation({0, 2, 1}));

  // Strictly monotone transforms leave the encoding untouched.
  const std::vector<double> logged = {std::log1p(5.0), std::log1p(1.0), std::log1p(3.0)};
  CHECK(native_rank_encode(logged) == native_rank_encode(x));

  CHECK_THROWS_AS(native_rank_encode(std::vector<double>{1.0}), std::invalid_argument);
  const std::vector<double> with_nan = {1.0, std::nan("")};
  CHECK_THROWS_AS(native_rank_encode(with_nan), std::invalid_argument);
}

TEST_CASE("perturbation kinds") {
  Dataset ds;
  ds.x = Matrix(5, 3);
  SeededRng rng(77);
  for (double& v : ds.x.data) v = rng.next_double() * 10.0;
  ds.y.assign(5, 0);
  ds.class_names = {"a", "b"};
  ds.feature_names = {"f1", "f2", "f3"};
  const TrainStats stats = column_stats(ds.x);

  SUBCASE("gaussian sigma=0 is the identity") {
    PerturbationSpec spec;
    spec.kind = PerturbationKind::kGaussian;
    spec.amount = 0.0;
    CHECK(perturb(ds, spec, stats).x.data == ds.x.data);
  }

  SUBCASE("gaussian noise is seeded") {
    const PerturbationSpec spec = PerturbationSpec::parse("gaussian:0.5");
    const Dataset a = perturb(ds, spec, stats);
    const Dataset b = perturb(ds, spec, stats);
    CHECK(a.x.data == b.x.data);
    CHECK(a.x.data != ds.x.data);
  }

  SUBCASE("mask fraction 1.0 replaces everything with column means") {
    PerturbationSpec spec = PerturbationSpec::parse("mask:1.0");
    const Dataset masked = perturb(ds, spec, stats);
    for (std::size_t r = 0; r < masked.x.rows; ++r) {
      for (std::size_t c = 0; c < masked.x.cols; ++c) {
        CHECK(masked.x.at(r, c) == doctest::Approx(stats.means[c]));
      }
    }
  }

  SUBCASE("mask determinism") {
    PerturbationSpec spec = PerturbationSpec::parse("mask:0.4");
    spec.seed = 5;
    const Dataset a = perturb(ds, spec, stats);
    const Dataset b = perturb(ds, spec, stats);
    CHECK(a.x.data == b.x.data);
  }

  SUBCASE("rank transform yields per-column permutations of 0..n-1") {
    const PerturbationSpec spec = PerturbationSpec::parse("rank_transform");
    const Dataset ranked = perturb(ds, spec, stats);
    for (std::size_t c = 0; c < ranked.x.cols; ++c) {
      std::set<double> seen;
      for (std::size_t r = 0; r < ranked.x.rows; ++r) seen.insert(ranked.x.at(r, c));
      CHECK(seen.size() == ranked.x.rows);
      CHECK(*seen.begin() == doctest::Approx(0.0));
      CHECK(*seen.rbegin() == doctest::Approx(static_cast<double>(ranked.x.rows - 1)));
    }
  }

  SUBCASE("monotone suite preserves native encodings on positive data") {
    for (const std::string& name : monotone_suite()) {
      const PerturbationSpec spec = PerturbationSpec::parse("monotone:" + name);
      const Dataset transformed = perturb(ds, spec, stats);
      for (std::size_t r = 0; r < ds.x.rows; ++r) {
        CHECK(native_rank_encode(transformed.x.row(r)) == native_rank_encode(ds.x.row(r)));
      }
    }
  }

  SUBCASE("per-gene scale factors follow the lognormal band") {
    Dataset wide;
    wide.x = Matrix(1, 20000);
    for (double& v : wide.x.data) v = 1.0;
    wide.y = {0};
    wide.class_names = {"a", "b"};
    PerturbationSpec spec = PerturbationSpec::parse("per_gene_scale:0.3");
    spec.seed = 11;
    const TrainStats wide_stats = column_stats(wide.x);
    const Dataset scaled = perturb(wide, spec, wide_stats);
    std::size_t within = 0;
    for (std::size_t c = 0; c < scaled.x.cols; ++c) {
      const double factor = scaled.x.at(0, c);
      within += factor >= 0.55 && factor <= 1.82;
    }
    const double fraction = static_cast<double>(within) / static_cast<double>(scaled.x.cols);
    CHECK(fraction == doctest::Approx(0.9545).epsilon(0.012));
  }

  SUBCASE("unknown kinds are rejected") {
    CHECK_THROWS_AS(PerturbationSpec::parse("waveform:1"), std::invalid_argument);
    CHECK_THROWS_AS(PerturbationSpec::parse("monotone:tanh"), std::invalid_argument);
  }
}

TEST_CASE("error rate and repetition statistics") {
  const std::vector<int> labels = {0, 1, 1, 0};
  CHECK(error_rate(std::vector<int>{0, 1, 1, 0}, labels) == doctest::Approx(0.0));
  CHECK(error_rate(std::vector<int>{1, 1, 1, 0}, labels) == doctest::Approx(0.25));
  CHECK_THROWS_AS(error_rate(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);

  const std::vector<double> same = {0.25, 0.25, 0.25};
  const auto [mean, sd] = mean_std(same);
  CHECK(mean == doctest::Approx(0.25));
  CHECK(sd == doctest::Approx(0.0));

  const std::vector<double> mixed = {0.1, 0.3};
  const auto [m2, s2] = mean_std(mixed);
  CHECK(m2 == doctest::Approx(0.2));
  CHECK(s2 == doctest::Approx(std::sqrt(0.02)));
}

TEST_CASE("csv rejects non-finite features") {
  std::istringstream nan_csv("a,b,label\n1.0,nan,x\n2.0,3.0,y\n");
  CHECK_THROWS_AS(parse_csv(nan_csv, "nan"), std::runtime_error);
  std::istringstream inf_csv("a,b,label\n1.0,inf,x\n2.0,3.0,y\n");
  CHECK_THROWS_AS(parse_csv(inf_csv, "inf"), std::runtime_error);
}

TEST_CASE("constant predictions on balanced classes err at (C-1)/C") {
  std::vector<int> labels;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 25; ++i) labels.push_back(c);
  }
  const std::vector<int> constant(labels.size(), 2);
  CHECK(error_rate(constant, labels) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("a csv without feature columns is rejected") {
  std::istringstream only_label("label\nx\ny\n");
  CHECK_THROWS_AS(parse_csv(only_label, "label-only"), std::runtime_error);
}
