#include <doctest.h>

#include <stdexcept>
#include <cmath>
#include <vector>

#include "arrowflow/network.hpp"

using namespace arrowflow;

namespace {

// Two well-separated permutation classes: near-identity vs near-reverse.
std::pair<std::vector<Permutation>, std::vector<int>> separated_data(int vocab, int per_class,
                                                                     SeededRng& rng) {
  std::vector<Permutation> inputs;
  std::vector<int> labels;
  const Permutation id = Permutation::identity(vocab);
  const Permutation rev = Permutation::reversed(vocab);
  for (int i = 0; i < per_class; ++i) {
    inputs.push_back(adjacent_transpose_augment(id, 1, rng));
    labels.push_back(0);
    inputs.push_back(adjacent_transpose_augment(rev, 1, rng));
    labels.push_back(1);
  }
  return {inputs, labels};
}

NetworkConfig small_config() {
  NetworkConfig config;
  config.hidden_sizes = {16};
  config.classes = 2;
  config.iterations = 200;
  config.eta = 0.1;
  return config;
}

}  // namespace

TEST_CASE("forward shapes and determinism") {
  SeededRng rng(1);
  NetworkConfig config = small_config();
  config.hidden_sizes = {6, 9};
  config.classes = 3;
  Network net = Network::init(8, config, rng);

  const Permutation input = random_permutation(8, rng);
  const ForwardResult fwd = net.forward(input);
  REQUIRE(fwd.layer_outputs.size() == 3);
  CHECK(fwd.layer_outputs[0].size() == 6);
  CHECK(fwd.layer_outputs[1].size() == 9);
  CHECK(fwd.layer_outputs[2].size() == 3);
  CHECK(fwd.final_distances.size() == 3);

  const ForwardResult again = net.forward(input);
  CHECK(fwd.final_distances == again.final_distances);
  for (std::size_t l = 0; l < fwd.layer_outputs.size(); ++l) {
    CHECK(fwd.layer_outputs[l] == again.layer_outputs[l]);
  }
}

TEST_CASE("prediction is argmin with ties to the smaller class") {
  SeededRng rng(2);
  NetworkConfig config = small_config();
  Network net = Network::init(6, config, rng);
  const ForwardResult fwd = net.forward(Permutation::identity(6));
  int expected = 0;
  for (int c = 1; c < 2; ++c) {
    if (fwd.final_distances[static_cast<std::size_t>(c)] <
        fwd.final_distances[static_cast<std::size_t>(expected)]) {
      expected = c;
    }
  }
  CHECK(net.predict(Permutation::identity(6)) == expected);
}

TEST_CASE("training reaches zero error on separated classes") {
  SeededRng data_rng(3);
  const auto [inputs, labels] = separated_data(10, 10, data_rng);

  SeededRng rng(4);
  Network net = Network::init(10, small_config(), rng);
  SeededRng train_rng(5);
  const TrainLog log = net.train(inputs, labels, train_rng);
  CHECK(log.final_train_error == doctest::Approx(0.0));
  CHECK(log.rows.size() == 200);
}

TEST_CASE("frozen output layer is bitwise unchanged by training") {
  SeededRng data_rng(6);
  const auto [inputs, labels] = separated_data(10, 8, data_rng);

  SeededRng rng(7);
  NetworkConfig config = small_config();
  config.last_layer_update = false;
  Network net = Network::init(10, config, rng);

  const int out = net.layer_count() - 1;
  std::vector<Permutation> before;
  for (int c = 0; c < config.classes; ++c) before.push_back(net.layer(out).filter(c).ordering());
  CHECK(net.layer(out).frozen());

  SeededRng train_rng(8);
  net.train(inputs, labels, train_rng);
  for (int c = 0; c < config.classes; ++c) {
    CHECK(net.layer(out).filter(c).ordering() == before[static_cast<std::size_t>(c)]);
    CHECK_FALSE(net.layer(out).filter(c).has_accumulator());
  }
}

TEST_CASE("llu=true trains the output layer supervised") {
  SeededRng data_rng(9);
  const auto [inputs, labels] = separated_data(10, 8, data_rng);

  SeededRng rng(10);
  NetworkConfig config = small_config();
  config.last_layer_update = true;
  Network net = Network::init(10, config, rng);
  CHECK_FALSE(net.layer(net.layer_count() - 1).frozen());
  SeededRng train_rng(11);
  net.train(inputs, labels, train_rng);
  CHECK(net.layer(net.layer_count() - 1).filter(0).has_accumulator());
}

TEST_CASE("training is deterministic under a fixed seed") {
  SeededRng data_rng(12);
  const auto [inputs, labels] = separated_data(8, 6, data_rng);

  const auto run = [&]() {
    SeededRng rng(13);
    Network net = Network::init(8, small_config(), rng);
    SeededRng train_rng(14);
    net.train(inputs, labels, train_rng);
    std::vector<Permutation> orderings;
    for (int l = 0; l < net.layer_count(); ++l) {
      for (int j = 0; j < net.layer(l).filter_count(); ++j) {
        orderings.push_back(net.layer(l).filter(j).ordering());
      }
    }
    return orderings;
  };
  CHECK(run() == run());
}

TEST_CASE("cosine schedule decays from eta to zero") {
  SeededRng rng(15);
  NetworkConfig config = small_config();
  config.lr_schedule = LrSchedule::kCosine;
  config.iterations = 100;
  Network net = Network::init(6, config, rng);
  CHECK(net.eta_at(1) == doctest::Approx(config.eta * (1.0 + std::cos(3.14159265358979323846 / 100.0)) / 2.0));
  CHECK(net.eta_at(100) == doctest::Approx(0.0));
  CHECK(net.eta_at(100) < net.eta_at(1));

  // The zero-eta final iteration must not trip the accumulate precondition.
  SeededRng data_rng(16);
  const auto [inputs, labels] = separated_data(6, 4, data_rng);
  SeededRng train_rng(17);
  CHECK_NOTHROW(net.train(inputs, labels, train_rng));
}

TEST_CASE("config validation") {
  NetworkConfig config = small_config();
  config.iterations = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = small_config();
  config.eta = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = small_config();
  config.classes = 1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  SeededRng rng(18);
  NetworkConfig ok = small_config();
  ok.iterations = 1;
  Network net = Network::init(6, ok, rng);
  SeededRng data_rng(19);
  const auto [inputs, labels] = separated_data(6, 3, data_rng);
  SeededRng train_rng(20);
  const TrainLog log = net.train(inputs, labels, train_rng);
  CHECK(log.rows.size() == 1);

  CHECK_THROWS_AS(net.train({}, {}, train_rng), std::invalid_argument);
}

TEST_CASE("class pools cover every class") {
  SeededRng rng(21);
  NetworkConfig config = small_config();
  config.hidden_sizes = {32};
  config.classes = 3;
  Network net = Network::init(8, config, rng);
  std::vector<int> counts(3, 0);
  for (const int c : net.filter_classes()) {
    REQUIRE(c >= 0);
    REQUIRE(c < 3);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (const int c : counts) CHECK(c > 0);
}

TEST_CASE("training log samples the train error every log_every iterations") {
  SeededRng data_rng(22);
  const auto [inputs, labels] = separated_data(8, 6, data_rng);
  SeededRng rng(23);
  NetworkConfig config = small_config();
  config.iterations = 100;
  config.log_every = 50;
  Network net = Network::init(8, config, rng);
  SeededRng train_rng(24);
  const TrainLog log = net.train(inputs, labels, train_rng);
  REQUIRE(log.rows.size() == 100);
  CHECK(log.rows[49].train_error >= 0.0);
  CHECK(log.rows[99].train_error >= 0.0);
  CHECK(log.rows[0].train_error < 0.0);
  CHECK(log.rows[0].eta == doctest::Approx(0.1));
}

TEST_CASE("an output filter equal to the hidden representation wins at distance zero") {
  // Hand-built network: one hidden layer of three fixed filters, output
  // filter 0 set to the hidden layer's response ordering for the probe input.
  std::vector<RankingFilter> hidden;
  hidden.emplace_back(Permutation({0, 1, 2, 3, 4}));
  hidden.emplace_back(Permutation({2, 4, 0, 1, 3}));
  hidden.emplace_back(Permutation({4, 3, 1, 0, 2}));
  SortLayer hidden_layer(std::move(hidden));

  const Permutation probe({2, 0, 4, 1, 3});
  const Permutation response = hidden_layer.forward(probe).output;  // [1,0,2]

  std::vector<RankingFilter> out;
  out.emplace_back(response);
  out.emplace_back(Permutation({2, 1, 0}));
  SortLayer output_layer(std::move(out));
  output_layer.set_frozen(true);

  NetworkConfig config;
  config.hidden_sizes = {3};
  config.classes = 2;
  std::vector<SortLayer> layers;
  layers.push_back(std::move(hidden_layer));
  layers.push_back(std::move(output_layer));
  const Network net(std::move(layers), config, 5, {0, 1, 0});

  const ForwardResult fwd = net.forward(probe);
  CHECK(fwd.final_distances[0] == doctest::Approx(0.0));
  CHECK(net.predict(probe) == 0);

}

TEST_CASE("equal output distances fall back to the smaller class id") {
  std::vector<RankingFilter> hidden;
  hidden.emplace_back(Permutation({0, 1, 2, 3, 4}));
  hidden.emplace_back(Permutation({2, 4, 0, 1, 3}));
  hidden.emplace_back(Permutation({4, 3, 1, 0, 2}));
  std::vector<RankingFilter> tied;
  tied.emplace_back(Permutation({0, 1, 2}));
  tied.emplace_back(Permutation({0, 1, 2}));

  NetworkConfig config;
  config.hidden_sizes = {3};
  config.classes = 2;
  std::vector<SortLayer> layers;
  layers.emplace_back(std::move(hidden));
  layers.emplace_back(std::move(tied));
  const Network net(std::move(layers), config, 5, {0, 1, 0});

  const Permutation probe({2, 0, 4, 1, 3});
  const ForwardResult fwd = net.forward(probe);
  CHECK(fwd.final_distances[0] == fwd.final_distances[1]);
  CHECK(net.predict(probe) == 0);
}

TEST_CASE("augmented training runs and stays deterministic") {
  SeededRng data_rng(25);
  const auto [inputs, labels] = separated_data(10, 8, data_rng);
  const auto run = [&]() {
    SeededRng rng(26);
    NetworkConfig config = small_config();
    config.augment_count = 2;
    Network net = Network::init(10, config, rng);
    SeededRng train_rng(27);
    return net.train(inputs, labels, train_rng).final_train_error;
  };
  const double first = run();
  CHECK(first == run());
  CHECK(first <= 0.2);  // augmentation noise must not destroy separability
}
