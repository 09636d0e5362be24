#include "arrowflow/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "arrowflow/serialize.hpp"

namespace arrowflow {

using nlohmann::json;

void RunConfig::validate() const {
  NetworkConfig net;
  net.hidden_sizes = layers;
  net.classes = 2;
  net.iterations = iterations;
  net.eta = eta;
  net.augment_count = augment;
  net.winner_count = winner_count;
  net.norm_q = norm_q;
  net.validate();
  lr_schedule_from_string(lr_schedule);
  hidden_update_rule_from_string(hidden_rule);
  if (encoding != "projection" && encoding != "native") {
    throw std::invalid_argument("config: encoding must be 'projection' or 'native'");
  }
  if (encoding == "projection") {
    if (embed_dim < 2) throw std::invalid_argument("config: e must be >= 2");
    if (poly_degree < 1) throw std::invalid_argument("config: k must be >= 1");
    if (strategy_cycle.empty()) throw std::invalid_argument("config: empty strategy_cycle");
    for (const std::string& s : strategy_cycle) projection_strategy_from_string(s);
  }
  if (views < 1) throw std::invalid_argument("config: K must be >= 1");
  if (knn_k < 1) throw std::invalid_argument("config: knn_k must be >= 1");
  if (simulations < 1) throw std::invalid_argument("config: S must be >= 1");
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("config: test_fraction must be in (0, 1)");
  }
  if (log_every < 0) throw std::invalid_argument("config: log_every must be >= 0");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  if (!parsed.is_object()) throw std::invalid_argument("config: top level must be an object");

  static const std::set<std::string> known = {
      "layers",      "e",           "k",         "K",          "eta",
      "T",           "llu",         "augment",   "strategy_cycle", "knn_k",
      "seed",        "S",           "lr_schedule", "hidden_rule", "encoding",
      "w",           "q",           "lda_ratio", "test_fraction", "log_every"};
  for (const auto& [key, value] : parsed.items()) {
    if (!known.contains(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  RunConfig config;
  try {
    if (parsed.contains("layers")) config.layers = parsed["layers"].get<std::vector<int>>();
    if (parsed.contains("e")) config.embed_dim = parsed["e"].get<int>();
    if (parsed.contains("k")) config.poly_degree = parsed["k"].get<int>();
    if (parsed.contains("K")) config.views = parsed["K"].get<int>();
    if (parsed.contains("eta")) config.eta = parsed["eta"].get<double>();
    if (parsed.contains("T")) config.iterations = parsed["T"].get<int>();
    if (parsed.contains("llu")) config.llu = parsed["llu"].get<bool>();
    if (parsed.contains("augment")) config.augment = parsed["augment"].get<int>();
    if (parsed.contains("strategy_cycle")) {
      config.strategy_cycle = parsed["strategy_cycle"].get<std::vector<std::string>>();
    }
    if (parsed.contains("knn_k")) config.knn_k = parsed["knn_k"].get<int>();
    if (parsed.contains("seed")) config.seed = parsed["seed"].get<std::uint64_t>();
    if (parsed.contains("S")) config.simulations = parsed["S"].get<int>();
    if (parsed.contains("lr_schedule")) config.lr_schedule = parsed["lr_schedule"].get<std::string>();
    if (parsed.contains("hidden_rule")) config.hidden_rule = parsed["hidden_rule"].get<std::string>();
    if (parsed.contains("encoding")) config.encoding = parsed["encoding"].get<std::string>();
    if (parsed.contains("w")) config.winner_count = parsed["w"].get<int>();
    if (parsed.contains("q")) config.norm_q = parsed["q"].get<int>();
    if (parsed.contains("lda_ratio")) config.lda_ratio = parsed["lda_ratio"].get<double>();
    if (parsed.contains("test_fraction")) config.test_fraction = parsed["test_fraction"].get<double>();
    if (parsed.contains("log_every")) config.log_every = parsed["log_every"].get<int>();
  } catch (const json::type_error& e) {
    throw std::invalid_argument(std::string("config: type error: ") + e.what());
  }
  config.validate();
  return config;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string RunConfig::to_canonical_json() const {
  json out;
  out["layers"] = layers;
  out["e"] = embed_dim;
  out["k"] = poly_degree;
  out["K"] = views;
  out["eta"] = eta;
  out["T"] = iterations;
  out["llu"] = llu;
  out["augment"] = augment;
  out["strategy_cycle"] = strategy_cycle;
  out["knn_k"] = knn_k;
  out["seed"] = seed;
  out["S"] = simulations;
  out["lr_schedule"] = lr_schedule;
  out["hidden_rule"] = hidden_rule;
  out["encoding"] = encoding;
  out["w"] = winner_count;
  out["q"] = norm_q;
  out["lda_ratio"] = lda_ratio;
  out["test_fraction"] = test_fraction;
  out["log_every"] = log_every;
  return out.dump();
}

std::string RunConfig::hash() const { return hex16(fnv1a(to_canonical_json())); }

EnsembleConfig RunConfig::to_ensemble_config(int classes, std::uint64_t ensemble_seed) const {
  EnsembleConfig cfg;
  cfg.views = views;
  cfg.native_encoding = encoding == "native";
  cfg.poly_degree = poly_degree;
  cfg.embed_dim = embed_dim;
  cfg.lda_ratio = lda_ratio;
  cfg.seed = ensemble_seed;
  cfg.strategy_cycle.clear();
  for (const std::string& s : strategy_cycle) {
    cfg.strategy_cycle.push_back(projection_strategy_from_string(s));
  }
  cfg.network.hidden_sizes = layers;
  cfg.network.classes = classes;
  cfg.network.iterations = iterations;
  cfg.network.eta = eta;
  cfg.network.last_layer_update = llu;
  cfg.network.augment_count = augment;
  cfg.network.lr_schedule = lr_schedule_from_string(lr_schedule);
  cfg.network.hidden_rule = hidden_update_rule_from_string(hidden_rule);
  cfg.network.winner_count = winner_count;
  cfg.network.norm_q = norm_q;
  cfg.network.log_every = log_every;
  return cfg;
}

}  // namespace arrowflow
