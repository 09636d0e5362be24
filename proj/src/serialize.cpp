#include "arrowflow/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace arrowflow {
namespace {

constexpr std::string_view kMagic = "arrowflow-model";

class ValueWriter {
 public:
  ValueWriter(std::ostream& text, std::ostream* binary) : text_(text), binary_(binary) {}

  void doubles(std::span<const double> values) {
    if (binary_ != nullptr) {
      binary_->write(reinterpret_cast<const char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * sizeof(double)));
      return;
    }
    char buffer[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", values[i]);
      text_ << buffer << (i + 1 == values.size() ? "" : " ");
    }
    text_ << "\n";
  }

 private:
  std::ostream& text_;
  std::ostream* binary_;
};

class ValueReader {
 public:
  ValueReader(std::istream& text, std::istream* binary) : text_(text), binary_(binary) {}

  std::vector<double> doubles(std::size_t count) {
    std::vector<double> values(count);
    if (binary_ != nullptr) {
      binary_->read(reinterpret_cast<char*>(values.data()),
                    static_cast<std::streamsize>(count * sizeof(double)));
      if (!*binary_) throw std::runtime_error("model file: truncated binary side-car");
      return values;
    }
    for (double& v : values) {
      if (!(text_ >> v)) throw std::runtime_error("model file: truncated value block");
    }
    return values;
  }

 private:
  std::istream& text_;
  std::istream* binary_;
};

void expect(std::istream& in, const std::string& token) {
  std::string word;
  if (!(in >> word) || word != token) {
    throw std::runtime_error("model file: expected '" + token + "', got '" + word + "'");
  }
}

template <typename T>
T read_value(std::istream& in, const std::string& token) {
  expect(in, token);
  T value{};
  if (!(in >> value)) throw std::runtime_error("model file: bad value for " + token);
  return value;
}

void write_permutation(std::ostream& out, const Permutation& pi) {
  out << pi.size();
  for (const ItemId item : pi.items()) out << ' ' << item;
  out << "\n";
}

Permutation read_permutation(std::istream& in) {
  int size = 0;
  if (!(in >> size) || size < 1) throw std::runtime_error("model file: bad permutation size");
  std::vector<ItemId> items(static_cast<std::size_t>(size));
  for (ItemId& item : items) {
    if (!(in >> item)) throw std::runtime_error("model file: truncated permutation");
  }
  return Permutation(std::move(items));
}

void write_network_config(std::ostream& out, const NetworkConfig& c) {
  out << "network_config hidden " << c.hidden_sizes.size();
  for (const int n : c.hidden_sizes) out << ' ' << n;
  out << " classes " << c.classes << " iterations " << c.iterations << " eta ";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", c.eta);
  out << buffer << " llu " << (c.last_layer_update ? 1 : 0) << " augment " << c.augment_count
      << " schedule " << to_string(c.lr_schedule) << " hidden_rule " << to_string(c.hidden_rule)
      << " winners " << c.winner_count << " q " << c.norm_q << " log_every " << c.log_every
      << "\n";
}

NetworkConfig read_network_config(std::istream& in) {
  NetworkConfig c;
  expect(in, "network_config");
  const auto n_hidden = read_value<std::size_t>(in, "hidden");
  c.hidden_sizes.resize(n_hidden);
  for (int& n : c.hidden_sizes) in >> n;
  c.classes = read_value<int>(in, "classes");
  c.iterations = read_value<int>(in, "iterations");
  c.eta = read_value<double>(in, "eta");
  c.last_layer_update = read_value<int>(in, "llu") != 0;
  c.augment_count = read_value<int>(in, "augment");
  c.lr_schedule = lr_schedule_from_string(read_value<std::string>(in, "schedule"));
  c.hidden_rule = hidden_update_rule_from_string(read_value<std::string>(in, "hidden_rule"));
  c.winner_count = read_value<int>(in, "winners");
  c.norm_q = read_value<int>(in, "q");
  c.log_every = read_value<int>(in, "log_every");
  return c;
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (const char ch : text) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001B3ull;
  }
  return hash;
}

std::string hex16(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

void save_model(const ModelFile& file, const std::string& path, bool binary_matrices) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  std::ofstream side;
  std::string side_name;
  if (binary_matrices) {
    side_name = std::filesystem::path(path).filename().string() + ".bin";
    side.open(std::filesystem::path(path).parent_path() / side_name, std::ios::binary);
    if (!side) throw std::runtime_error(path + ".bin: cannot write");
  }
  ValueWriter values(out, binary_matrices ? &side : nullptr);

  out << kMagic << " v" << file.version << "\n";
  out << "matrix_encoding " << (binary_matrices ? "binary " + side_name : "text") << "\n";
  out << "run_config " << file.run_config_json << "\n";
  out << "config_hash " << hex16(fnv1a(file.run_config_json)) << "\n";
  out << "train_log_digest " << hex16(file.train_log_digest) << "\n";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", file.best_train_error);
  out << "best_train_error " << buffer << "\n";

  const EnsembleModel& model = file.model;
  const EnsembleConfig& cfg = model.config();
  out << "ensemble views " << cfg.views << " native " << (cfg.native_encoding ? 1 : 0)
      << " poly " << cfg.poly_degree << " embed " << cfg.embed_dim << " lda_ratio ";
  std::snprintf(buffer, sizeof(buffer), "%.17g", cfg.lda_ratio);
  out << buffer << " seed " << cfg.seed << " cycle " << cfg.strategy_cycle.size();
  for (const ProjectionStrategy s : cfg.strategy_cycle) out << ' ' << to_string(s);
  out << "\n";
  write_network_config(out, cfg.network);

  for (int k = 0; k < model.view_count(); ++k) {
    const EnsembleView& view = model.view(k);
    out << "view " << k << "\n";
    const EncodingPipeline& p = view.pipeline;
    out << "pipeline native " << (p.native ? 1 : 0) << " poly " << p.poly_degree << " input_dim "
        << p.input_dim << "\n";
    if (!p.native) {
      out << "raw_scaler " << p.raw_scaler.means.size() << "\n";
      values.doubles(p.raw_scaler.means);
      values.doubles(p.raw_scaler.stds);
      out << "scaler " << p.scaler.means.size() << "\n";
      values.doubles(p.scaler.means);
      values.doubles(p.scaler.stds);
      out << "projection " << p.projection.entries.rows << ' ' << p.projection.entries.cols
          << ' ' << to_string(p.projection.strategy) << "\n";
      values.doubles(p.projection.entries.data);
    }

    const Network& net = view.network;
    out << "network input_vocab " << net.input_vocab() << " layers " << net.layer_count()
        << "\n";
    out << "filter_classes " << net.filter_classes().size();
    for (const int c : net.filter_classes()) out << ' ' << c;
    out << "\n";
    for (int l = 0; l < net.layer_count(); ++l) {
      const SortLayer& layer = net.layer(l);
      out << "layer " << l << " filters " << layer.filter_count() << " vocab " << layer.vocab()
          << " q " << layer.norm_q() << " w " << layer.winner_count() << " del "
          << layer.deletion_position() << " frozen " << (layer.frozen() ? 1 : 0) << "\n";
      for (int j = 0; j < layer.filter_count(); ++j) {
        const RankingFilter& filter = layer.filter(j);
        out << "filter " << j << " ordering ";
        write_permutation(out, filter.ordering());
        if (filter.has_accumulator()) {
          out << "acc dense\n";
          // has_accumulator() held, so this does not mutate state.
          values.doubles(const_cast<RankingFilter&>(filter).dense_accumulator());
        } else {
          out << "acc lazy\n";
        }
      }
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");

  std::string magic;
  std::string version_tag;
  in >> magic >> version_tag;
  if (magic != kMagic || version_tag.size() < 2 || version_tag[0] != 'v') {
    throw std::runtime_error(path + ": not an arrowflow model file");
  }
  const int version = std::stoi(version_tag.substr(1));
  if (version != 1) throw std::runtime_error(path + ": unsupported version " + version_tag);

  expect(in, "matrix_encoding");
  std::string encoding;
  in >> encoding;
  std::ifstream side;
  if (encoding == "binary") {
    std::string side_name;
    in >> side_name;
    side.open(std::filesystem::path(path).parent_path() / side_name, std::ios::binary);
    if (!side) throw std::runtime_error(path + ": missing binary side-car " + side_name);
  } else if (encoding != "text") {
    throw std::runtime_error(path + ": unknown matrix encoding '" + encoding + "'");
  }
  ValueReader values(in, encoding == "binary" ? &side : nullptr);

  expect(in, "run_config");
  std::string run_config_json;
  std::getline(in, run_config_json);
  if (!run_config_json.empty() && run_config_json.front() == ' ') {
    run_config_json.erase(run_config_json.begin());
  }
  expect(in, "config_hash");
  std::string stored_hash;
  in >> stored_hash;
  if (stored_hash != hex16(fnv1a(run_config_json))) {
    throw std::runtime_error(path + ": config hash mismatch");
  }

  ModelFile file{1,
                 run_config_json,
                 0,
                 -1.0,
                 EnsembleModel(EnsembleConfig{}, {})};
  expect(in, "train_log_digest");
  std::string digest_hex;
  in >> digest_hex;
  file.train_log_digest = std::stoull(digest_hex, nullptr, 16);
  file.best_train_error = read_value<double>(in, "best_train_error");

  EnsembleConfig cfg;
  expect(in, "ensemble");
  cfg.views = read_value<int>(in, "views");
  cfg.native_encoding = read_value<int>(in, "native") != 0;
  cfg.poly_degree = read_value<int>(in, "poly");
  cfg.embed_dim = read_value<int>(in, "embed");
  cfg.lda_ratio = read_value<double>(in, "lda_ratio");
  cfg.seed = read_value<std::uint64_t>(in, "seed");
  const auto cycle_size = read_value<std::size_t>(in, "cycle");
  cfg.strategy_cycle.clear();
  for (std::size_t i = 0; i < cycle_size; ++i) {
    std::string name;
    in >> name;
    cfg.strategy_cycle.push_back(projection_strategy_from_string(name));
  }
  cfg.network = read_network_config(in);

  std::vector<EnsembleView> views;
  for (int k = 0; k < cfg.views; ++k) {
    if (read_value<int>(in, "view") != k) throw std::runtime_error(path + ": view order");

    EncodingPipeline pipeline;
    expect(in, "pipeline");
    pipeline.native = read_value<int>(in, "native") != 0;
    pipeline.poly_degree = read_value<int>(in, "poly");
    pipeline.input_dim = read_value<int>(in, "input_dim");
    if (!pipeline.native) {
      const auto d_raw = read_value<std::size_t>(in, "raw_scaler");
      pipeline.raw_scaler.means = values.doubles(d_raw);
      pipeline.raw_scaler.stds = values.doubles(d_raw);
      const auto d_prime = read_value<std::size_t>(in, "scaler");
      pipeline.scaler.means = values.doubles(d_prime);
      pipeline.scaler.stds = values.doubles(d_prime);
      expect(in, "projection");
      std::size_t rows = 0;
      std::size_t cols = 0;
      std::string strategy;
      in >> rows >> cols >> strategy;
      pipeline.projection.strategy = projection_strategy_from_string(strategy);
      pipeline.projection.entries = Matrix(rows, cols);
      pipeline.projection.entries.data = values.doubles(rows * cols);
    }

    expect(in, "network");
    const int input_vocab = read_value<int>(in, "input_vocab");
    const int layer_count = read_value<int>(in, "layers");
    const auto n_classes_assignments = read_value<std::size_t>(in, "filter_classes");
    std::vector<int> filter_classes(n_classes_assignments);
    for (int& c : filter_classes) in >> c;

    std::vector<SortLayer> layers;
    for (int l = 0; l < layer_count; ++l) {
      if (read_value<int>(in, "layer") != l) throw std::runtime_error(path + ": layer order");
      const int filters = read_value<int>(in, "filters");
      const int vocab = read_value<int>(in, "vocab");
      const int q = read_value<int>(in, "q");
      const int w = read_value<int>(in, "w");
      const int deletion_position = read_value<int>(in, "del");
      const bool frozen = read_value<int>(in, "frozen") != 0;
      std::vector<RankingFilter> bank;
      bank.reserve(static_cast<std::size_t>(filters));
      for (int j = 0; j < filters; ++j) {
        if (read_value<int>(in, "filter") != j) {
          throw std::runtime_error(path + ": filter order");
        }
        expect(in, "ordering");
        RankingFilter filter(read_permutation(in));
        expect(in, "acc");
        std::string acc_kind;
        in >> acc_kind;
        if (acc_kind == "dense") {
          filter.load_accumulator(
              values.doubles(static_cast<std::size_t>(vocab) * static_cast<std::size_t>(vocab)));
        } else if (acc_kind != "lazy") {
          throw std::runtime_error(path + ": unknown accumulator kind '" + acc_kind + "'");
        }
        bank.push_back(std::move(filter));
      }
      SortLayer layer(std::move(bank), q, w, deletion_position);
      layer.set_frozen(frozen);
      layers.push_back(std::move(layer));
    }
    views.emplace_back(
        EnsembleView{std::move(pipeline),
                     Network(std::move(layers), cfg.network, input_vocab,
                             std::move(filter_classes))});
  }
  expect(in, "end");
  file.model = EnsembleModel(cfg, std::move(views));
  return file;
}

}  // namespace arrowflow
