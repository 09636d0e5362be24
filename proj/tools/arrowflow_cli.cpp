#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "arrowflow/dataset.hpp"
#include "arrowflow/energy.hpp"
#include "arrowflow/ensemble.hpp"
#include "arrowflow/run_config.hpp"
#include "arrowflow/serialize.hpp"
#include "arrowflow/theory.hpp"

namespace {

using namespace arrowflow;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;
constexpr int kExitPropertyFailure = 4;

struct TableWriter {
  std::string format = "csv";  // csv | md | table
  std::ostream* out = &std::cout;
  mutable std::vector<std::vector<std::string>> buffered;

  void header(const std::vector<std::string>& columns) const {
    if (format == "table") {
      buffered.push_back(columns);
      return;
    }
    if (format == "md") {
      *out << "|";
      for (const std::string& c : columns) *out << ' ' << c << " |";
      *out << "\n|";
      for (std::size_t i = 0; i < columns.size(); ++i) *out << "---|";
      *out << "\n";
    } else {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        *out << columns[i] << (i + 1 == columns.size() ? "" : ",");
      }
      *out << "\n";
    }
  }

  void row(const std::vector<std::string>& cells) const {
    if (format == "table") {
      buffered.push_back(cells);
      return;
    }
    if (format == "md") {
      *out << "|";
      for (const std::string& c : cells) *out << ' ' << c << " |";
      *out << "\n";
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        *out << cells[i] << (i + 1 == cells.size() ? "" : ",");
      }
      *out << "\n";
    }
  }
  // Aligned text output is emitted all at once so column widths fit.
  void flush() const {
    if (format != "table" || buffered.empty()) return;
    std::vector<std::size_t> widths;
    for (const auto& cells : buffered) {
      if (widths.size() < cells.size()) widths.resize(cells.size(), 0);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        widths[i] = std::max(widths[i], cells[i].size());
      }
    }
    for (const auto& cells : buffered) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        *out << std::left << std::setw(static_cast<int>(widths[i]) + 2) << cells[i];
      }
      *out << "\n";
    }
    buffered.clear();
  }
};

std::string fmt(double value, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << value;
  return out.str();
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("ARROWFLOW_THREADS")) {
    try {
      requested = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("ARROWFLOW_THREADS is not an integer");
    }
  }
  if (requested < 1) requested = 1;
  return requested;
}

void run_parallel(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= count) return;
          body(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SimulationResult {
  double train_error = 1.0;
  double test_error = 1.0;
  std::uint64_t log_digest = 0;
  std::optional<EnsembleModel> model;
  std::vector<TrainLog> logs;
};

std::uint64_t digest_logs(const std::vector<TrainLog>& logs) {
  std::ostringstream buffer;
  for (const TrainLog& log : logs) {
    buffer << log.final_train_error << ';';
    for (const TrainLogRow& row : log.rows) buffer << row.iteration << ':' << row.eta << ',';
  }
  return fnv1a(buffer.str());
}

/// Stratified split + S simulations with derived seeds.
std::vector<SimulationResult> run_training_protocol(const RunConfig& config, const Dataset& train,
                                                    const Dataset& test, int threads,
                                                    bool keep_models) {
  std::vector<SimulationResult> results(static_cast<std::size_t>(config.simulations));
  run_parallel(config.simulations, threads, [&](int sim) {
    const std::uint64_t sim_seed =
        SeededRng(config.seed).derive(1000 + static_cast<std::uint64_t>(sim)).seed();
    const EnsembleConfig ensemble_config = config.to_ensemble_config(train.classes(), sim_seed);
    SimulationResult& result = results[static_cast<std::size_t>(sim)];
    EnsembleModel model = build_ensemble(ensemble_config, train.x, train.y, 1, &result.logs);
    result.train_error = model.error_on(train.x, train.y);
    result.test_error = model.error_on(test.x, test.y);
    result.log_digest = digest_logs(result.logs);
    if (keep_models) result.model = std::move(model);
  });
  return results;
}

Dataset load_data_or_throw(const std::string& path) { return load_csv(path); }

std::string dataset_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int cmd_train(const std::string& data_path, const RunConfig& config, const std::string& out_path,
              const std::string& train_log_path, int threads, const TableWriter& table,
              bool binary_matrices) {
  const Dataset ds = load_data_or_throw(data_path);
  const auto [train, test] = stratified_split(ds, config.test_fraction, config.seed);
  const std::vector<SimulationResult> results =
      run_training_protocol(config, train, test, threads, !out_path.empty());

  std::vector<double> test_errors;
  std::vector<double> train_errors;
  for (const SimulationResult& r : results) {
    test_errors.push_back(r.test_error);
    train_errors.push_back(r.train_error);
  }
  const auto [mean_err, std_err] = mean_std(test_errors);

  table.header({"dataset", "config_id", "perturbation", "error_mean", "error_std", "n_reps"});
  table.row({dataset_name(data_path), config.hash(), "none", fmt(mean_err * 100.0, 4),
             fmt(std_err * 100.0, 4), std::to_string(config.simulations)});

  if (!out_path.empty()) {
    // Best by train error, ties to the earlier simulation.
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
      if (results[i].train_error < results[best].train_error) best = i;
    }
    ModelFile file{1, config.to_canonical_json(), results[best].log_digest,
                   results[best].train_error, *results[best].model};
    save_model(file, out_path, binary_matrices);
  }

  if (!train_log_path.empty()) {
    std::ofstream log_out(train_log_path);
    if (!log_out) throw std::runtime_error(train_log_path + ": cannot write");
    log_out << "iteration,eta,train_error\n";
    if (!results.empty() && !results.front().logs.empty()) {
      for (const TrainLogRow& row : results.front().logs.front().rows) {
        log_out << row.iteration << ',' << fmt(row.eta, 10) << ',';
        if (row.train_error >= 0.0) log_out << fmt(row.train_error, 6);
        log_out << "\n";
      }
    }
  }
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& perturb_text, int reps, const TableWriter& table) {
  const ModelFile file = load_model(model_path);
  const RunConfig config = RunConfig::from_json_text(file.run_config_json);
  const Dataset ds = load_data_or_throw(data_path);
  const auto [train, test] = stratified_split(ds, config.test_fraction, config.seed);
  const TrainStats stats = column_stats(train.x);

  table.header({"dataset", "config_id", "perturbation", "error_mean", "error_std", "n_reps"});

  const auto evaluate_spec = [&](const std::string& label,
                                 const std::optional<PerturbationSpec>& base_spec) {
    const EvalRow row = evaluate_models(std::span<const EnsembleModel>(&file.model, 1), test,
                                        base_spec.has_value() ? &*base_spec : nullptr, reps,
                                        stats, config.seed, dataset_name(data_path),
                                        config.hash());
    table.row({row.dataset, row.config_id, label, fmt(row.error_mean * 100.0, 4),
               fmt(row.error_std * 100.0, 4), std::to_string(row.n_reps)});
  };

  if (perturb_text.empty()) {
    evaluate_spec("none", std::nullopt);
  } else if (perturb_text == "gaussian-grid") {
    for (const double sigma : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0}) {
      PerturbationSpec spec;
      spec.kind = PerturbationKind::kGaussian;
      spec.amount = sigma;
      evaluate_spec("gaussian:" + fmt(sigma, 3), spec);
    }
  } else if (perturb_text == "monotone-suite") {
    evaluate_spec("none", std::nullopt);
    for (const std::string& name : monotone_suite()) {
      evaluate_spec("monotone:" + name, PerturbationSpec::parse("monotone:" + name));
    }
  } else {
    const PerturbationSpec spec = PerturbationSpec::parse(perturb_text);
    evaluate_spec(spec.to_text(), spec);
  }
  return kExitOk;
}

int cmd_knn(const std::string& data_path, const RunConfig& config, bool sweep, int threads,
            const TableWriter& table) {
  const Dataset ds = load_data_or_throw(data_path);
  const auto [train, test] = stratified_split(ds, config.test_fraction, config.seed);

  std::vector<int> k_values = {config.knn_k};
  if (sweep) k_values = {1, 3, 5};

  struct KnnResult {
    double arrowflow = 0.0;
    std::vector<double> knn;  // per k value
  };
  std::vector<KnnResult> per_sim(static_cast<std::size_t>(config.simulations));
  run_parallel(config.simulations, threads, [&](int sim) {
    const std::uint64_t sim_seed =
        SeededRng(config.seed).derive(1000 + static_cast<std::uint64_t>(sim)).seed();
    const EnsembleConfig ensemble_config = config.to_ensemble_config(train.classes(), sim_seed);
    const EnsembleModel model = build_ensemble(ensemble_config, train.x, train.y);
    KnnResult& result = per_sim[static_cast<std::size_t>(sim)];
    result.arrowflow = model.error_on(test.x, test.y);
    const KnnPermutationBaseline knn(model, train.x, train.y);
    for (const int k : k_values) {
      result.knn.push_back(knn.error_on(test.x, test.y, k));
    }
  });

  table.header({"dataset", "config_id", "method", "error_mean", "error_std", "learning_gain"});
  std::vector<double> af;
  for (const KnnResult& r : per_sim) af.push_back(r.arrowflow);
  const auto [af_mean, af_std] = mean_std(af);
  table.row({dataset_name(data_path), config.hash(), "arrowflow", fmt(af_mean * 100.0, 4),
             fmt(af_std * 100.0, 4), "1.0"});
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    std::vector<double> knn_errors;
    for (const KnnResult& r : per_sim) knn_errors.push_back(r.knn[ki]);
    const auto [knn_mean, knn_std] = mean_std(knn_errors);
    const double gain = af_mean > 0.0 ? knn_mean / af_mean : std::numeric_limits<double>::infinity();
    table.row({dataset_name(data_path), config.hash(), "knn-k" + std::to_string(k_values[ki]),
               fmt(knn_mean * 100.0, 4), fmt(knn_std * 100.0, 4), fmt(gain, 4)});
  }
  return kExitOk;
}

int cmd_proptest(std::uint64_t seed, const TableWriter& table) {
  const std::vector<OracleReport> reports = run_property_suite(seed);
  table.header({"oracle", "trials", "violations", "measured", "bound", "status"});
  bool all_pass = true;
  for (const OracleReport& report : reports) {
    table.row({report.name, std::to_string(report.trials), std::to_string(report.violations),
               fmt(report.measured, 6), fmt(report.bound, 6), report.pass ? "pass" : "FAIL"});
    all_pass = all_pass && report.pass;
  }
  return all_pass ? kExitOk : kExitPropertyFailure;
}

int cmd_energy(int filters, int vocab, int views, int classes, int inference_hidden,
               const TableWriter& table) {
  const EnergyProfile sort = profile_sort_layer(filters, vocab);
  const EnergyProfile mlp = profile_mlp_layer(filters, vocab);

  table.header({"component", "ops", "energy_pj", "op_type"});
  for (const EnergyRow& row : sort.rows) {
    table.row({"sort: " + row.label, std::to_string(row.ops),
               std::to_string(round_centi_pj(row.centi_pj)), row.op_type});
  }
  for (const EnergyRow& row : sort.info_rows) {
    table.row({"sort: " + row.label, std::to_string(row.ops),
               std::to_string(round_centi_pj(row.centi_pj)), row.op_type});
  }
  table.row({"sort: total", std::to_string(sort.total_ops()),
             std::to_string(sort.total_pj_rounded()), ""});
  for (const EnergyRow& row : mlp.rows) {
    table.row({"mlp: " + row.label, std::to_string(row.ops),
               std::to_string(round_centi_pj(row.centi_pj)), row.op_type});
  }
  table.row({"mlp: total", std::to_string(mlp.total_ops()),
             std::to_string(mlp.total_pj_rounded()), ""});
  const double layer_ratio =
      static_cast<double>(mlp.total_centi_pj()) / static_cast<double>(sort.total_centi_pj());
  table.row({"per-layer ratio (mlp/sort)", "", fmt(layer_ratio, 3), ""});

  const InferenceComparison full =
      profile_inference({inference_hidden}, vocab, views, classes, {vocab, 128, classes});
  for (const EnergyRow& row : full.arrowflow.rows) {
    table.row({"inference arrowflow: " + row.label, std::to_string(row.ops),
               std::to_string(round_centi_pj(row.centi_pj)), row.op_type});
  }
  table.row({"inference arrowflow: total", std::to_string(full.arrowflow.total_ops()),
             std::to_string(full.arrowflow.total_pj_rounded()), ""});
  for (const EnergyRow& row : full.mlp.rows) {
    table.row({"inference mlp: " + row.label, std::to_string(row.ops),
               std::to_string(round_centi_pj(row.centi_pj)), row.op_type});
  }
  table.row({"inference mlp: total", std::to_string(full.mlp.total_ops()),
             std::to_string(full.mlp.total_pj_rounded()), ""});
  table.row({"full-inference ratio (mlp/arrowflow)", "", fmt(full.ratio(), 3), ""});

  const MemoryFootprint memory = memory_footprint(filters, vocab);
  table.row({"memory: arrowflow bytes (info only)", std::to_string(memory.arrowflow_bytes), "",
             "INT8 table"});
  table.row({"memory: mlp bytes (info only)", std::to_string(memory.mlp_bytes), "", "FP32"});
  return kExitOk;
}

int cmd_encode(const std::string& data_path, const std::string& model_path, int view,
               const TableWriter& table) {
  const Dataset ds = load_data_or_throw(data_path);
  std::optional<ModelFile> file;
  if (!model_path.empty()) {
    file = load_model(model_path);
    if (view < 0 || view >= file->model.view_count()) {
      throw std::invalid_argument("encode: view index out of range");
    }
  }
  table.header({"row", "label", "permutation"});
  for (std::size_t r = 0; r < ds.size(); ++r) {
    Permutation pi = file.has_value() ? file->model.view(view).pipeline.encode(ds.x.row(r))
                                      : native_rank_encode(ds.x.row(r));
    table.row({std::to_string(r), ds.class_names[static_cast<std::size_t>(ds.y[r])],
               pi.to_text()});
  }
  return kExitOk;
}

json parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open grid");
  json grid;
  try {
    in >> grid;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("grid: parse error: ") + e.what());
  }
  if (!grid.is_object() || grid.empty()) {
    throw std::invalid_argument("grid: need a non-empty JSON object of arrays");
  }
  return grid;
}

int cmd_sweep(const std::string& data_path, const RunConfig& base, const std::string& grid_path,
              const std::string& out_path, int threads) {
  const json grid = parse_grid_file(grid_path);
  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (const auto& [key, value] : grid.items()) {
    if (!value.is_array() || value.empty()) {
      throw std::invalid_argument("grid: '" + key + "' must be a non-empty array");
    }
    keys.push_back(key);
    values.emplace_back(value.begin(), value.end());
  }

  // Cartesian product of grid cells applied on top of the base config.
  std::vector<RunConfig> cells;
  std::vector<std::string> cell_labels;
  std::vector<std::size_t> cursor(keys.size(), 0);
  for (;;) {
    json overlay = json::parse(base.to_canonical_json());
    std::ostringstream label;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      overlay[keys[i]] = values[i][cursor[i]];
      if (i > 0) label << ' ';
      label << keys[i] << '=' << values[i][cursor[i]].dump();
    }
    cells.push_back(RunConfig::from_json_text(overlay.dump()));
    cell_labels.push_back(label.str());

    std::size_t level = 0;
    while (level < keys.size()) {
      if (++cursor[level] < values[level].size()) break;
      cursor[level] = 0;
      ++level;
    }
    if (level == keys.size()) break;
  }

  // Resume: skip config hashes already present in the output file.
  std::set<std::string> done;
  if (std::filesystem::exists(out_path)) {
    std::ifstream existing(out_path);
    std::string line;
    std::getline(existing, line);  // header
    while (std::getline(existing, line)) {
      const std::size_t first = line.find(',');
      const std::size_t second = line.find(',', first + 1);
      if (first != std::string::npos && second != std::string::npos) {
        done.insert(line.substr(first + 1, second - first - 1));
      }
    }
  }

  std::ofstream out(out_path, std::ios::app);
  if (!out) throw std::runtime_error(out_path + ": cannot write");
  if (done.empty()) {
    out << "dataset,config_id,cell,error_mean,error_std,n_reps\n";
  }

  const Dataset ds = load_data_or_throw(data_path);
  std::vector<std::string> rows(cells.size());
  std::vector<char> skipped(cells.size(), 0);
  run_parallel(static_cast<int>(cells.size()), threads, [&](int i) {
    const RunConfig& config = cells[static_cast<std::size_t>(i)];
    if (done.contains(config.hash())) {
      skipped[static_cast<std::size_t>(i)] = 1;
      return;
    }
    const auto [train, test] = stratified_split(ds, config.test_fraction, config.seed);
    const std::vector<SimulationResult> results =
        run_training_protocol(config, train, test, 1, false);
    std::vector<double> errors;
    for (const SimulationResult& r : results) errors.push_back(r.test_error);
    const auto [mean_err, std_err] = mean_std(errors);
    std::ostringstream row;
    row << dataset_name(data_path) << ',' << config.hash() << ",\""
        << cell_labels[static_cast<std::size_t>(i)] << "\"," << fmt(mean_err * 100.0, 4) << ','
        << fmt(std_err * 100.0, 4) << ',' << config.simulations;
    rows[static_cast<std::size_t>(i)] = row.str();
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!skipped[i]) out << rows[i] << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ArrowFlow: permutation-space ordinal classifier"};
  app.require_subcommand(1);

  std::string data_path;
  std::string config_path;
  std::string model_path;
  std::string out_path;
  std::string perturb_text;
  std::string train_log_path;
  std::string grid_path;
  std::string format = "csv";
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  int threads = 1;
  int reps = 5;
  int view = 0;
  bool knn_sweep = false;
  bool binary_matrices = false;
  int energy_filters = 128;
  int energy_vocab = 64;
  int energy_views = 7;
  int energy_classes = 10;
  int energy_inference_hidden = 256;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format: csv, md, or aligned table")
        ->check(CLI::IsMember({"csv", "md", "table"}));
    cmd->add_option("--threads", threads, "Worker threads (env ARROWFLOW_THREADS overrides)");
  };

  CLI::App* train = app.add_subcommand("train", "Train an ensemble and report test error");
  train->add_option("--data", data_path, "CSV dataset, label in the last column")->required();
  train->add_option("--config", config_path, "RunConfig JSON file");
  train->add_option("--out", out_path, "Write the best-by-train-error model here");
  train->add_option("--train-log", train_log_path, "Write a per-iteration training log CSV");
  train->add_flag("--binary-matrices", binary_matrices, "Side-car binary matrix encoding");
  train->add_option("--seed", seed_override, "Override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  add_common(train);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved model, optionally perturbed");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--data", data_path, "CSV dataset")->required();
  eval->add_option("--perturb", perturb_text,
                   "Perturbation spec (gaussian:S, mask:F, rank_transform, monotone:NAME, "
                   "per_gene_scale:S, gaussian-grid, monotone-suite)");
  eval->add_option("--reps", reps, "Perturbation repetitions for stochastic kinds");
  add_common(eval);

  CLI::App* sweep = app.add_subcommand("sweep", "Grid sweep over config overrides");
  sweep->add_option("--data", data_path, "CSV dataset")->required();
  sweep->add_option("--config", config_path, "Base RunConfig JSON file");
  sweep->add_option("--grid", grid_path, "JSON object of config-key -> array of values")
      ->required();
  sweep->add_option("--out", out_path, "Output CSV (resumable)")->required();
  sweep->add_option("--seed", seed_override, "Override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  add_common(sweep);

  CLI::App* knn = app.add_subcommand("knn", "kNN-on-permutations baseline and learning gain");
  knn->add_option("--data", data_path, "CSV dataset")->required();
  knn->add_option("--config", config_path, "RunConfig JSON file");
  knn->add_flag("--knn-sweep", knn_sweep, "Sweep k over {1,3,5}");
  knn->add_option("--seed", seed_override, "Override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  add_common(knn);

  CLI::App* proptest = app.add_subcommand("proptest", "Run the theory-oracle property suite");
  proptest->add_option("--seed", seed_override, "Suite seed")
      ->each([&](const std::string&) { seed_given = true; });
  add_common(proptest);

  CLI::App* energy = app.add_subcommand("energy", "Operation-count energy comparison tables");
  energy->add_option("--filters", energy_filters, "Sort-layer filter count");
  energy->add_option("--vocab", energy_vocab, "Vocabulary size");
  energy->add_option("--views", energy_views, "Ensemble views");
  energy->add_option("--classes", energy_classes, "Class count");
  energy->add_option("--inference-hidden", energy_inference_hidden,
                     "Hidden width for the full-inference table");
  add_common(energy);

  CLI::App* encode = app.add_subcommand("encode", "Emit permutations for each data row");
  encode->add_option("--data", data_path, "CSV dataset")->required();
  encode->add_option("--model", model_path, "Use this model's pipeline instead of native rank");
  encode->add_option("--view", view, "Pipeline view index when --model is given");
  add_common(encode);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config;
    if (!config_path.empty()) {
      config = RunConfig::from_json_file(config_path);
    }
    if (seed_given) config.seed = seed_override;
    config.validate();

    const int worker_threads = resolve_threads(threads);
    TableWriter table;
    table.format = format;

    int exit_code = kExitOk;
    if (train->parsed()) {
      exit_code = cmd_train(data_path, config, out_path, train_log_path, worker_threads, table,
                            binary_matrices);
    } else if (eval->parsed()) {
      exit_code = cmd_eval(model_path, data_path, perturb_text, reps, table);
    } else if (sweep->parsed()) {
      exit_code = cmd_sweep(data_path, config, grid_path, out_path, worker_threads);
    } else if (knn->parsed()) {
      exit_code = cmd_knn(data_path, config, knn_sweep, worker_threads, table);
    } else if (proptest->parsed()) {
      exit_code = cmd_proptest(seed_given ? seed_override : 42, table);
    } else if (energy->parsed()) {
      exit_code = cmd_energy(energy_filters, energy_vocab, energy_views, energy_classes,
                             energy_inference_hidden, table);
    } else if (encode->parsed()) {
      exit_code = cmd_encode(data_path, model_path, view, table);
    }
    table.flush();
    return exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}
