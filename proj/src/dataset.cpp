#include "arrowflow/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "arrowflow/rng.hpp"

namespace arrowflow {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_feature(const std::string& field, const std::string& origin, std::size_t line_no) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty() || !std::isfinite(value)) {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                             ": non-numeric feature '" + field + "'");
  }
  return value;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  if (header.size() < 2) {
    throw std::runtime_error(origin + ": need at least one feature column and a label column");
  }
  const std::size_t n_features = header.size() - 1;

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": ragged row (" +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()) + ")");
    }
    std::vector<double> row(n_features);
    for (std::size_t c = 0; c < n_features; ++c) {
      row[c] = parse_feature(fields[c], origin, line_no);
    }
    rows.push_back(std::move(row));
    labels.push_back(fields.back());
  }
  if (rows.empty()) throw std::runtime_error(origin + ": no data rows");

  // Dense label ids in sorted label order.
  std::map<std::string, int> label_ids;
  for (const std::string& label : labels) label_ids.emplace(label, 0);
  int next_id = 0;
  for (auto& [label, id] : label_ids) id = next_id++;

  Dataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  ds.class_names.resize(label_ids.size());
  for (const auto& [label, id] : label_ids) ds.class_names[static_cast<std::size_t>(id)] = label;
  ds.x = Matrix(rows.size(), n_features);
  ds.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].begin(), rows[r].end(), ds.x.row(r).begin());
    ds.y[r] = label_ids.at(labels[r]);
  }
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return parse_csv(in, path);
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("stratified_split: fraction must be in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.classes()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
  }
  SeededRng rng(seed);
  std::vector<bool> in_test(ds.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw std::invalid_argument("stratified_split: class '" + ds.class_names[c] +
                                  "' has fewer than 2 samples");
    }
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[static_cast<std::size_t>(rng.next_below(i + 1))]);
    }
    auto take = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    for (std::size_t i = 0; i < take; ++i) in_test[members[i]] = true;
  }

  const auto collect = [&](bool want_test) {
    Dataset out;
    out.feature_names = ds.feature_names;
    out.class_names = ds.class_names;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) count += in_test[i] == want_test;
    out.x = Matrix(count, ds.x.cols);
    out.y.reserve(count);
    std::size_t r = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (in_test[i] != want_test) continue;
      std::copy(ds.x.row(i).begin(), ds.x.row(i).end(), out.x.row(r).begin());
      out.y.push_back(ds.y[i]);
      ++r;
    }
    return out;
  };
  return {collect(false), collect(true)};
}

Permutation native_rank_encode(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("native_rank_encode: need >= 2 features");
  return argsort_desc(x);
}

PerturbationSpec PerturbationSpec::parse(const std::string& text) {
  PerturbationSpec spec;
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "gaussian") {
    spec.kind = PerturbationKind::kGaussian;
    spec.amount = arg.empty() ? 0.0 : std::stod(arg);
    if (spec.amount < 0.0) throw std::invalid_argument("perturb: sigma must be >= 0");
  } else if (kind == "mask") {
    spec.kind = PerturbationKind::kMask;
    spec.amount = arg.empty() ? 0.0 : std::stod(arg);
    if (spec.amount < 0.0 || spec.amount > 1.0) {
      throw std::invalid_argument("perturb: mask fraction must be in [0, 1]");
    }
  } else if (kind == "rank_transform") {
    spec.kind = PerturbationKind::kRankTransform;
  } else if (kind == "monotone") {
    spec.kind = PerturbationKind::kMonotone;
    spec.monotone_name = arg;
    const auto& suite = monotone_suite();
    if (std::find(suite.begin(), suite.end(), arg) == suite.end()) {
      throw std::invalid_argument("perturb: unknown monotone transform '" + arg + "'");
    }
  } else if (kind == "per_gene_scale") {
    spec.kind = PerturbationKind::kPerGeneScale;
    spec.amount = arg.empty() ? 0.0 : std::stod(arg);
    if (spec.amount < 0.0) throw std::invalid_argument("perturb: sigma must be >= 0");
  } else {
    throw std::invalid_argument("perturb: unknown kind '" + kind + "'");
  }
  return spec;
}

std::string PerturbationSpec::to_text() const {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", amount);
  switch (kind) {
    case PerturbationKind::kGaussian: return std::string("gaussian:") + buffer;
    case PerturbationKind::kMask: return std::string("mask:") + buffer;
    case PerturbationKind::kRankTransform: return "rank_transform";
    case PerturbationKind::kMonotone: return "monotone:" + monotone_name;
    case PerturbationKind::kPerGeneScale: return std::string("per_gene_scale:") + buffer;
  }
  return "";
}

const std::vector<std::string>& monotone_suite() {
  static const std::vector<std::string> suite = {"log1p", "sqrt_abs", "signed_square",
                                                 "scale_0.01", "scale_100"};
  return suite;
}

TrainStats column_stats(const Matrix& x) {
  TrainStats stats;
  stats.means.assign(x.cols, 0.0);
  stats.stds.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) stats.means[c] += x.at(r, c);
  }
  for (double& m : stats.means) m /= static_cast<double>(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double d = x.at(r, c) - stats.means[c];
      stats.stds[c] += d * d;
    }
  }
  for (double& s : stats.stds) s = std::sqrt(s / static_cast<double>(x.rows));
  return stats;
}

Dataset perturb(const Dataset& ds, const PerturbationSpec& spec, const TrainStats& stats) {
  Dataset out = ds;
  SeededRng rng(spec.seed);
  switch (spec.kind) {
    case PerturbationKind::kGaussian: {
      if (spec.amount == 0.0) break;
      if (stats.stds.size() != ds.x.cols) {
        throw std::invalid_argument("perturb: train stats dimension mismatch");
      }
      for (std::size_t r = 0; r < out.x.rows; ++r) {
        for (std::size_t c = 0; c < out.x.cols; ++c) {
          out.x.at(r, c) += rng.next_gaussian() * spec.amount * stats.stds[c];
        }
      }
      break;
    }
    case PerturbationKind::kMask: {
      if (stats.means.size() != ds.x.cols) {
        throw std::invalid_argument("perturb: train stats dimension mismatch");
      }
      // Per-cell Bernoulli masking; masked cells become train column means.
      for (std::size_t r = 0; r < out.x.rows; ++r) {
        for (std::size_t c = 0; c < out.x.cols; ++c) {
          if (rng.next_double() < spec.amount) out.x.at(r, c) = stats.means[c];
        }
      }
      break;
    }
    case PerturbationKind::kRankTransform: {
      // Ordinal per-column ranks 0..n-1, ties by row index.
      const std::size_t n = out.x.rows;
      std::vector<std::size_t> order(n);
      for (std::size_t c = 0; c < out.x.cols; ++c) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return ds.x.at(a, c) < ds.x.at(b, c);
        });
        for (std::size_t rank = 0; rank < n; ++rank) {
          out.x.at(order[rank], c) = static_cast<double>(rank);
        }
      }
      break;
    }
    case PerturbationKind::kMonotone: {
      const auto apply = [&](double v) -> double {
        if (spec.monotone_name == "log1p") return std::log1p(v);
        if (spec.monotone_name == "sqrt_abs") return std::sqrt(std::abs(v));
        if (spec.monotone_name == "signed_square") return v >= 0.0 ? v * v : -(v * v);
        if (spec.monotone_name == "scale_0.01") return v * 0.01;
        if (spec.monotone_name == "scale_100") return v * 100.0;
        throw std::invalid_argument("perturb: unknown monotone transform");
      };
      for (double& v : out.x.data) v = apply(v);
      break;
    }
    case PerturbationKind::kPerGeneScale: {
      for (std::size_t c = 0; c < out.x.cols; ++c) {
        const double factor = std::exp(rng.next_gaussian() * spec.amount);
        for (std::size_t r = 0; r < out.x.rows; ++r) out.x.at(r, c) *= factor;
      }
      break;
    }
  }
  return out;
}

double error_rate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size() || labels.empty()) {
    throw std::invalid_argument("error_rate: size mismatch or empty");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += predictions[i] != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std: empty");
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  bool all_equal = true;
  for (const double v : values) all_equal = all_equal && v == values[0];
  if (all_equal) return {values[0], 0.0};
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size() - 1);
  return {mean, std::sqrt(var)};
}

}  // namespace arrowflow
