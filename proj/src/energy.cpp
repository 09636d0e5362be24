#include "arrowflow/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace arrowflow {
namespace {

int ceil_log2(int n) {
  int bits = 0;
  int value = 1;
  while (value < n) {
    value *= 2;
    ++bits;
  }
  return bits;
}

}  // namespace

std::int64_t EnergyProfile::total_ops() const {
  std::int64_t total = 0;
  for (const EnergyRow& row : rows) total += row.ops;
  return total;
}

std::int64_t EnergyProfile::total_centi_pj() const {
  std::int64_t total = 0;
  for (const EnergyRow& row : rows) total += row.centi_pj;
  return total;
}

std::int64_t EnergyProfile::total_pj_rounded() const { return round_centi_pj(total_centi_pj()); }

std::int64_t round_centi_pj(std::int64_t centi_pj) { return (centi_pj + 50) / 100; }

EnergyProfile profile_sort_layer(int n_filters, int vocab, IntWidth width) {
  if (n_filters < 1 || vocab < 1) throw std::invalid_argument("profile_sort_layer: bad shape");
  const std::int64_t rate =
      width == IntWidth::kInt8 ? EnergyModel::kInt8Add : EnergyModel::kInt32AddCmp;
  const std::string type = width == IntWidth::kInt8 ? "INT8" : "INT32";

  EnergyProfile profile;
  const std::int64_t displacement = 3LL * n_filters * vocab;
  const std::int64_t argsort = static_cast<std::int64_t>(n_filters) * ceil_log2(n_filters);
  profile.rows.push_back({"displacement (3NV)", displacement, displacement * rate, type});
  profile.rows.push_back({"argsort (N log2 N)", argsort, argsort * rate, type});
  // Input index-table construction; excluded from the headline total.
  profile.info_rows.push_back({"index table (V writes, info only)", vocab,
                               static_cast<std::int64_t>(vocab) * rate, type});
  return profile;
}

EnergyProfile profile_mlp_layer(int n_out, int n_in) {
  if (n_out < 1 || n_in < 1) throw std::invalid_argument("profile_mlp_layer: bad shape");
  EnergyProfile profile;
  const std::int64_t macs = static_cast<std::int64_t>(n_out) * n_in;
  const std::int64_t bias_act = 2LL * n_out;
  profile.rows.push_back({"matrix multiply (NV MACs)", macs, macs * EnergyModel::kFp32Mac,
                          "FP32 MAC"});
  profile.rows.push_back({"bias + activation", bias_act, bias_act * EnergyModel::kFp32Add,
                          "FP32 ADD"});
  return profile;
}

double InferenceComparison::ratio() const {
  return static_cast<double>(mlp.total_centi_pj()) /
         static_cast<double>(arrowflow.total_centi_pj());
}

InferenceComparison profile_inference(const std::vector<int>& hidden_sizes, int input_vocab,
                                      int views, int classes,
                                      const std::vector<int>& mlp_arch) {
  if (hidden_sizes.empty() || views < 1 || classes < 1 || input_vocab < 1) {
    throw std::invalid_argument("profile_inference: bad shape");
  }
  InferenceComparison comparison;

  int vocab = input_vocab;
  for (std::size_t l = 0; l < hidden_sizes.size(); ++l) {
    const std::int64_t ops =
        static_cast<std::int64_t>(views) * 3LL * hidden_sizes[l] * vocab;
    comparison.arrowflow.rows.push_back({"hidden layer " + std::to_string(l + 1) + " (x" +
                                             std::to_string(views) + " views)",
                                         ops, ops * EnergyModel::kInt32AddCmp, "INT32"});
    vocab = hidden_sizes[l];
  }
  const std::int64_t output_ops = static_cast<std::int64_t>(views) * 3LL * vocab;
  comparison.arrowflow.rows.push_back({"output layer (x" + std::to_string(views) + " views)",
                                       output_ops, output_ops * EnergyModel::kInt32AddCmp,
                                       "INT32"});
  // Display constant pinned at ~10 pJ per view (70 pJ at K=7).
  const std::int64_t vote_ops = 100LL * views;
  comparison.arrowflow.rows.push_back(
      {"majority vote", vote_ops, vote_ops * EnergyModel::kInt32AddCmp, "INT32"});

  if (mlp_arch.size() < 2) throw std::invalid_argument("profile_inference: bad MLP arch");
  for (std::size_t l = 0; l + 1 < mlp_arch.size(); ++l) {
    const std::int64_t macs = static_cast<std::int64_t>(mlp_arch[l]) * mlp_arch[l + 1];
    comparison.mlp.rows.push_back({"layer " + std::to_string(mlp_arch[l]) + "->" +
                                       std::to_string(mlp_arch[l + 1]) + " (MACs)",
                                   macs, macs * EnergyModel::kFp32Mac, "FP32 MAC"});
  }
  return comparison;
}

MemoryFootprint memory_footprint(int n_filters, int vocab) {
  MemoryFootprint footprint;
  const std::int64_t entries = static_cast<std::int64_t>(n_filters) * vocab;
  footprint.arrowflow_bytes = entries;       // 8-bit indices
  footprint.mlp_bytes = entries * 4;         // FP32 weights
  footprint.arrowflow_sram_centi_pj = (entries + 3) / 4 * EnergyModel::kSramRead32;
  footprint.mlp_sram_centi_pj = entries * EnergyModel::kSramRead32;
  return footprint;
}

}  // namespace arrowflow
