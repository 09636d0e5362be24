#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace arrowflow {

/// Per-operation energies at 45nm CMOS, stored in hundredths of a picojoule so
/// totals stay exact integers; rounding happens only at display time.
struct EnergyModel {
  static constexpr std::int64_t kInt8Add = 3;        // 0.03 pJ
  static constexpr std::int64_t kInt32AddCmp = 10;   // 0.1 pJ
  static constexpr std::int64_t kInt32Mul = 310;     // 3.1 pJ
  static constexpr std::int64_t kFp32Add = 90;       // 0.9 pJ
  static constexpr std::int64_t kFp32Mul = 370;      // 3.7 pJ
  static constexpr std::int64_t kFp32Mac = 460;      // 4.6 pJ
  static constexpr std::int64_t kSramRead32 = 500;   // 5 pJ
  static constexpr std::int64_t kDramRead32 = 64000; // 640 pJ
};

enum class IntWidth { kInt8, kInt32 };

struct EnergyRow {
  std::string label;
  std::int64_t ops = 0;
  std::int64_t centi_pj = 0;
  std::string op_type;
};

struct EnergyProfile {
  std::vector<EnergyRow> rows;
  /// Reported alongside but excluded from the headline totals
  /// (index-table construction, memory traffic).
  std::vector<EnergyRow> info_rows;

  std::int64_t total_ops() const;
  std::int64_t total_centi_pj() const;
  /// Total rounded to whole picojoules for display.
  std::int64_t total_pj_rounded() const;
};

std::int64_t round_centi_pj(std::int64_t centi_pj);

/// Sort layer: 3NV displacement ops plus N*ceil(log2 N) argsort comparisons,
/// at the chosen integer rate. Index-table construction (V writes) is reported
/// separately and excluded from the headline total.
EnergyProfile profile_sort_layer(int n_filters, int vocab, IntWidth width = IntWidth::kInt32);

/// MLP layer: NV FP32 MACs plus 2N bias/activation adds.
EnergyProfile profile_mlp_layer(int n_out, int n_in);

struct InferenceComparison {
  EnergyProfile arrowflow;
  EnergyProfile mlp;
  double ratio() const;  // mlp / arrowflow
};

/// Full-inference comparison table: per-view hidden layers at 3NV integer ops,
/// the output layer at 3*V_out ops, a 10*K pJ majority-vote constant, against
/// an MLP counted as MACs only.
InferenceComparison profile_inference(const std::vector<int>& hidden_sizes, int input_vocab,
                                      int views, int classes,
                                      const std::vector<int>& mlp_arch);

/// Informational memory footprint: bytes and the energy of one full SRAM read
/// of the parameters (excluded from headline ratios).
struct MemoryFootprint {
  std::int64_t arrowflow_bytes = 0;
  std::int64_t mlp_bytes = 0;
  std::int64_t arrowflow_sram_centi_pj = 0;
  std::int64_t mlp_sram_centi_pj = 0;
};

MemoryFootprint memory_footprint(int n_filters, int vocab);

}  // namespace arrowflow
