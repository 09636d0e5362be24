#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "arrowflow/ensemble.hpp"

namespace arrowflow {

std::uint64_t fnv1a(std::string_view text);
std::string hex16(std::uint64_t value);

/// Self-describing text model file with a version field. Matrices are either
/// embedded base-10 (round-trip exact via %.17g) or written raw to a side-car
/// binary file, selected by the header's matrix_encoding flag.
struct ModelFile {
  int version = 1;
  std::string run_config_json;
  std::uint64_t train_log_digest = 0;
  double best_train_error = -1.0;
  EnsembleModel model;
};

void save_model(const ModelFile& file, const std::string& path, bool binary_matrices = false);
ModelFile load_model(const std::string& path);

}  // namespace arrowflow
