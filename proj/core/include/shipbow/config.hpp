#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "shipbow/descriptors.hpp"
#include "shipbow/dog.hpp"
#include "shipbow/selection.hpp"
#include "shipbow/svm.hpp"

namespace shipbow {

/// Everything needed to reproduce a trained model. Defaults are the
/// recommended operating point: DistTH 15, minOver 2, TopN 100, 50 words.
struct PipelineConfig {
  ScaleSpaceParams scale_space;
  SelectionParams selection;
  ProviderConfig provider;
  std::size_t nbins = 50;
  std::uint64_t kmeans_seed = 42;
  int kmeans_max_iter = 50;
  double kmeans_tol = 1e-4;
  int kmeans_restarts = 5;
  SvmParams svm;
  /// Pick c and gamma by cross-validation on the training histograms.
  bool svm_grid_search = false;
  std::uint64_t split_seed = 1;
  double train_fraction = 1000.0 / 1400.0;

  void validate() const;
};

/// JSON text of the full configuration (every key present).
std::string config_to_json(const PipelineConfig& config);

/// Parses a JSON document; missing keys keep their defaults, unknown keys are
/// rejected. Relative model paths resolve against `base_dir` when given.
PipelineConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace shipbow
