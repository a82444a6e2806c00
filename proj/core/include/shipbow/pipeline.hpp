#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "shipbow/codebook.hpp"
#include "shipbow/config.hpp"
#include "shipbow/dataset.hpp"
#include "shipbow/descriptors.hpp"
#include "shipbow/dog.hpp"
#include "shipbow/image.hpp"
#include "shipbow/selection.hpp"
#include "shipbow/svm.hpp"

namespace shipbow {

inline constexpr const char* kBundleVersion = "shipbow-bundle/1";

/// Image state that does not depend on the selection parameters.
struct PreparedImage {
  RgbImage image;
  GradientField gradient;
  std::vector<Keypoint> keypoints;
};

/// load -> grayscale -> detect keypoints -> gradient field.
PreparedImage prepare_image(const std::filesystem::path& path, const ScaleSpaceParams& params);

/// Ranks, greedily selects and augments the keypoints of a prepared image.
/// Throws ZeroKeypoints when the image has no keypoints.
SelectionResult select_keypoints(const PreparedImage& prepared, const SelectionParams& params);

/// Descriptors for every selected entry of the image, in selection order.
std::vector<Descriptor> extract_image_descriptors(const std::filesystem::path& path, const PipelineConfig& config,
                                                  const DescriptorProvider& provider);

/// Memoizes prepare_image() per path for runs that share scale-space
/// parameters (parameter sweeps). Safe to share between threads.
class PreparedImageCache {
 public:
  explicit PreparedImageCache(ScaleSpaceParams params) : params_(params) {}

  std::shared_ptr<const PreparedImage> get(const std::filesystem::path& path);
  const ScaleSpaceParams& params() const noexcept { return params_; }

 private:
  ScaleSpaceParams params_;
  std::mutex mutex_;
  std::map<std::filesystem::path, std::shared_ptr<const PreparedImage>> entries_;
};

struct BuildLogEntry {
  std::filesystem::path path;
  std::string reason;
};

struct ModelBundle {
  std::string version = kBundleVersion;
  PipelineConfig config;
  Codebook codebook;
  MulticlassSvmModel classifier;
  std::vector<std::string> class_names;
  std::vector<BuildLogEntry> build_log;  // training images left out, with the reason
};

struct RunOptions {
  int threads = 0;  // 0 = hardware concurrency
  /// Reused provider; loaded from the config when null.
  const DescriptorProvider* provider = nullptr;
  /// Shared prepared images; must have been built with the same scale-space params.
  PreparedImageCache* cache = nullptr;
};

/// Builds the codebook over all training descriptors, encodes each training
/// image and fits the one-vs-one SVM. Images without keypoints are skipped and
/// recorded in the build log.
ModelBundle train_pipeline(const DatasetManifest& manifest, const PipelineConfig& config,
                           const RunOptions& options = {});

std::vector<double> encode_image(const ModelBundle& bundle, const std::filesystem::path& path,
                                 const DescriptorProvider& provider);

std::string predict_image(const ModelBundle& bundle, const std::filesystem::path& path,
                          const DescriptorProvider& provider);
std::string predict_image(const ModelBundle& bundle, const std::filesystem::path& path);

struct PredictionRecord {
  std::filesystem::path path;
  std::string truth;
  std::optional<std::string> predicted;  // empty when the image failed
  std::string failure;                   // reason when predicted is empty
};

struct EvalReport {
  Split split = Split::Test;
  std::size_t total = 0;       // images in the split
  std::size_t mismatches = 0;  // wrong predictions plus failures
  double error = 0.0;          // mismatches / total
  std::vector<PredictionRecord> per_image;
  std::vector<std::string> labels;                 // confusion axes
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  std::vector<BuildLogEntry> failures;

  double accuracy() const;
};

/// The error metric over a set of predictions: the fraction of images whose
/// prediction differs from the truth, failures counted as wrong.
EvalReport score_predictions(std::vector<PredictionRecord> records, std::vector<std::string> class_names,
                             Split split = Split::Test);

/// Predicts every image of one split. Throws EmptySplit.
EvalReport evaluate(const ModelBundle& bundle, const DatasetManifest& manifest, Split split,
                    const RunOptions& options = {});

std::string format_report_text(const EvalReport& report);
std::string format_report_csv(const EvalReport& report);

struct SweepPoint {
  double dist_th = 15.0;
  int min_over = 2;
  int top_n = 100;
  std::size_t nbins = 50;
};

struct SweepRow {
  SweepPoint point;
  std::optional<double> er_train;
  std::optional<double> er_test;
  std::string failure;
};

/// The nine default sweep settings, in order.
std::vector<SweepPoint> default_sweep_grid();

/// Parses a CSV with header DistTH,minOver,TopN,Nbins. Throws ConfigInvalid, EmptyGrid.
std::vector<SweepPoint> parse_sweep_grid(const std::string& csv);

/// Trains and evaluates one model per grid row. A row that fails is reported
/// with its reason and the sweep continues. Throws EmptyGrid.
std::vector<SweepRow> sweep(const DatasetManifest& manifest, const PipelineConfig& base,
                            const std::vector<SweepPoint>& grid, const RunOptions& options = {});

/// DistTH,minOver,TopN,Nbins,Er_train,Er_test with errors in percent.
std::string format_sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace shipbow
