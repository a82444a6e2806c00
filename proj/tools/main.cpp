#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shipbow/bundle.hpp"
#include "shipbow/config.hpp"
#include "shipbow/dataset.hpp"
#include "shipbow/error.hpp"
#include "shipbow/overlay.hpp"
#include "shipbow/pipeline.hpp"
#include "shipbow/synthetic.hpp"

namespace fs = std::filesystem;
using namespace shipbow;

namespace {

constexpr int kExitError = 1;
constexpr int kExitZeroKeypoints = 2;

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

DatasetManifest scan(const std::string& root, const PipelineConfig& config) {
  return scan_dataset(root, config.split_seed, config.train_fraction);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ship classification with bags of visual words"};
  app.require_subcommand(1);

  std::string data, config_path, out, bundle_path, image, split = "test", format = "text", grid;
  int threads = 0;
  bool grid_search = false;
  std::uint64_t seed = 0;
  int per_class = 90;

  auto* train = app.add_subcommand("train", "Train a model bundle on the train split");
  train->add_option("--data", data, "Dataset root (one folder per class)")->required();
  train->add_option("--config", config_path, "Pipeline config (JSON)");
  train->add_option("--out", out, "Output bundle file")->required();
  train->add_option("--threads", threads, "Worker threads, 0 = all cores");
  train->add_flag("--grid-search", grid_search, "Choose SVM c and gamma by 3-fold cross-validation");

  auto* predict = app.add_subcommand("predict", "Classify one image");
  predict->add_option("--bundle", bundle_path)->required();
  predict->add_option("--image", image)->required();

  auto* evaluate = app.add_subcommand("evaluate", "Error rate and confusion matrix on one split");
  evaluate->add_option("--bundle", bundle_path)->required();
  evaluate->add_option("--data", data)->required();
  evaluate->add_option("--split", split)->check(CLI::IsMember({"train", "test"}));
  evaluate->add_option("--format", format)->check(CLI::IsMember({"text", "csv"}));
  evaluate->add_option("--threads", threads);

  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate over a parameter grid");
  sweep_cmd->add_option("--data", data)->required();
  sweep_cmd->add_option("--grid", grid, "CSV with header DistTH,minOver,TopN,Nbins (default: the nine reference rows)");
  sweep_cmd->add_option("--config", config_path, "Base pipeline config");
  sweep_cmd->add_option("--threads", threads);

  auto* inspect = app.add_subcommand("inspect-keypoints", "Draw detected and selected keypoints");
  inspect->add_option("--image", image)->required();
  inspect->add_option("--config", config_path);
  inspect->add_option("--out", out)->required();

  auto* gen = app.add_subcommand("gen-synthetic", "Write the synthetic three-class dataset");
  gen->add_option("--out", out)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--per-class", per_class)->check(CLI::Range(2, 100000));

  CLI11_PARSE(app, argc, argv);

  try {
    RunOptions run;
    run.threads = threads;

    if (*train) {
      PipelineConfig config = config_or_default(config_path);
      if (grid_search) config.svm_grid_search = true;
      const DatasetManifest manifest = scan(data, config);
      const ModelBundle bundle = train_pipeline(manifest, config, run);
      save_bundle(bundle, out);
      std::cout << "trained " << bundle.class_names.size() << " classes, " << bundle.codebook.k() << " words\n";
      if (config.svm_grid_search)
        std::cout << "svm c = " << bundle.config.svm.c << ", gamma = " << bundle.config.svm.resolved_gamma(bundle.codebook.k())
                  << "\n";
      for (const auto& e : bundle.build_log) std::cout << "skipped " << e.path.string() << ": " << e.reason << "\n";
    } else if (*predict) {
      const ModelBundle bundle = load_bundle(bundle_path);
      std::cout << predict_image(bundle, image) << "\n";
    } else if (*evaluate) {
      const ModelBundle bundle = load_bundle(bundle_path);
      const DatasetManifest manifest = scan(data, bundle.config);
      const EvalReport report = shipbow::evaluate(bundle, manifest, parse_split(split), run);
      std::cout << (format == "csv" ? format_report_csv(report) : format_report_text(report));
    } else if (*sweep_cmd) {
      const PipelineConfig config = config_or_default(config_path);
      const DatasetManifest manifest = scan(data, config);
      const auto points = grid.empty() ? default_sweep_grid() : parse_sweep_grid(read_text(grid));
      const auto rows = shipbow::sweep(manifest, config, points, run);
      std::cout << format_sweep_csv(rows);
      for (const auto& r : rows)
        if (!r.failure.empty()) std::cerr << "row failed (" << r.point.dist_th << "," << r.point.min_over << ","
                                          << r.point.top_n << "," << r.point.nbins << "): " << r.failure << "\n";
    } else if (*inspect) {
      const PipelineConfig config = config_or_default(config_path);
      const PreparedImage prepared = prepare_image(image, config.scale_space);
      SelectionResult selection;
      if (!prepared.keypoints.empty()) selection = select_keypoints(prepared, config.selection);
      save_png(render_keypoint_overlay(prepared, selection, config.selection), out);
      std::cout << "detected " << prepared.keypoints.size() << ", selected " << selection.found_n << ", enlarged "
                << selection.remain_n << "\n";
    } else if (*gen) {
      generate_synthetic_dataset(out, seed, per_class);
      std::cout << "wrote " << per_class << " images per class to " << out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ZeroKeypoints ? kExitZeroKeypoints : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
