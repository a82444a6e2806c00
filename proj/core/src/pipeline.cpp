#include "shipbow/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include "shipbow/error.hpp"

namespace shipbow {

namespace fs = std::filesystem;

namespace {

int resolve_threads(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. body must not throw.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

struct OwnedProvider {
  std::unique_ptr<DescriptorProvider> owned;
  const DescriptorProvider* ptr = nullptr;
};

OwnedProvider resolve_provider(const RunOptions& options, const ProviderConfig& config) {
  OwnedProvider p;
  if (options.provider) {
    p.ptr = options.provider;
  } else {
    p.owned = load_provider(config);
    p.ptr = p.owned.get();
  }
  return p;
}

std::shared_ptr<const PreparedImage> prepared_for(const fs::path& path, const PipelineConfig& config,
                                                  PreparedImageCache* cache) {
  if (cache) {
    if (!(cache->params() == config.scale_space))
      throw Error(Errc::InvalidArgument, "prepared-image cache was built with different scale-space params");
    return cache->get(path);
  }
  return std::make_shared<const PreparedImage>(prepare_image(path, config.scale_space));
}

std::vector<Descriptor> describe_prepared(const PreparedImage& prepared, const PipelineConfig& config,
                                          const DescriptorProvider& provider) {
  const SelectionResult selection = select_keypoints(prepared, config.selection);
  return describe_selection(provider, prepared.image, selection, config.selection);
}

}  // namespace

PreparedImage prepare_image(const fs::path& path, const ScaleSpaceParams& params) {
  PreparedImage out;
  out.image = load_image(path);
  const GrayImage gray = to_grayscale(out.image);
  out.keypoints = detect_keypoints(gray, params);
  out.gradient = gradient_magnitude(gray);
  return out;
}

SelectionResult select_keypoints(const PreparedImage& prepared, const SelectionParams& params) {
  if (prepared.keypoints.empty()) throw Error(Errc::ZeroKeypoints, "no keypoints detected");
  const auto ranked = score_and_sort(prepared.gradient, prepared.keypoints, params.score_half_width);
  return augment_remainder(greedy_select(ranked, params), params);
}

std::vector<Descriptor> extract_image_descriptors(const fs::path& path, const PipelineConfig& config,
                                                  const DescriptorProvider& provider) {
  return describe_prepared(prepare_image(path, config.scale_space), config, provider);
}

std::shared_ptr<const PreparedImage> PreparedImageCache::get(const fs::path& path) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(path); it != entries_.end()) return it->second;
  }
  auto prepared = std::make_shared<const PreparedImage>(prepare_image(path, params_));
  std::lock_guard lock(mutex_);
  return entries_.emplace(path, std::move(prepared)).first->second;
}

ModelBundle train_pipeline(const DatasetManifest& manifest, const PipelineConfig& config, const RunOptions& options) {
  config.validate();
  const OwnedProvider provider = resolve_provider(options, config.provider);
  const auto train = manifest.entries_in(Split::Train);
  if (train.empty()) throw Error(Errc::EmptySplit, "manifest has no training images");

  using Outcome = std::variant<std::vector<Descriptor>, std::string, std::exception_ptr>;
  std::vector<Outcome> outcomes(train.size());
  const int threads = provider.ptr->thread_safe() ? resolve_threads(options.threads, train.size()) : 1;
  parallel_for(train.size(), threads, [&](std::size_t i) {
    try {
      const auto prepared = prepared_for(train[i].path, config, options.cache);
      outcomes[i] = describe_prepared(*prepared, config, *provider.ptr);
    } catch (const Error& e) {
      if (e.code() == Errc::ZeroKeypoints) outcomes[i] = std::string(e.what());
      else outcomes[i] = std::current_exception();
    } catch (...) {
      outcomes[i] = std::current_exception();
    }
  });

  ModelBundle bundle;
  bundle.config = config;
  // Pool in manifest order so the k-means input does not depend on scheduling.
  std::vector<Descriptor> pool;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (auto* ex = std::get_if<std::exception_ptr>(&outcomes[i])) std::rethrow_exception(*ex);
    if (auto* reason = std::get_if<std::string>(&outcomes[i])) {
      bundle.build_log.push_back({train[i].path, *reason});
      continue;
    }
    const auto& descs = std::get<std::vector<Descriptor>>(outcomes[i]);
    pool.insert(pool.end(), descs.begin(), descs.end());
    used.push_back(i);
  }
  if (used.empty()) throw Error(Errc::SingleClassInput, "no training image produced descriptors");

  KmeansOptions km;
  km.k = config.nbins;
  km.seed = config.kmeans_seed;
  km.max_iter = config.kmeans_max_iter;
  km.tol = config.kmeans_tol;
  km.restarts = config.kmeans_restarts;
  bundle.codebook = kmeans_fit(pool, km);

  std::vector<std::vector<double>> histograms;
  std::vector<std::string> labels;
  for (std::size_t i : used) {
    histograms.push_back(encode_bow(bundle.codebook, std::get<std::vector<Descriptor>>(outcomes[i])));
    labels.push_back(train[i].label);
  }
  if (config.svm_grid_search) bundle.config.svm = grid_search_svm(histograms, labels, config.svm);
  bundle.classifier = train_multiclass(histograms, labels, bundle.config.svm);
  bundle.class_names = bundle.classifier.class_names;
  return bundle;
}

std::vector<double> encode_image(const ModelBundle& bundle, const fs::path& path, const DescriptorProvider& provider) {
  return encode_bow(bundle.codebook, extract_image_descriptors(path, bundle.config, provider));
}

std::string predict_image(const ModelBundle& bundle, const fs::path& path, const DescriptorProvider& provider) {
  return predict(bundle.classifier, encode_image(bundle, path, provider));
}

std::string predict_image(const ModelBundle& bundle, const fs::path& path) {
  const auto provider = load_provider(bundle.config.provider);
  return predict_image(bundle, path, *provider);
}

double EvalReport::accuracy() const {
  return total == 0 ? 0.0 : static_cast<double>(total - mismatches) / static_cast<double>(total);
}

EvalReport score_predictions(std::vector<PredictionRecord> records, std::vector<std::string> class_names, Split split) {
  if (records.empty()) throw Error(Errc::EmptySplit, "no images to score");
  std::set<std::string> label_set(class_names.begin(), class_names.end());
  for (const auto& r : records) {
    label_set.insert(r.truth);
    if (r.predicted) label_set.insert(*r.predicted);
  }

  EvalReport report;
  report.split = split;
  report.labels.assign(label_set.begin(), label_set.end());
  const std::size_t k = report.labels.size();
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  auto index_of = [&](const std::string& label) {
    return static_cast<std::size_t>(std::lower_bound(report.labels.begin(), report.labels.end(), label) -
                                    report.labels.begin());
  };

  report.total = records.size();
  for (const auto& r : records) {
    if (!r.predicted) {
      report.failures.push_back({r.path, r.failure});
      ++report.mismatches;
      continue;
    }
    ++report.confusion[index_of(r.truth)][index_of(*r.predicted)];
    if (*r.predicted != r.truth) ++report.mismatches;
  }
  report.error = static_cast<double>(report.mismatches) / static_cast<double>(report.total);
  report.per_image = std::move(records);
  return report;
}

EvalReport evaluate(const ModelBundle& bundle, const DatasetManifest& manifest, Split split, const RunOptions& options) {
  const auto entries = manifest.entries_in(split);
  if (entries.empty()) throw Error(Errc::EmptySplit, std::string("split '") + std::string(split_name(split)) + "' is empty");
  const OwnedProvider provider = resolve_provider(options, bundle.config.provider);

  std::vector<PredictionRecord> records(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  const int threads = provider.ptr->thread_safe() ? resolve_threads(options.threads, entries.size()) : 1;
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    auto& rec = records[i];
    rec.path = entries[i].path;
    rec.truth = entries[i].label;
    try {
      const auto prepared = prepared_for(entries[i].path, bundle.config, options.cache);
      const auto hist = encode_bow(bundle.codebook, describe_prepared(*prepared, bundle.config, *provider.ptr));
      rec.predicted = predict(bundle.classifier, hist);
    } catch (const Error& e) {
      rec.failure = e.what();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return score_predictions(std::move(records), bundle.class_names, split);
}

namespace {

std::string percent(double fraction, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << 100.0 * fraction;
  return os.str();
}

}  // namespace

std::string format_report_text(const EvalReport& report) {
  std::ostringstream os;
  const std::string split(split_name(report.split));
  os << "split: " << split << "\n";
  os << "images: " << report.total << "\n";
  os << "failures: " << report.failures.size() << "\n";
  os << "Er_" << split << ": " << percent(report.error, 2) << "%\n";
  os << "accuracy: " << percent(report.accuracy(), 2) << "%\n";
  os << "confusion (rows = true class, columns = predicted class):\n";

  std::size_t width = 6;
  for (const auto& l : report.labels) width = std::max(width, l.size() + 2);
  os << std::setw(static_cast<int>(width)) << "";
  for (const auto& l : report.labels) os << std::setw(static_cast<int>(width)) << l;
  os << "\n";
  for (std::size_t r = 0; r < report.labels.size(); ++r) {
    os << std::left << std::setw(static_cast<int>(width)) << report.labels[r] << std::right;
    for (std::size_t c = 0; c < report.labels.size(); ++c)
      os << std::setw(static_cast<int>(width)) << report.confusion[r][c];
    os << "\n";
  }
  for (const auto& f : report.failures) os << "failed: " << f.path.string() << " (" << f.reason << ")\n";
  return os.str();
}

std::string format_report_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "metric,value\n";
  os << "split," << split_name(report.split) << "\n";
  os << "total," << report.total << "\n";
  os << "mismatches," << report.mismatches << "\n";
  os << "failures," << report.failures.size() << "\n";
  os << "Er," << std::setprecision(17) << report.error << "\n";
  os << "\n";
  os << "true\\predicted";
  for (const auto& l : report.labels) os << "," << l;
  os << "\n";
  for (std::size_t r = 0; r < report.labels.size(); ++r) {
    os << report.labels[r];
    for (std::size_t c = 0; c < report.labels.size(); ++c) os << "," << report.confusion[r][c];
    os << "\n";
  }
  return os.str();
}

std::vector<SweepPoint> default_sweep_grid() {
  return {
      {10, 2, 150, 100}, {5, 2, 150, 100},  {15, 2, 150, 100}, {20, 2, 150, 100}, {15, 3, 150, 100},
      {15, 2, 120, 100}, {15, 2, 100, 100}, {15, 2, 100, 70},  {15, 2, 100, 50},
  };
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

}  // namespace

std::vector<SweepPoint> parse_sweep_grid(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  bool header = false;
  std::vector<SweepPoint> grid;
  while (std::getline(in, line)) {
    const auto cells = split_csv_line(line);
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;
    if (!header) {
      if (cells != std::vector<std::string>{"DistTH", "minOver", "TopN", "Nbins"})
        throw Error(Errc::ConfigInvalid, "grid header must be DistTH,minOver,TopN,Nbins");
      header = true;
      continue;
    }
    if (cells.size() != 4) throw Error(Errc::ConfigInvalid, "grid row needs 4 columns: " + line);
    try {
      SweepPoint p;
      p.dist_th = std::stod(cells[0]);
      p.min_over = std::stoi(cells[1]);
      p.top_n = std::stoi(cells[2]);
      p.nbins = static_cast<std::size_t>(std::stoul(cells[3]));
      grid.push_back(p);
    } catch (const std::logic_error&) {
      throw Error(Errc::ConfigInvalid, "bad grid row: " + line);
    }
  }
  if (grid.empty()) throw Error(Errc::EmptyGrid, "grid has no rows");
  return grid;
}

std::vector<SweepRow> sweep(const DatasetManifest& manifest, const PipelineConfig& base,
                            const std::vector<SweepPoint>& grid, const RunOptions& options) {
  if (grid.empty()) throw Error(Errc::EmptyGrid, "grid has no rows");
  const OwnedProvider provider = resolve_provider(options, base.provider);
  PreparedImageCache local_cache(base.scale_space);
  RunOptions run = options;
  run.provider = provider.ptr;
  if (!run.cache) run.cache = &local_cache;

  std::vector<SweepRow> rows;
  for (const auto& point : grid) {
    SweepRow row;
    row.point = point;
    try {
      PipelineConfig config = base;
      config.selection.dist_th = point.dist_th;
      config.selection.min_over = point.min_over;
      config.selection.top_n = point.top_n;
      config.nbins = point.nbins;
      const ModelBundle bundle = train_pipeline(manifest, config, run);
      row.er_train = evaluate(bundle, manifest, Split::Train, run).error;
      row.er_test = evaluate(bundle, manifest, Split::Test, run).error;
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "DistTH,minOver,TopN,Nbins,Er_train,Er_test\n";
  for (const auto& r : rows) {
    std::ostringstream dist;
    dist << r.point.dist_th;
    os << dist.str() << "," << r.point.min_over << "," << r.point.top_n << "," << r.point.nbins << ","
       << (r.er_train ? percent(*r.er_train, 1) : "nan") << "," << (r.er_test ? percent(*r.er_test, 1) : "nan")
       << "\n";
  }
  return os.str();
}

}  // namespace shipbow
