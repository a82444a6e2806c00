#include "shipbow/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "shipbow/error.hpp"
#include "shipbow/random.hpp"

namespace shipbow {

namespace fs = std::filesystem;

std::string_view split_name(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  throw Error(Errc::InvalidArgument, "split must be 'train' or 'test', got '" + std::string(text) + "'");
}

std::vector<DatasetEntry> DatasetManifest::entries_in(Split split) const {
  std::vector<DatasetEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [split](const DatasetEntry& e) { return e.split == split; });
  return out;
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

DatasetManifest scan_dataset(const fs::path& root, std::uint64_t split_seed, double train_fraction) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(Errc::FileNotFound, "dataset root " + root.string());
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw Error(Errc::InvalidArgument, "train_fraction must be in (0, 1]");

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  if (class_dirs.empty()) throw Error(Errc::NoClasses, "no class directories under " + root.string());
  std::sort(class_dirs.begin(), class_dirs.end());

  DatasetManifest manifest;
  Rng rng(split_seed);
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && is_image_file(entry.path())) images.push_back(entry.path());
    if (images.empty()) throw Error(Errc::EmptyClass, "class directory " + dir.string() + " has no images");
    std::sort(images.begin(), images.end());

    const std::size_t n = images.size();
    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
    if (n >= 2 && train_fraction < 1.0) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    else n_train = std::max<std::size_t>(n_train, 1);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    std::vector<bool> is_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;

    const std::string label = dir.filename().string();
    manifest.classes.push_back(label);
    for (std::size_t i = 0; i < n; ++i)
      manifest.entries.push_back({images[i], label, is_train[i] ? Split::Train : Split::Test});
  }
  return manifest;
}

}  // namespace shipbow
