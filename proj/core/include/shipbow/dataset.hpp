#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace shipbow {

enum class Split { Train, Test };

std::string_view split_name(Split split) noexcept;
/// Accepts "train" / "test"; throws InvalidArgument otherwise.
Split parse_split(std::string_view text);

struct DatasetEntry {
  std::filesystem::path path;
  std::string label;
  Split split = Split::Train;
};

struct DatasetManifest {
  std::vector<std::string> classes;  // sorted
  std::vector<DatasetEntry> entries; // class order, then file-name order

  std::vector<DatasetEntry> entries_in(Split split) const;
};

/// Scans <root>/<class>/*.{png,jpg,jpeg} and splits every class separately.
/// round(n * train_fraction) images go to training, drawn by a seeded shuffle;
/// below a fraction of 1 that count is clamped to [1, n - 1].
/// Throws NoClasses, EmptyClass, FileNotFound.
DatasetManifest scan_dataset(const std::filesystem::path& root, std::uint64_t split_seed, double train_fraction);

}  // namespace shipbow
