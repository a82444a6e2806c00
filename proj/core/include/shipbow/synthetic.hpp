#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shipbow/image.hpp"

namespace shipbow {

/// Class folders written by generate_synthetic_dataset, in order.
std::vector<std::string> synthetic_classes();

/// One procedurally drawn ship silhouette of the given class on a sea and sky
/// background. Pose, proportions, colors and noise come from the seed.
RgbImage draw_synthetic_ship(const std::string& class_name, std::uint64_t seed, int width = 256, int height = 176);

/// Writes <out>/<class>/<class>_NNN.png for every class, per_class images
/// each, plus <out>/synthetic_config.json whose dataset section splits each
/// class 2:1 into train and test.
void generate_synthetic_dataset(const std::filesystem::path& out, std::uint64_t seed, int per_class);

}  // namespace shipbow
