#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shipbow/descriptors.hpp"

namespace shipbow {

/// k visual words of dimension D, stored row-major.
class Codebook {
 public:
  Codebook() = default;
  Codebook(std::size_t k, std::size_t dim, std::vector<double> centers, std::uint64_t seed);

  std::size_t k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> center(std::size_t i) const { return {centers_.data() + i * dim_, dim_}; }
  std::span<const double> data() const noexcept { return centers_; }

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  std::size_t k_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> centers_;
  std::uint64_t seed_ = 0;
};

struct KmeansOptions {
  std::size_t k = 50;
  std::uint64_t seed = 0;
  int max_iter = 50;
  double tol = 1e-4;  // stop once no center moves farther than this (max norm)
  int restarts = 5;   // independent k-means++ starts; lowest inertia wins
};

/// Per-restart record of within-cluster sum of squares after each assignment step.
struct KmeansTrace {
  std::vector<std::vector<double>> inertia;
};

/// Lloyd's algorithm from k-means++ seeds. Throws TooFewDescriptors when there
/// are fewer than k distinct descriptors and DimensionMismatch on ragged input.
Codebook kmeans_fit(std::span<const Descriptor> descriptors, const KmeansOptions& options,
                    KmeansTrace* trace = nullptr);

/// Within-cluster sum of squared distances to the nearest center.
double inertia(const Codebook& codebook, std::span<const Descriptor> descriptors);

/// Index of the closest center (squared Euclidean), lowest index on ties.
std::size_t nearest_center(const Codebook& codebook, std::span<const double> d);

/// L1-normalized word frequencies. Throws EmptyDescriptorSet.
std::vector<double> encode_bow(const Codebook& codebook, std::span<const Descriptor> descriptors);

}  // namespace shipbow
