#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shipbow {

struct SvmParams {
  double c = 1.0;
  /// RBF width; unset means 1 / (input dimension).
  std::optional<double> gamma;
  double kkt_tol = 1e-3;
  int max_passes = 200;

  void validate() const;
  double resolved_gamma(std::size_t dim) const;
};

/// exp(-gamma * |a - b|^2). Throws DimensionMismatch.
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Dual-form binary RBF classifier: f(v) = sum_i alpha_i y_i K(sv_i, v) + bias.
struct BinarySvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas;
  std::vector<int> sv_labels;  // +1 / -1
  double bias = 0.0;
  double gamma = 1.0;
};

/// Observations of one SMO run, for tests and diagnostics.
struct SmoTrace {
  std::vector<double> objective;  // dual objective after every update step
  std::vector<double> alphas;     // final alphas, one per training sample
  int iterations = 0;
  bool converged = false;
};

/// Sequential minimal optimization on the C-SVM dual. Each step updates the
/// maximal violating pair and the run ends when no sample violates the KKT
/// conditions by more than kkt_tol, or after max_passes * n steps.
/// Throws SingleClassInput, DimensionMismatch, InvalidArgument.
BinarySvmModel train_binary(std::span<const std::vector<double>> x, std::span<const int> y,
                            const SvmParams& params, SmoTrace* trace = nullptr);

double decision_value(const BinarySvmModel& model, std::span<const double> v);

/// One-vs-one ensemble. Classes are kept in lexicographic order; the pair
/// (first, second) treats `first` as the positive label.
struct MulticlassSvmModel {
  struct Pair {
    std::size_t first = 0;
    std::size_t second = 0;
    BinarySvmModel model;
  };
  std::vector<std::string> class_names;
  std::vector<Pair> pairwise;
  std::size_t dim = 0;
};

/// Throws SingleClassInput when fewer than two distinct labels are given.
MulticlassSvmModel train_multiclass(std::span<const std::vector<double>> x, std::span<const std::string> labels,
                                    const SvmParams& params);

/// Majority vote over the pairwise models. Ties go to the larger summed
/// |decision value| of the contests each tied class won, then to the
/// lexicographically smaller class name.
std::string predict(const MulticlassSvmModel& model, std::span<const double> v);

/// Candidate values for cross-validated selection of c and gamma. Gamma
/// candidates are multiples of 1 / (input dimension).
struct SvmGrid {
  std::vector<double> c = {0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<double> gamma_scale = {0.1, 1.0, 10.0, 100.0, 1000.0};
  int folds = 3;
};

struct SvmGridScore {
  double c = 0.0;
  double gamma = 0.0;
  std::size_t errors = 0;  // misclassified held-out samples over all folds
};

/// Stratified k-fold cross-validation over the grid. Fold membership is the
/// sample's rank within its class modulo the fold count, so the result is
/// deterministic. Returns `base` with c and gamma replaced by the candidate
/// with the fewest held-out errors, earliest grid entry on ties. When the
/// smallest class has fewer than 2 samples no search happens and `base` is
/// returned unchanged. `scores`, if given, receives every candidate.
SvmParams grid_search_svm(std::span<const std::vector<double>> x, std::span<const std::string> labels,
                          const SvmParams& base, const SvmGrid& grid = {},
                          std::vector<SvmGridScore>* scores = nullptr);

}  // namespace shipbow
