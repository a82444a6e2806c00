#include "shipbow/svm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "shipbow/error.hpp"

namespace shipbow {

void SvmParams::validate() const {
  if (!(c > 0.0)) throw Error(Errc::InvalidArgument, "svm c must be > 0");
  if (gamma && !(*gamma > 0.0)) throw Error(Errc::InvalidArgument, "svm gamma must be > 0");
  if (!(kkt_tol > 0.0)) throw Error(Errc::InvalidArgument, "svm kkt_tol must be > 0");
  if (max_passes < 1) throw Error(Errc::InvalidArgument, "svm max_passes must be >= 1");
}

double SvmParams::resolved_gamma(std::size_t dim) const {
  if (gamma) return *gamma;
  return 1.0 / static_cast<double>(std::max<std::size_t>(dim, 1));
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "kernel arguments differ in dimension");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

constexpr std::size_t kDenseKernelLimit = 4096;
constexpr double kSupportThreshold = 1e-8;

/// Kernel rows, either from a dense precomputed matrix or on demand.
class KernelMatrix {
 public:
  KernelMatrix(std::span<const std::vector<double>> x, double gamma) : x_(x), gamma_(gamma) {
    const std::size_t n = x.size();
    if (n <= kDenseKernelLimit) {
      dense_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        dense_[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j)
          dense_[i * n + j] = dense_[j * n + i] = rbf_kernel(x[i], x[j], gamma);
      }
    } else {
      scratch_a_.resize(n);
      scratch_b_.resize(n);
    }
  }

  double at(std::size_t i, std::size_t j) const {
    if (!dense_.empty()) return dense_[i * x_.size() + j];
    return i == j ? 1.0 : rbf_kernel(x_[i], x_[j], gamma_);
  }

  /// Rows i and j; valid until the next call.
  std::pair<const double*, const double*> rows(std::size_t i, std::size_t j) {
    const std::size_t n = x_.size();
    if (!dense_.empty()) return {dense_.data() + i * n, dense_.data() + j * n};
    for (std::size_t k = 0; k < n; ++k) {
      scratch_a_[k] = at(i, k);
      scratch_b_[k] = at(j, k);
    }
    return {scratch_a_.data(), scratch_b_.data()};
  }

 private:
  std::span<const std::vector<double>> x_;
  double gamma_;
  std::vector<double> dense_;
  std::vector<double> scratch_a_;
  std::vector<double> scratch_b_;
};

}  // namespace

BinarySvmModel train_binary(std::span<const std::vector<double>> x, std::span<const int> y,
                            const SvmParams& params, SmoTrace* trace) {
  params.validate();
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(Errc::InvalidArgument, "x and y differ in length");
  if (n < 2) throw Error(Errc::SingleClassInput, "need at least two samples");
  const std::size_t dim = x.front().size();
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].size() != dim) throw Error(Errc::DimensionMismatch, "training vectors differ in dimension");
    if (y[i] == 1) has_pos = true;
    else if (y[i] == -1) has_neg = true;
    else throw Error(Errc::InvalidArgument, "binary labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw Error(Errc::SingleClassInput, "binary problem has one label only");

  const double c = params.c;
  const double gamma = params.resolved_gamma(dim);
  KernelMatrix kernel(x, gamma);

  std::vector<double> alpha(n, 0.0);
  // err[k] = f(x_k) - y_k without the bias term; the bias cancels in every
  // quantity SMO needs.
  std::vector<double> err(n);
  for (std::size_t k = 0; k < n; ++k) err[k] = -y[k];

  auto in_up = [&](std::size_t k) { return y[k] == 1 ? alpha[k] < c : alpha[k] > 0.0; };
  auto in_low = [&](std::size_t k) { return y[k] == 1 ? alpha[k] > 0.0 : alpha[k] < c; };
  auto dual_objective = [&] {
    double w = 0.0;
    for (std::size_t k = 0; k < n; ++k) w += alpha[k] - 0.5 * alpha[k] * y[k] * (err[k] + y[k]);
    return w;
  };

  const long max_steps = static_cast<long>(params.max_passes) * static_cast<long>(n);
  long steps = 0;
  bool converged = false;
  double gap_hi = 0.0, gap_lo = 0.0;
  if (trace) trace->objective.clear();

  while (true) {
    // Maximal violating pair: i maximizes -err over I_up, j minimizes it over I_low.
    std::size_t i = n, j = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (in_up(k) && (i == n || -err[k] > -err[i])) i = k;
      if (in_low(k) && (j == n || -err[k] < -err[j])) j = k;
    }
    gap_hi = i < n ? -err[i] : 0.0;
    gap_lo = j < n ? -err[j] : 0.0;
    if (i == n || j == n || gap_hi - gap_lo <= params.kkt_tol) {
      converged = true;
      break;
    }
    if (steps >= max_steps) break;
    ++steps;

    const double yi = y[i], yj = y[j];
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(c, c + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - c);
      hi = std::min(c, alpha[i] + alpha[j]);
    }
    const double eta = std::max(kernel.at(i, i) + kernel.at(j, j) - 2.0 * kernel.at(i, j), 1e-12);
    // Rounding can leave an alpha a few ulps off a bound; such a point stays
    // in the working set while its feasible step rounds to zero, so snap it.
    const double eps = 1e-12 * c;
    auto snap = [&](double a) { return a < eps ? 0.0 : a > c - eps ? c : a; };
    const double aj = snap(std::clamp(alpha[j] + yj * (err[i] - err[j]) / eta, lo, hi));
    const double ai = snap(std::clamp(alpha[i] + yi * yj * (alpha[j] - aj), 0.0, c));
    const double di = (ai - alpha[i]) * yi;
    const double dj = (aj - alpha[j]) * yj;
    alpha[i] = ai;
    alpha[j] = aj;

    const auto [row_i, row_j] = kernel.rows(i, j);
    for (std::size_t k = 0; k < n; ++k) err[k] += di * row_i[k] + dj * row_j[k];
    if (trace) trace->objective.push_back(dual_objective());
  }

  BinarySvmModel model;
  model.gamma = gamma;
  double bias_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 0.0 && alpha[k] < c) {
      bias_sum += -err[k];
      ++free_count;
    }
  }
  model.bias = free_count > 0 ? bias_sum / static_cast<double>(free_count) : 0.5 * (gap_hi + gap_lo);

  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] <= kSupportThreshold) continue;
    model.support_vectors.push_back(x[k]);
    model.alphas.push_back(alpha[k]);
    model.sv_labels.push_back(y[k]);
  }
  if (trace) {
    trace->alphas = alpha;
    trace->iterations = static_cast<int>(steps);
    trace->converged = converged;
  }
  return model;
}

double decision_value(const BinarySvmModel& model, std::span<const double> v) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.alphas[i] * model.sv_labels[i] * rbf_kernel(model.support_vectors[i], v, model.gamma);
  return f;
}

MulticlassSvmModel train_multiclass(std::span<const std::vector<double>> x, std::span<const std::string> labels,
                                    const SvmParams& params) {
  if (x.size() != labels.size()) throw Error(Errc::InvalidArgument, "x and labels differ in length");
  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw Error(Errc::SingleClassInput, "need at least two classes");

  MulticlassSvmModel model;
  model.class_names.assign(distinct.begin(), distinct.end());
  model.dim = x.front().size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < model.class_names.size(); ++i) index[model.class_names[i]] = i;

  std::vector<std::size_t> label_index(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) label_index[i] = index[labels[i]];

  const std::size_t k = model.class_names.size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      std::vector<std::vector<double>> px;
      std::vector<int> py;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (label_index[i] == a || label_index[i] == b) {
          px.push_back(x[i]);
          py.push_back(label_index[i] == a ? 1 : -1);
        }
      }
      model.pairwise.push_back({a, b, train_binary(px, py, params)});
    }
  }
  return model;
}

std::string predict(const MulticlassSvmModel& model, std::span<const double> v) {
  if (v.size() != model.dim) throw Error(Errc::DimensionMismatch, "query vector dimension");
  const std::size_t k = model.class_names.size();
  if (k == 0) throw Error(Errc::InvalidArgument, "empty model");

  std::map<std::pair<std::size_t, std::size_t>, const MulticlassSvmModel::Pair*> lookup;
  for (const auto& p : model.pairwise) lookup[{std::min(p.first, p.second), std::max(p.first, p.second)}] = &p;

  std::vector<int> votes(k, 0);
  std::vector<double> confidence(k, 0.0);
  // Fixed (a, b) iteration order keeps the floating-point sums independent of
  // how the pairwise models are stored.
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto it = lookup.find({a, b});
      if (it == lookup.end()) continue;
      const auto& pair = *it->second;
      const double dv = decision_value(pair.model, v);
      const std::size_t winner = dv >= 0.0 ? pair.first : pair.second;
      ++votes[winner];
      confidence[winner] += std::abs(dv);
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && confidence[c] > confidence[best])) best = c;
  }
  return model.class_names[best];
}

SvmParams grid_search_svm(std::span<const std::vector<double>> x, std::span<const std::string> labels,
                          const SvmParams& base, const SvmGrid& grid, std::vector<SvmGridScore>* scores) {
  if (x.size() != labels.size()) throw Error(Errc::InvalidArgument, "x and labels differ in length");
  if (x.empty()) throw Error(Errc::SingleClassInput, "no samples");
  if (grid.c.empty() || grid.gamma_scale.empty() || grid.folds < 2)
    throw Error(Errc::InvalidArgument, "grid needs c and gamma candidates and at least 2 folds");

  std::map<std::string, std::size_t> class_size;
  for (const auto& l : labels) ++class_size[l];
  if (class_size.size() < 2) throw Error(Errc::SingleClassInput, "grid search needs at least two classes");
  std::size_t smallest = x.size();
  for (const auto& [name, n] : class_size) smallest = std::min(smallest, n);
  const auto folds = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(grid.folds), smallest));
  if (folds < 2) return base;

  std::vector<std::size_t> fold_of(x.size());
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < x.size(); ++i) fold_of[i] = rank[labels[i]]++ % folds;

  const double unit = 1.0 / static_cast<double>(x.front().size());
  SvmParams best = base;
  std::size_t best_errors = SIZE_MAX;
  for (double c : grid.c) {
    for (double scale : grid.gamma_scale) {
      SvmParams params = base;
      params.c = c;
      params.gamma = scale * unit;
      std::size_t errors = 0;
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> tx;
        std::vector<std::string> ty;
        for (std::size_t i = 0; i < x.size(); ++i)
          if (fold_of[i] != f) {
            tx.push_back(x[i]);
            ty.push_back(labels[i]);
          }
        const MulticlassSvmModel model = train_multiclass(tx, ty, params);
        for (std::size_t i = 0; i < x.size(); ++i)
          if (fold_of[i] == f && predict(model, x[i]) != labels[i]) ++errors;
      }
      if (scores) scores->push_back({c, *params.gamma, errors});
      if (errors < best_errors) {
        best_errors = errors;
        best = params;
      }
    }
  }
  return best;
}

}  // namespace shipbow
