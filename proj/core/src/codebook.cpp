#include "shipbow/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shipbow/error.hpp"
#include "shipbow/random.hpp"

namespace shipbow {

Codebook::Codebook(std::size_t k, std::size_t dim, std::vector<double> centers, std::uint64_t seed)
    : k_(k), dim_(dim), centers_(std::move(centers)), seed_(seed) {
  if (k_ < 1 || dim_ < 1) throw Error(Errc::InvalidArgument, "codebook needs k >= 1 and dim >= 1");
  if (centers_.size() != k_ * dim_) throw Error(Errc::InvalidArgument, "center buffer must be k*dim");
  for (double v : centers_)
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "codebook centers must be finite");
}

namespace {

// Squared distance with early exit once it can no longer beat `bound`.
inline double dist2_bounded(const double* a, const double* b, std::size_t dim, double bound) {
  double acc = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
    if ((j & 15) == 15 && acc > bound) return acc;
  }
  return acc;
}

inline double dist2(const double* a, const double* b, std::size_t dim) {
  return dist2_bounded(a, b, dim, std::numeric_limits<double>::infinity());
}

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }
};

Matrix to_matrix(std::span<const Descriptor> descriptors) {
  Matrix m;
  m.rows = descriptors.size();
  m.cols = descriptors.empty() ? 0 : descriptors.front().size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& d : descriptors) {
    if (d.size() != m.cols) throw Error(Errc::DimensionMismatch, "descriptors differ in dimension");
    m.data.insert(m.data.end(), d.begin(), d.end());
  }
  return m;
}

std::size_t count_distinct(std::span<const Descriptor> descriptors, std::size_t enough) {
  std::vector<const Descriptor*> rows;
  rows.reserve(descriptors.size());
  for (const auto& d : descriptors) rows.push_back(&d);
  std::sort(rows.begin(), rows.end(), [](const Descriptor* a, const Descriptor* b) { return *a < *b; });
  std::size_t distinct = rows.empty() ? 0 : 1;
  for (std::size_t i = 1; i < rows.size() && distinct < enough; ++i)
    if (*rows[i] != *rows[i - 1]) ++distinct;
  return distinct;
}

// Assigns each row to its nearest center, lowest index on ties; returns the
// inertia. With `warm`, the incoming labels seed the search bound.
double assign(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& labels,
              std::vector<double>& d2, bool warm = false) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::size_t best = warm ? labels[i] : 0;
    double best_d = dist2(x.row(i), centers.row(best), x.cols);
    for (std::size_t c = 0; c < centers.rows; ++c) {
      if (c == best) continue;
      const double d = dist2_bounded(x.row(i), centers.row(c), x.cols, best_d);
      if (d < best_d || (d == best_d && c < best)) {
        best_d = d;
        best = c;
      }
    }
    labels[i] = best;
    d2[i] = best_d;
    total += best_d;
  }
  return total;
}

Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  Matrix centers{k, x.cols, std::vector<double>(k * x.cols)};
  std::size_t first = rng.index(x.rows);
  std::copy_n(x.row(first), x.cols, centers.row(0));

  std::vector<double> d2(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) d2[i] = dist2(x.row(i), centers.row(0), x.cols);

  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const double target = rng.uniform() * total;
    std::size_t pick = x.rows;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      cumulative += d2[i];
      if (cumulative > target) {
        pick = i;
        break;
      }
    }
    if (pick == x.rows) pick = last_positive;
    std::copy_n(x.row(pick), x.cols, centers.row(c));
    for (std::size_t i = 0; i < x.rows; ++i) d2[i] = std::min(d2[i], dist2(x.row(i), centers.row(c), x.cols));
  }
  return centers;
}

struct RunResult {
  Matrix centers;
  double inertia = 0.0;
};

RunResult lloyd(const Matrix& x, Matrix centers, const KmeansOptions& options, std::vector<double>* history) {
  const std::size_t k = centers.rows;
  const std::size_t dim = x.cols;
  std::vector<std::size_t> labels(x.rows);
  std::vector<double> d2(x.rows);
  std::vector<std::size_t> counts(k);
  Matrix next{k, dim, std::vector<double>(k * dim)};

  double current = assign(x, centers, labels, d2);
  if (history) history->push_back(current);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    std::fill(next.data.begin(), next.data.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      double* dst = next.row(labels[i]);
      const double* src = x.row(i);
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double* dst = next.row(c);
      for (std::size_t j = 0; j < dim; ++j) dst[j] /= static_cast<double>(counts[c]);
    }
    // Empty clusters take over the point farthest from its center, drawn from
    // clusters that can spare one.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = x.rows;
      for (std::size_t i = 0; i < x.rows; ++i) {
        if (counts[labels[i]] < 2) continue;
        if (far == x.rows || d2[i] > d2[far]) far = i;
      }
      if (far == x.rows) continue;
      std::copy_n(x.row(far), dim, next.row(c));
      --counts[labels[far]];
      labels[far] = c;
      counts[c] = 1;
      d2[far] = 0.0;
    }

    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      movement = std::max(movement, std::sqrt(dist2(centers.row(c), next.row(c), dim)));
    std::swap(centers, next);

    current = assign(x, centers, labels, d2, true);
    if (history) history->push_back(current);
    if (movement < options.tol) break;
  }
  return {std::move(centers), current};
}

// One sweep of Hartigan single-point transfers on the partition induced by
// `centers`. A point moves when that lowers the within-cluster sum of squares,
// which Lloyd's update alone cannot always reach. Leaves the means of the
// final partition in `centers`. Returns whether any point moved.
bool hartigan_pass(const Matrix& x, Matrix& centers) {
  const std::size_t k = centers.rows;
  const std::size_t dim = x.cols;
  std::vector<std::size_t> labels(x.rows);
  std::vector<double> d2(x.rows);
  assign(x, centers, labels, d2);

  std::vector<std::size_t> counts(k, 0);
  Matrix sums{k, dim, std::vector<double>(k * dim, 0.0)};
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < dim; ++j) sums.row(labels[i])[j] += x.row(i)[j];
    ++counts[labels[i]];
  }
  // a center nobody is closest to stays where it is
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0)
      for (std::size_t j = 0; j < dim; ++j) centers.row(c)[j] = sums.row(c)[j] / static_cast<double>(counts[c]);

  bool moved = false;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const std::size_t a = labels[i];
    if (counts[a] < 2) continue;
    const double na = static_cast<double>(counts[a]);
    const double removal = na / (na - 1.0) * dist2(x.row(i), centers.row(a), dim);
    std::size_t target = a;
    double best = -1e-12 * removal;
    for (std::size_t b = 0; b < k; ++b) {
      if (b == a) continue;
      const double nb = static_cast<double>(counts[b]);
      const double delta = nb / (nb + 1.0) * dist2(x.row(i), centers.row(b), dim) - removal;
      if (delta < best) {
        best = delta;
        target = b;
      }
    }
    if (target == a) continue;
    const double* p = x.row(i);
    double* ca = centers.row(a);
    double* cb = centers.row(target);
    const double nb = static_cast<double>(counts[target]);
    for (std::size_t j = 0; j < dim; ++j) {
      ca[j] = (ca[j] * na - p[j]) / (na - 1.0);
      cb[j] = (cb[j] * nb + p[j]) / (nb + 1.0);
    }
    --counts[a];
    ++counts[target];
    labels[i] = target;
    moved = true;
  }
  return moved;
}

}  // namespace

Codebook kmeans_fit(std::span<const Descriptor> descriptors, const KmeansOptions& options, KmeansTrace* trace) {
  if (options.k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (options.restarts < 1) throw Error(Errc::InvalidArgument, "restarts must be >= 1");
  if (options.max_iter < 0) throw Error(Errc::InvalidArgument, "max_iter must be >= 0");
  if (descriptors.size() < options.k)
    throw Error(Errc::TooFewDescriptors, std::to_string(descriptors.size()) + " descriptors for k=" +
                                             std::to_string(options.k));
  const Matrix x = to_matrix(descriptors);
  if (x.cols == 0) throw Error(Errc::DimensionMismatch, "descriptors are empty vectors");
  if (count_distinct(descriptors, options.k) < options.k)
    throw Error(Errc::TooFewDescriptors, "fewer distinct descriptors than k=" + std::to_string(options.k));

  if (trace) trace->inertia.clear();
  RunResult best;
  std::size_t best_run = 0;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(options.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r));
    std::vector<double>* history = nullptr;
    if (trace) history = &trace->inertia.emplace_back();
    RunResult run = lloyd(x, kmeans_plus_plus(x, options.k, rng), options, history);
    if (r == 0 || run.inertia < best.inertia) {
      best = std::move(run);
      best_run = static_cast<std::size_t>(r);
    }
  }
  // Polish the winner with point transfers, each followed by Lloyd again.
  std::vector<double>* history = trace ? &trace->inertia[best_run] : nullptr;
  for (int pass = 0; pass < options.max_iter; ++pass) {
    Matrix refined = best.centers;
    if (!hartigan_pass(x, refined)) break;
    RunResult next = lloyd(x, std::move(refined), options, history);
    if (!(next.inertia < best.inertia)) break;
    best = std::move(next);
  }
  return Codebook(options.k, x.cols, std::move(best.centers.data), options.seed);
}

double inertia(const Codebook& codebook, std::span<const Descriptor> descriptors) {
  double total = 0.0;
  for (const auto& d : descriptors) {
    const std::size_t c = nearest_center(codebook, d);
    total += dist2(d.data(), codebook.center(c).data(), codebook.dim());
  }
  return total;
}

std::size_t nearest_center(const Codebook& codebook, std::span<const double> d) {
  if (d.size() != codebook.dim()) throw Error(Errc::DimensionMismatch, "descriptor/codebook dimension");
  std::size_t best = 0;
  double best_d = dist2(d.data(), codebook.center(0).data(), d.size());
  for (std::size_t c = 1; c < codebook.k(); ++c) {
    const double v = dist2_bounded(d.data(), codebook.center(c).data(), d.size(), best_d);
    if (v < best_d) {
      best_d = v;
      best = c;
    }
  }
  return best;
}

std::vector<double> encode_bow(const Codebook& codebook, std::span<const Descriptor> descriptors) {
  if (descriptors.empty()) throw Error(Errc::EmptyDescriptorSet, "cannot encode an empty descriptor set");
  std::vector<double> hist(codebook.k(), 0.0);
  for (const auto& d : descriptors) hist[nearest_center(codebook, d)] += 1.0;
  const double n = static_cast<double>(descriptors.size());
  for (double& v : hist) v /= n;
  return hist;
}

}  // namespace shipbow
