#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "shipbow/svm.hpp"
#include "test_support.hpp"

using namespace shipbow;
using shipbow::testing::thrown_code;

namespace {

using Vec = std::vector<double>;

SvmParams make_params(double c, std::optional<double> gamma) {
  SvmParams p;
  p.c = c;
  p.gamma = gamma;
  return p;
}

// Largest KKT violation in margin units, from the full alpha vector.
double max_kkt_violation(const std::vector<Vec>& x, const std::vector<int>& y, const std::vector<double>& alpha,
                         double bias, double gamma, double c) {
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double f = bias;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t t = 0; t < x[k].size(); ++t) d2 += (x[k][t] - x[j][t]) * (x[k][t] - x[j][t]);
      f += alpha[j] * y[j] * std::exp(-gamma * d2);
    }
    const double m = y[k] * f;
    double v = 0.0;
    if (alpha[k] <= 1e-8) v = std::max(0.0, 1.0 - m);
    else if (alpha[k] >= c - 1e-8) v = std::max(0.0, m - 1.0);
    else v = std::abs(m - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

void separable_problem(std::mt19937& gen, std::vector<Vec>& x, std::vector<int>& y) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
  const double a = angle(gen);
  const Vec w = {std::cos(a), std::sin(a)};
  x.clear();
  y.clear();
  while (x.size() < 30) {
    const Vec p = {u(gen), u(gen)};
    const double s = w[0] * p[0] + w[1] * p[1];
    if (std::abs(s) < 0.2) continue;
    x.push_back(p);
    y.push_back(s > 0 ? 1 : -1);
  }
  if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) separable_problem(gen, x, y);
}

BinarySvmModel constant_model(double bias) {
  BinarySvmModel m;
  m.bias = bias;
  return m;
}

}  // namespace

TEST(Rbf, Values) {
  EXPECT_EQ(rbf_kernel(Vec{1, 2}, Vec{1, 2}, 0.7), 1.0);
  EXPECT_NEAR(rbf_kernel(Vec{0, 0}, Vec{1, 0}, 0.5), 0.60653065971263342, 1e-15);
  double prev = 1.0;
  for (double g : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const double v = rbf_kernel(Vec{0}, Vec{0.5}, g);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(rbf_kernel(Vec{0}, Vec{1}, 1e3), 1e-6);
  EXPECT_EQ(thrown_code([] { rbf_kernel(Vec{0}, Vec{1, 2}, 1.0); }), Errc::DimensionMismatch);
}

TEST(Binary, TwoPoints) {
  const std::vector<Vec> x = {{0.0, 0.0}, {1.0, 1.0}};
  const std::vector<int> y = {1, -1};
  const auto m = train_binary(x, y, make_params(1.0, 1.0));
  EXPECT_EQ(m.support_vectors.size(), 2u);
  EXPECT_GT(decision_value(m, x[0]), 0.0);
  EXPECT_LT(decision_value(m, x[1]), 0.0);
}

TEST(Binary, Xor) {
  const std::vector<Vec> x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y = {-1, -1, 1, 1};
  const auto m = train_binary(x, y, make_params(10.0, 1.0));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(decision_value(m, x[i]) > 0 ? 1 : -1, y[i]);
}

TEST(Binary, SeparableProblemsSatisfyKkt) {
  std::mt19937 gen(17);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec> x;
    std::vector<int> y;
    separable_problem(gen, x, y);
    const double c = 1.0 + t;
    SmoTrace trace;
    const auto m = train_binary(x, y, make_params(c, 2.0), &trace);
    ASSERT_TRUE(trace.converged);
    double balance = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_GE(trace.alphas[i], 0.0);
      EXPECT_LE(trace.alphas[i], c);
      balance += trace.alphas[i] * y[i];
    }
    EXPECT_NEAR(balance, 0.0, 1e-6);
    EXPECT_LE(max_kkt_violation(x, y, trace.alphas, m.bias, 2.0, c), 1e-3);
    for (double a : m.alphas) {
      EXPECT_GT(a, 0.0);
      EXPECT_LE(a, c);
    }
    for (std::size_t i = 1; i < trace.objective.size(); ++i)
      EXPECT_GE(trace.objective[i], trace.objective[i - 1] - 1e-12);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(decision_value(m, x[i]) > 0 ? 1 : -1, y[i]);
  }
}

TEST(Binary, ConvergesWhenAlphasRoundNearBounds) {
  // Problems where rounding used to leave an alpha a few ulps above zero and
  // stall the solver at its step limit.
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> cs(0.5, 20.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<Vec> x;
    std::vector<int> y;
    separable_problem(gen, x, y);
    const double c = cs(gen);
    SmoTrace trace;
    const auto m = train_binary(x, y, make_params(c, 1.0), &trace);
    ASSERT_TRUE(trace.converged) << "problem " << t;
    EXPECT_LE(max_kkt_violation(x, y, trace.alphas, m.bias, 1.0, c), 1e-3) << "problem " << t;
  }
}

TEST(Binary, Errors) {
  const std::vector<Vec> x = {{0}, {1}};
  EXPECT_EQ(thrown_code([&] { train_binary(x, std::vector<int>{1, 1}, {}); }), Errc::SingleClassInput);
  const std::vector<Vec> ragged = {{0}, {1, 2}};
  EXPECT_EQ(thrown_code([&] { train_binary(ragged, std::vector<int>{1, -1}, {}); }), Errc::DimensionMismatch);
  const auto m = train_binary(x, std::vector<int>{1, -1}, {});
  EXPECT_EQ(thrown_code([&] { decision_value(m, Vec{1, 2}); }), Errc::DimensionMismatch);
}

TEST(Binary, DecisionValueAlgebra) {
  EXPECT_EQ(decision_value(constant_model(0.25), Vec{3, 4}), 0.25);
  const std::vector<Vec> x = {{0, 0}, {1, 0}, {0, 2}};
  const auto m = train_binary(x, std::vector<int>{1, -1, -1}, make_params(5.0, 0.5));
  // Splitting an SV into two copies with half the alpha leaves f unchanged.
  BinarySvmModel split = m;
  split.support_vectors.push_back(m.support_vectors[0]);
  split.alphas.push_back(m.alphas[0] / 2);
  split.sv_labels.push_back(m.sv_labels[0]);
  split.alphas[0] /= 2;
  for (const Vec& v : {Vec{0.3, 0.1}, Vec{-1, 2}, Vec{5, 5}})
    EXPECT_NEAR(decision_value(split, v), decision_value(m, v), 1e-12);
}

TEST(Multiclass, PairCountAndClusters) {
  std::mt19937 gen(12);
  std::normal_distribution<double> noise(0.0, 0.3);
  const Vec centers[3] = {{0, 0}, {5, 0}, {0, 5}};
  const char* names[3] = {"gamma", "alpha", "beta"};
  std::vector<Vec> x;
  std::vector<std::string> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 30; ++i) {
      x.push_back({centers[c][0] + noise(gen), centers[c][1] + noise(gen)});
      labels.push_back(names[c]);
    }
  const auto m = train_multiclass(x, labels, make_params(1.0, 0.5));
  EXPECT_EQ(m.pairwise.size(), 3u);
  EXPECT_EQ(m.class_names, (std::vector<std::string>{"alpha", "beta", "gamma"}));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(predict(m, x[i]), labels[i]);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(predict(m, centers[c]), names[c]);
}

TEST(Multiclass, FiveClassesTenModels) {
  std::vector<Vec> x;
  std::vector<std::string> labels;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 3; ++i) {
      x.push_back({static_cast<double>(c), static_cast<double>(i)});
      labels.push_back("c" + std::to_string(c));
    }
  EXPECT_EQ(train_multiclass(x, labels, {}).pairwise.size(), 10u);
  const std::vector<Vec> two = {{0}, {1}};
  EXPECT_EQ(train_multiclass(two, std::vector<std::string>{"a", "b"}, {}).pairwise.size(), 1u);
  EXPECT_EQ(thrown_code([&] { train_multiclass(two, std::vector<std::string>{"a", "a"}, {}); }),
            Errc::SingleClassInput);
}

TEST(Multiclass, TieBreaks) {
  // Cyclic votes: a beats b, b beats c, c beats a.
  MulticlassSvmModel m;
  m.class_names = {"a", "b", "c"};
  m.dim = 1;
  m.pairwise = {{0, 1, constant_model(0.5)}, {1, 2, constant_model(2.0)}, {0, 2, constant_model(-0.7)}};
  EXPECT_EQ(predict(m, Vec{0.0}), "b");
  m.pairwise[1].model.bias = 0.1;
  // a: 0.5, b: 0.1, c: 0.7
  EXPECT_EQ(predict(m, Vec{0.0}), "c");
  m.pairwise[2].model.bias = -0.5;
  // a and c tie on votes and confidence; lower name wins.
  EXPECT_EQ(predict(m, Vec{0.0}), "a");
}

TEST(Multiclass, StorageOrderDoesNotMatter) {
  std::mt19937 gen(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Vec> x;
  std::vector<std::string> labels;
  for (int i = 0; i < 60; ++i) {
    x.push_back({noise(gen), noise(gen)});
    labels.push_back(std::string(1, static_cast<char>('a' + i % 4)));
  }
  const auto m = train_multiclass(x, labels, make_params(1.0, 1.0));
  auto shuffled = m;
  std::shuffle(shuffled.pairwise.begin(), shuffled.pairwise.end(), gen);
  for (int t = 0; t < 100; ++t) {
    const Vec v = {noise(gen) * 2, noise(gen) * 2};
    EXPECT_EQ(predict(m, v), predict(shuffled, v));
  }
}

TEST(GridSearch, PicksFromGridDeterministically) {
  std::mt19937 gen(21);
  std::normal_distribution<double> noise(0.0, 0.2);
  std::vector<Vec> x;
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) {
    const bool inner = i % 2 == 0;
    const double r = inner ? 0.5 : 2.0;
    const double a = i * 0.7;
    x.push_back({r * std::cos(a) + noise(gen), r * std::sin(a) + noise(gen)});
    labels.push_back(inner ? "in" : "out");
  }
  SvmGrid grid;
  std::vector<SvmGridScore> scores;
  const SvmParams best = grid_search_svm(x, labels, {}, grid, &scores);
  EXPECT_EQ(scores.size(), grid.c.size() * grid.gamma_scale.size());
  std::size_t fewest = SIZE_MAX;
  for (const auto& s : scores) fewest = std::min(fewest, s.errors);
  const auto first_best = std::find_if(scores.begin(), scores.end(), [&](const auto& s) { return s.errors == fewest; });
  EXPECT_EQ(best.c, first_best->c);
  EXPECT_EQ(*best.gamma, first_best->gamma);
  const SvmParams again = grid_search_svm(x, labels, {}, grid);
  EXPECT_EQ(again.c, best.c);
  EXPECT_EQ(again.gamma, best.gamma);
  EXPECT_LE(fewest, 2u);
}
