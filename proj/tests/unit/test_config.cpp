#include <gtest/gtest.h>

#include <fstream>

#include "shipbow/config.hpp"
#include "test_support.hpp"

using namespace shipbow;
using shipbow::testing::TempDir;
using shipbow::testing::thrown_code;

TEST(Config, DefaultsMatchOperatingPoint) {
  const PipelineConfig c;
  EXPECT_EQ(c.selection.dist_th, 15.0);
  EXPECT_EQ(c.selection.min_over, 2);
  EXPECT_EQ(c.selection.top_n, 100);
  EXPECT_EQ(c.nbins, 50u);
  EXPECT_EQ(c.svm.c, 1.0);
  EXPECT_FALSE(c.svm.gamma.has_value());
  EXPECT_EQ(c.scale_space.octaves, 4);
  EXPECT_EQ(c.provider.kind, ProviderKind::Handcrafted);
}

TEST(Config, EmptyObjectGivesDefaults) {
  const PipelineConfig c = config_from_json("{}");
  EXPECT_EQ(config_to_json(c), config_to_json(PipelineConfig{}));
}

TEST(Config, RoundTrip) {
  PipelineConfig c;
  c.selection.dist_th = 7.5;
  c.nbins = 70;
  c.svm.gamma = 0.25;
  c.svm_grid_search = true;
  c.provider.kind = ProviderKind::Deep;
  c.provider.model_path = "/models/vgg.onnx";
  c.train_fraction = 0.5;
  const std::string text = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(text)), text);
}

TEST(Config, PartialOverride) {
  const PipelineConfig c = config_from_json(R"({"selection": {"top_n": 150}, "nbins": 100})");
  EXPECT_EQ(c.selection.top_n, 150);
  EXPECT_EQ(c.selection.dist_th, 15.0);
  EXPECT_EQ(c.nbins, 100u);
}

TEST(Config, Rejections) {
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"nbinz": 3})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"selection": {"top": 3}})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"nbins": 1})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"nbins": "ten"})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"selection": {"dist_th": -1}})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"provider": {"kind": "magic"}})"); }), Errc::ConfigInvalid);
  EXPECT_EQ(thrown_code([] { config_from_json("{not json"); }), Errc::ConfigInvalid);
}

TEST(Config, DeepWithoutModelPath) {
  EXPECT_EQ(thrown_code([] { config_from_json(R"({"provider": {"kind": "deep"}})"); }), Errc::ModelFileMissing);
}

TEST(Config, RelativeModelPathFollowsConfigFile) {
  TempDir dir("cfg");
  std::filesystem::create_directories(dir / "conf");
  std::ofstream(dir / "conf" / "c.json") << R"({"provider": {"kind": "deep", "model_path": "m/net.onnx"}})";
  const PipelineConfig c = load_config(dir / "conf" / "c.json");
  EXPECT_EQ(*c.provider.model_path, dir / "conf" / "m" / "net.onnx");
  EXPECT_EQ(thrown_code([&] { load_config(dir / "nope.json"); }), Errc::FileNotFound);
}
