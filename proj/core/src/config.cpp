#include "shipbow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shipbow/error.hpp"

namespace shipbow {

using nlohmann::json;

void PipelineConfig::validate() const {
  scale_space.validate();
  selection.validate();
  provider.validate();
  svm.validate();
  if (nbins < 2) throw Error(Errc::ConfigInvalid, "nbins must be >= 2");
  if (kmeans_max_iter < 1) throw Error(Errc::ConfigInvalid, "kmeans.max_iter must be >= 1");
  if (!(kmeans_tol >= 0.0)) throw Error(Errc::ConfigInvalid, "kmeans.tol must be >= 0");
  if (kmeans_restarts < 1) throw Error(Errc::ConfigInvalid, "kmeans.restarts must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw Error(Errc::ConfigInvalid, "dataset.train_fraction must be in (0, 1]");
}

namespace {

json to_json(const PipelineConfig& c) {
  json j;
  j["scale_space"] = {
      {"octaves", c.scale_space.octaves},
      {"scales_per_octave", c.scale_space.scales_per_octave},
      {"base_sigma", c.scale_space.base_sigma},
      {"contrast_threshold", c.scale_space.contrast_threshold},
      {"edge_ratio", c.scale_space.edge_ratio},
      {"upsample_input", c.scale_space.upsample_input},
  };
  j["selection"] = {
      {"dist_th", c.selection.dist_th},
      {"min_over", c.selection.min_over},
      {"top_n", c.selection.top_n},
      {"score_half_width", c.selection.score_half_width},
      {"base_patch", c.selection.base_patch},
      {"enlarged_patch", c.selection.enlarged_patch},
  };
  j["provider"] = {
      {"kind", c.provider.kind == ProviderKind::Deep ? "deep" : "handcrafted"},
      {"model_path", c.provider.model_path ? json(c.provider.model_path->generic_string()) : json(nullptr)},
      {"output_name", c.provider.output_name},
      {"input_side", c.provider.input_side},
      {"output_dim", c.provider.output_dim},
      {"mean", c.provider.mean},
      {"std", c.provider.std},
  };
  j["nbins"] = c.nbins;
  j["kmeans"] = {
      {"seed", c.kmeans_seed},
      {"max_iter", c.kmeans_max_iter},
      {"tol", c.kmeans_tol},
      {"restarts", c.kmeans_restarts},
  };
  j["svm"] = {
      {"c", c.svm.c},
      {"gamma", c.svm.gamma ? json(*c.svm.gamma) : json(nullptr)},
      {"kkt_tol", c.svm.kkt_tol},
      {"max_passes", c.svm.max_passes},
      {"grid_search", c.svm_grid_search},
  };
  j["dataset"] = {
      {"split_seed", c.split_seed},
      {"train_fraction", c.train_fraction},
  };
  return j;
}

/// Reads keys of one JSON object, rejecting any key it was not asked about.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(Errc::ConfigInvalid, name_ + " must be an object");
  }
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw Error(Errc::ConfigInvalid, "unknown key " + name_ + "." + key);
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::ConfigInvalid, name_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

std::string config_to_json(const PipelineConfig& config) { return to_json(config).dump(2); }

PipelineConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, e.what());
  }

  PipelineConfig c;
  {
    Section top(root, "config");
    if (const json* s = top.child("scale_space")) {
      Section sec(*s, "scale_space");
      sec.get("octaves", c.scale_space.octaves);
      sec.get("scales_per_octave", c.scale_space.scales_per_octave);
      sec.get("base_sigma", c.scale_space.base_sigma);
      sec.get("contrast_threshold", c.scale_space.contrast_threshold);
      sec.get("edge_ratio", c.scale_space.edge_ratio);
      sec.get("upsample_input", c.scale_space.upsample_input);
      sec.finish();
    }
    if (const json* s = top.child("selection")) {
      Section sec(*s, "selection");
      sec.get("dist_th", c.selection.dist_th);
      sec.get("min_over", c.selection.min_over);
      sec.get("top_n", c.selection.top_n);
      sec.get("score_half_width", c.selection.score_half_width);
      sec.get("base_patch", c.selection.base_patch);
      sec.get("enlarged_patch", c.selection.enlarged_patch);
      sec.finish();
    }
    if (const json* s = top.child("provider")) {
      Section sec(*s, "provider");
      std::string kind = "handcrafted";
      sec.get("kind", kind);
      if (kind == "deep") c.provider.kind = ProviderKind::Deep;
      else if (kind == "handcrafted") c.provider.kind = ProviderKind::Handcrafted;
      else throw Error(Errc::ConfigInvalid, "provider.kind must be 'deep' or 'handcrafted'");
      if (const json* mp = sec.child("model_path"); mp && !mp->is_null()) {
        if (!mp->is_string()) throw Error(Errc::ConfigInvalid, "provider.model_path must be a string");
        std::filesystem::path path = mp->get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        c.provider.model_path = path;
      }
      sec.get("output_name", c.provider.output_name);
      sec.get("input_side", c.provider.input_side);
      sec.get("output_dim", c.provider.output_dim);
      sec.get("mean", c.provider.mean);
      sec.get("std", c.provider.std);
      sec.finish();
    }
    top.get("nbins", c.nbins);
    if (const json* s = top.child("kmeans")) {
      Section sec(*s, "kmeans");
      sec.get("seed", c.kmeans_seed);
      sec.get("max_iter", c.kmeans_max_iter);
      sec.get("tol", c.kmeans_tol);
      sec.get("restarts", c.kmeans_restarts);
      sec.finish();
    }
    if (const json* s = top.child("svm")) {
      Section sec(*s, "svm");
      sec.get("c", c.svm.c);
      if (const json* g = sec.child("gamma"); g && !g->is_null()) {
        if (!g->is_number()) throw Error(Errc::ConfigInvalid, "svm.gamma must be a number or null");
        c.svm.gamma = g->get<double>();
      }
      sec.get("kkt_tol", c.svm.kkt_tol);
      sec.get("max_passes", c.svm.max_passes);
      sec.get("grid_search", c.svm_grid_search);
      sec.finish();
    }
    if (const json* s = top.child("dataset")) {
      Section sec(*s, "dataset");
      sec.get("split_seed", c.split_seed);
      sec.get("train_fraction", c.train_fraction);
      sec.finish();
    }
    top.finish();
  }
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidArgument) throw Error(Errc::ConfigInvalid, e.what());
    throw;
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str(), path.parent_path());
}

}  // namespace shipbow
