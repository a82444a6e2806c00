#include "shipbow/bundle.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>

#include "shipbow/error.hpp"

namespace shipbow {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'H', 'I', 'P', 'B', 'O', 'W', '\0'};
constexpr const char* kVersionPrefix = "shipbow-bundle/";

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::BundleFormatInvalid, what); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string take(std::uint64_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) invalid("archive is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string codebook_bytes(const Codebook& cb) {
  std::string out;
  put_u64(out, cb.k());
  put_u64(out, cb.dim());
  for (double v : cb.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Codebook codebook_from(const std::string& bytes, std::uint64_t seed) {
  Reader r(bytes);
  const std::uint64_t k = r.uint(8);
  const std::uint64_t dim = r.uint(8);
  if (k == 0 || dim == 0 || k > (1u << 24) || dim > (1u << 24)) invalid("codebook header out of range");
  std::vector<double> centers(k * dim);
  for (auto& v : centers) v = std::bit_cast<double>(r.uint(8));
  if (!r.done()) invalid("codebook has trailing bytes");
  try {
    return Codebook(k, dim, std::move(centers), seed);
  } catch (const Error& e) {
    invalid(std::string("codebook: ") + e.what());
  }
}

json svm_to_json(const MulticlassSvmModel& m) {
  json pairs = json::array();
  for (const auto& p : m.pairwise) {
    pairs.push_back({
        {"first", p.first},
        {"second", p.second},
        {"bias", p.model.bias},
        {"gamma", p.model.gamma},
        {"alphas", p.model.alphas},
        {"labels", p.model.sv_labels},
        {"support_vectors", p.model.support_vectors},
    });
  }
  return {{"dim", m.dim}, {"class_names", m.class_names}, {"pairwise", pairs}};
}

MulticlassSvmModel svm_from_json(const json& j) {
  MulticlassSvmModel m;
  j.at("dim").get_to(m.dim);
  j.at("class_names").get_to(m.class_names);
  for (const auto& p : j.at("pairwise")) {
    MulticlassSvmModel::Pair pair;
    p.at("first").get_to(pair.first);
    p.at("second").get_to(pair.second);
    p.at("bias").get_to(pair.model.bias);
    p.at("gamma").get_to(pair.model.gamma);
    p.at("alphas").get_to(pair.model.alphas);
    p.at("labels").get_to(pair.model.sv_labels);
    p.at("support_vectors").get_to(pair.model.support_vectors);
    const std::size_t n = pair.model.alphas.size();
    if (pair.model.sv_labels.size() != n || pair.model.support_vectors.size() != n)
      invalid("svm pair has inconsistent support-vector arrays");
    for (const auto& sv : pair.model.support_vectors)
      if (sv.size() != m.dim) invalid("support vector dimension differs from model dimension");
    if (pair.first >= m.class_names.size() || pair.second >= m.class_names.size() || pair.first >= pair.second)
      invalid("svm pair refers to unknown classes");
    m.pairwise.push_back(std::move(pair));
  }
  const std::size_t c = m.class_names.size();
  if (c < 2 || m.pairwise.size() != c * (c - 1) / 2) invalid("svm must hold one model per class pair");
  return m;
}

}  // namespace

std::string serialize_bundle(const ModelBundle& bundle) {
  json manifest;
  manifest["version"] = bundle.version;
  manifest["config"] = json::parse(config_to_json(bundle.config));
  manifest["class_names"] = bundle.class_names;
  manifest["codebook_seed"] = bundle.codebook.seed();
  json log = json::array();
  for (const auto& e : bundle.build_log) log.push_back({{"path", e.path.generic_string()}, {"reason", e.reason}});
  manifest["build_log"] = log;

  const std::map<std::string, std::string> entries = {
      {"manifest.json", manifest.dump(2)},
      {"codebook.bin", codebook_bytes(bundle.codebook)},
      {"svm.json", svm_to_json(bundle.classifier).dump()},
  };
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, payload] : entries) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u64(out, payload.size());
    out += payload;
  }
  return out;
}

ModelBundle deserialize_bundle(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    invalid("not a shipbow bundle");
  Reader r(bytes);
  r.take(sizeof kMagic);
  const auto count = r.uint(4);
  std::map<std::string, std::string> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.take(r.uint(4));
    std::string payload = r.take(r.uint(8));
    entries[std::move(name)] = std::move(payload);
  }
  if (!r.done()) invalid("archive has trailing bytes");
  for (const char* name : {"manifest.json", "codebook.bin", "svm.json"})
    if (!entries.count(name)) invalid(std::string("archive is missing ") + name);

  ModelBundle bundle;
  try {
    const json manifest = json::parse(entries["manifest.json"]);
    bundle.version = manifest.at("version").get<std::string>();
    if (bundle.version.rfind(kVersionPrefix, 0) != 0) invalid("unknown bundle version " + bundle.version);
    // Minor revisions ("1.x") stay readable; another major is rejected.
    const std::string rev = bundle.version.substr(std::string(kVersionPrefix).size());
    if (rev.substr(0, rev.find('.')) != "1") invalid("unsupported bundle version " + bundle.version);
    bundle.config = config_from_json(manifest.at("config").dump());
    manifest.at("class_names").get_to(bundle.class_names);
    for (const auto& e : manifest.at("build_log"))
      bundle.build_log.push_back({e.at("path").get<std::string>(), e.at("reason").get<std::string>()});
    bundle.codebook = codebook_from(entries["codebook.bin"], manifest.at("codebook_seed").get<std::uint64_t>());
    bundle.classifier = svm_from_json(json::parse(entries["svm.json"]));
  } catch (const json::exception& e) {
    invalid(std::string("malformed bundle entry: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::BundleFormatInvalid) throw;
    invalid(std::string("bundle config: ") + e.what());
  }

  if (bundle.codebook.k() != bundle.config.nbins) invalid("codebook size differs from config nbins");
  if (bundle.classifier.dim != bundle.config.nbins) invalid("classifier dimension differs from config nbins");
  if (bundle.class_names != bundle.classifier.class_names) invalid("class names differ from classifier classes");
  return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  const std::string bytes = serialize_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw Error(Errc::FileNotFound, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_bundle(bytes);
}

}  // namespace shipbow
