#include "run_config.hpp"

#include <json.hpp>

namespace mbio::cli {
namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (face_threshold && !(*face_threshold >= 0.0)) throw Error("face threshold must be >= 0");
  if (ear_threshold && !(*ear_threshold >= 0.0)) throw Error("ear threshold must be >= 0");
  if (!(min_ncc >= 0.0 && min_ncc <= 1.0)) throw Error("min_ncc must lie in [0,1]");
  (void)fusion();
  if (components && *components == 0) throw Error("components must be at least 1");
  if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
    throw Error("variance fraction must lie in (0,1]");
  }
  if (workers == 0) throw Error("workers must be at least 1");
}

RunConfig config_from_json(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  auto path_of = [&](const json& j) {
    fs::path p = j.get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  };

  RunConfig cfg;
  try {
    if (doc.contains("dataset")) cfg.dataset = path_of(doc["dataset"]);
    if (doc.contains("store")) cfg.store = path_of(doc["store"]);
    if (doc.contains("out")) cfg.out = path_of(doc["out"]);
    if (doc.contains("models")) {
      const json& m = doc["models"];
      if (m.contains("face")) cfg.face_model = path_of(m["face"]);
      if (m.contains("ear")) cfg.ear_model = path_of(m["ear"]);
    }
    if (doc.contains("thresholds")) {
      const json& t = doc["thresholds"];
      if (t.contains("face")) cfg.face_threshold = t["face"].get<double>();
      if (t.contains("ear")) cfg.ear_threshold = t["ear"].get<double>();
    }
    if (doc.contains("quality")) cfg.min_ncc = doc["quality"].value("min_ncc", cfg.min_ncc);
    if (doc.contains("fusion")) {
      const json& f = doc["fusion"];
      cfg.samples_per_modality = f.value("samples_per_modality", cfg.samples_per_modality);
      cfg.majority_min = f.value("majority_min", cfg.majority_min);
    }
    if (doc.contains("split")) cfg.split = parse_split(doc["split"].get<std::string>());
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("image_size")) {
      const json& s = doc["image_size"];
      if (s.contains("face")) cfg.face_size = parse_image_size(s["face"].get<std::string>());
      if (s.contains("ear")) cfg.ear_size = parse_image_size(s["ear"].get<std::string>());
    }
    if (doc.contains("train")) {
      const json& t = doc["train"];
      if (t.contains("components")) cfg.components = t["components"].get<std::size_t>();
      cfg.variance_fraction = t.value("variance_fraction", cfg.variance_fraction);
    }
    if (doc.contains("evaluation")) {
      const json& e = doc["evaluation"];
      if (e.contains("protocol")) cfg.protocol = parse_protocol(e["protocol"].get<std::string>());
      cfg.workers = e.value("workers", cfg.workers);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  return config_from_json(read_text_file(path), path.parent_path());
}

}  // namespace mbio::cli
