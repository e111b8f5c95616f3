#include "mbio/gallery.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <json.hpp>

namespace mbio {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

constexpr int kStoreFormatVersion = 1;

bool is_image_file(const fs::directory_entry& entry) {
  if (!entry.is_regular_file()) return false;
  std::string ext = entry.path().extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".png";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (is_image_file(entry)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

const char* modality_key(Modality m) { return m == Modality::Face ? "face" : "ear"; }

}  // namespace

ImageSize parse_image_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  ImageSize size;
  if (x == std::string_view::npos) throw Error("image size must look like WIDTHxHEIGHT");
  const auto w = text.substr(0, x);
  const auto h = text.substr(x + 1);
  const auto rw = std::from_chars(w.data(), w.data() + w.size(), size.width);
  const auto rh = std::from_chars(h.data(), h.data() + h.size(), size.height);
  if (rw.ec != std::errc() || rw.ptr != w.data() + w.size() || rh.ec != std::errc() ||
      rh.ptr != h.data() + h.size() || size.width <= 0 || size.height <= 0) {
    throw Error("invalid image size '" + std::string(text) + "'");
  }
  return size;
}

DatasetManifest scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error("dataset root '" + root.string() + "' not found");

  std::vector<fs::path> subject_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && !name.empty() && name.front() != '.') {
      subject_dirs.push_back(entry.path());
    }
  }
  std::sort(subject_dirs.begin(), subject_dirs.end());

  DatasetManifest manifest;
  manifest.root = root;
  for (const fs::path& dir : subject_dirs) {
    SubjectEntry subject;
    subject.subject_id = dir.filename().string();
    subject.face = list_images(dir / "face");
    subject.ear = list_images(dir / "ear");
    for (Modality m : {Modality::Face, Modality::Ear}) {
      if (subject.paths(m).empty()) {
        subject.flagged = true;
        manifest.warnings.push_back("subject '" + subject.subject_id + "' has no " +
                                    std::string(to_string(m)) + " samples");
      }
    }
    manifest.subjects.push_back(std::move(subject));
  }
  return manifest;
}

void EnrollmentStore::bind(Modality m, std::string digest) {
  Block& b = block(m);
  if (b.digest && *b.digest != digest) {
    throw Error("store is bound to a different " + std::string(to_string(m)) + " model");
  }
  b.digest = std::move(digest);
}

void EnrollmentStore::add_template(FeatureVector fv) {
  if (fv.subject_id.empty()) throw Error("template without subject label");
  Block& b = block(fv.modality);
  if (!b.templates.empty() && b.templates.front().weights.size() != fv.weights.size()) {
    throw Error("template length differs from existing templates");
  }
  b.templates.push_back(std::move(fv));
}

void EnrollmentStore::enroll(const EigenModel& model, std::span<const ImageSample> samples,
                             const std::string& subject_id) {
  if (subject_id.empty()) throw Error("enroll: empty subject label");
  std::vector<FeatureVector> projected;
  projected.reserve(samples.size());
  for (const ImageSample& s : samples) {
    FeatureVector fv = project(model, s);
    fv.subject_id = subject_id;
    projected.push_back(std::move(fv));
  }
  bind(model.modality(), mbio::model_digest(model));
  for (FeatureVector& fv : projected) add_template(std::move(fv));
}

std::span<const FeatureVector> EnrollmentStore::templates(Modality m) const {
  return block(m).templates;
}

std::vector<std::string> EnrollmentStore::subjects(Modality m) const {
  std::set<std::string> unique;
  for (const FeatureVector& t : block(m).templates) unique.insert(t.subject_id);
  return {unique.begin(), unique.end()};
}

bool EnrollmentStore::has_subject(Modality m, std::string_view subject) const {
  const auto& t = block(m).templates;
  return std::any_of(t.begin(), t.end(),
                     [&](const FeatureVector& fv) { return fv.subject_id == subject; });
}

std::optional<std::string> EnrollmentStore::model_digest(Modality m) const {
  return block(m).digest;
}

std::string store_to_json(const EnrollmentStore& store) {
  json modalities = json::object();
  for (Modality m : {Modality::Face, Modality::Ear}) {
    const auto digest = store.model_digest(m);
    if (!digest) continue;
    json templates = json::array();
    for (const FeatureVector& t : store.templates(m)) {
      templates.push_back({{"subject", t.subject_id},
                           {"weights", std::vector<double>(t.weights.data(),
                                                           t.weights.data() + t.weights.size())}});
    }
    modalities[modality_key(m)] = {{"model_digest", *digest}, {"templates", std::move(templates)}};
  }
  json doc = {{"format_version", kStoreFormatVersion},
              {"created_at", store.created_at()},
              {"modalities", std::move(modalities)}};
  return doc.dump() + "\n";
}

EnrollmentStore store_from_json(std::string_view text, const EigenModel* face_model,
                                const EigenModel* ear_model) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("store file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kStoreFormatVersion) {
      throw Error("unsupported store format_version");
    }
    EnrollmentStore store;
    store.set_created_at(doc.value("created_at", std::string()));
    const json& modalities = doc.at("modalities");
    for (Modality m : {Modality::Face, Modality::Ear}) {
      if (!modalities.contains(modality_key(m))) continue;
      const json& block = modalities.at(modality_key(m));
      const auto digest = block.at("model_digest").get<std::string>();
      const EigenModel* model = m == Modality::Face ? face_model : ear_model;
      if (model != nullptr && digest != mbio::model_digest(*model)) {
        throw Error("stale store: " + std::string(to_string(m)) +
                    " templates were produced by a different model");
      }
      store.bind(m, digest);
      for (const json& t : block.at("templates")) {
        const auto weights = t.at("weights").get<std::vector<double>>();
        if (model != nullptr && weights.size() != model->k()) {
          throw Error("store template length does not match model k");
        }
        store.add_template(FeatureVector{
            Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                              static_cast<Eigen::Index>(weights.size())),
            m, t.at("subject").get<std::string>()});
      }
    }
    return store;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed store file: ") + e.what());
  }
}

void save_store(const fs::path& path, const EnrollmentStore& store) {
  write_text_file(path, store_to_json(store));
}

EnrollmentStore load_store(const fs::path& path, const EigenModel* face_model,
                           const EigenModel* ear_model) {
  return store_from_json(read_text_file(path), face_model, ear_model);
}

}  // namespace mbio
