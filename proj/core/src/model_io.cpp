#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "mbio/eigenspace.hpp"
#include "mbio/gallery.hpp"

namespace mbio {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_field(const json& j, const char* key) {
  const auto values = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

}  // namespace

std::string model_to_json(const EigenModel& model) {
  json basis = json::array();
  for (Eigen::Index j = 0; j < model.basis().cols(); ++j) {
    basis.push_back(to_std(model.basis().col(j)));
  }
  json doc = {
      {"format_version", kFormatVersion},
      {"modality", std::string(to_string(model.modality()))},
      {"width", model.image_width()},
      {"height", model.image_height()},
      {"k", model.k()},
      {"mean", to_std(model.mean())},
      {"eigenvalues", to_std(model.eigenvalues())},
      {"basis", std::move(basis)},
  };
  return doc.dump() + "\n";
}

EigenModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw Error("unsupported model format_version");
    }
    const Modality modality = parse_modality(doc.at("modality").get<std::string>());
    const int width = doc.at("width").get<int>();
    const int height = doc.at("height").get<int>();
    const auto k = doc.at("k").get<std::size_t>();
    Eigen::VectorXd mean = vector_field(doc, "mean");
    Eigen::VectorXd eigenvalues = vector_field(doc, "eigenvalues");
    const json& columns = doc.at("basis");
    if (columns.size() != k || static_cast<std::size_t>(eigenvalues.size()) != k) {
      throw Error("model k does not match basis/eigenvalue counts");
    }
    Eigen::MatrixXd basis(mean.size(), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const auto col = columns[j].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(col.size()) != mean.size()) {
        throw Error("model basis column length does not match mean");
      }
      basis.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
    }
    EigenModel model(modality, width, height, std::move(mean), std::move(basis),
                     std::move(eigenvalues));
    if (model.orthonormality_error() > 1e-9) throw Error("model basis is not orthonormal");
    return model;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const EigenModel& model) {
  write_text_file(path, model_to_json(model));
}

EigenModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

std::string model_digest(const EigenModel& model) {
  return sha256_hex(model_to_json(model));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace mbio
