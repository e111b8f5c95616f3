#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mbio/evaluation.hpp"
#include "mbio/experiment.hpp"
#include "mbio/fusion.hpp"
#include "mbio/gallery.hpp"

namespace mbio::cli {

/// Everything a subcommand may need. Populated from an optional JSON config
/// file, then overridden by command-line flags.
struct RunConfig {
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> face_model;
  std::optional<std::filesystem::path> ear_model;
  std::optional<std::filesystem::path> store;
  std::optional<std::filesystem::path> out;

  std::optional<double> face_threshold;
  std::optional<double> ear_threshold;
  double min_ncc = 0.0;
  int samples_per_modality = 3;
  int majority_min = 2;

  std::optional<Split> split;
  std::optional<std::uint64_t> seed;
  ImageSize face_size = kDefaultFaceSize;
  ImageSize ear_size = kDefaultEarSize;

  std::optional<std::size_t> components;
  double variance_fraction = 0.95;
  Protocol protocol = Protocol::Identification;
  unsigned workers = 1;

  FusionPolicy fusion() const { return FusionPolicy(samples_per_modality, majority_min); }

  /// Range checks shared by every command.
  void validate() const;
};

/// Reads a JSON config. Relative paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir);

}  // namespace mbio::cli
