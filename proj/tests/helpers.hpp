#pragma once

#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "sfusion/corpus.hpp"
#include "sfusion/io_util.hpp"

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SFUSION_FIXTURES) / name;
}

inline sfusion::Sample reference_dce() {
  return sfusion::load_corpus(fixture("dce_sample.jsonl"), sfusion::DatasetKind::DCE).samples.at(0);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("sfusion-" + tag + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
