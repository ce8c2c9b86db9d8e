#pragma once

// On-disk dataset layout: one CSV per split, images/NNNNNN.png, and a
// manifest.json with the generator snapshot and SHA-256 checksums.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltbench/datasets.hpp"

namespace lt {

/// Tunnel columns in file order.
const std::vector<std::string>& data_columns();
/// data_columns() plus env, int_*, z_* and image.
std::vector<std::string> dataset_columns(bool with_images);

struct WriteOptions {
  bool images = true;
};

/// Writes the dataset and its manifest into `dir` (created if needed).
void write_dataset(const Dataset& ds, const std::filesystem::path& dir, const WriteOptions& opts = {});

struct ReadOptions {
  bool verify_checksums = true;
};

/// Inverse of write_dataset. Also accepts directories without a manifest, in
/// which case the train/val/test/eval/all CSVs present are read as a custom
/// dataset.
/// Unknown columns are ignored; missing tunnel columns raise SchemaError.
Dataset read_dataset(const std::filesystem::path& dir, const ReadOptions& opts = {});

/// Reads one split CSV. `z_*` columns default to the device factors.
DatasetSplit read_split_csv(const std::filesystem::path& path, const std::string& name);
void write_split_csv(const std::filesystem::path& path, const DatasetSplit& split, bool with_images);

nlohmann::json build_manifest(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace lt
