#pragma once

// On-disk datasets. A dataset directory holds
//   manifest.txt   key = value lines (task, seeds, hashes, split sizes)
//   config.txt     canonical echo of the generating configuration
//   train/ test/   one directory per split, each with
//     features.idx   float64 IDX tensor (total steps) x feature_dim; samples
//                    are stacked along the first axis in id order
//     labels.txt     "id length count_0 ... count_{C-1}" per line
//     truth.txt      eval-only: "id channel n t_1 ... t_n" per line
//     centers.txt    eval-only, canvas data: "id channel x y" per glyph

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loco/synth.hpp"

namespace loco::dataset {

void write_split(const std::filesystem::path& dir, std::span<const synth::SampleRecord> records);

/// Features and counts only; the training path never opens truth files.
std::vector<synth::TrainingSample> read_samples(const std::filesystem::path& dir);

std::vector<synth::EventTruth> read_truth(const std::filesystem::path& dir);

using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace loco::dataset
