#pragma once

#include "ressm/model/layout.hpp"

#include <filesystem>

namespace ressm::io {

/// Dataset manifest (JSON):
///   {"format": "ressm-dataset", "version": 1, "P": 8, "K": 250,
///    "groups": [{"subjects": [{"segments": ["r0/i0/j0.rssm", ...]}, ...]}, ...]}
/// Segment paths are relative to the manifest's directory and each names a
/// P x K tensor file.
model::HierDataset read_dataset(const std::filesystem::path& manifest);

/// Writes one tensor per segment under `dir` and then `dir`/manifest.json.
/// Returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const model::HierDataset& data);

}  // namespace ressm::io
