#pragma once

#include <filesystem>

#include "emoprobe/train.hpp"

namespace emoprobe {

inline constexpr int kCheckpointFormatVersion = 1;

// Checkpoint directory:
//   metadata.json        dims, temperature, config, trace, provenance, version
//   W1.embd / W1.ids     label projection, projection_dim x input_dim
//   W2.embd / W2.ids     event projection
// Projection matrices use the embedding-matrix format, so parameters must lie
// on the float32 grid (training guarantees this). Throws FormatError otherwise.
void save_checkpoint(const TrainedProbe& probe, const std::filesystem::path& dir);

// Throws FormatError on version mismatch, corrupt matrices, or a declared
// shape that disagrees with the stored matrices.
TrainedProbe load_checkpoint(const std::filesystem::path& dir);

}  // namespace emoprobe
