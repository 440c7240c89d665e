#pragma once

#include <cstdint>
#include <string>

#include "despeckle/model.hpp"

namespace despeckle {

/// Hyperparameters recorded alongside the weights.
struct TrainingMeta {
  double tau_train = 0.1;
  int looks = 4;
  int epochs = 5;
  int batch = 16;
  double lr = 1e-3;
  int lr_drop_epoch = 31;
  double lr_after = 1e-4;
  uint64_t seed = 1;
};

struct LoadedCheckpoint {
  UnrolledNet net;
  TrainingMeta meta;
};

/// Checkpoint file layout:
///   bytes 0..7   magic "DSPKLCK1"
///   bytes 8..15  little-endian uint64 header length
///   header       UTF-8 JSON with format_version, architecture,
///                training_config and the tensor directory
///                (name, shape, offset into the payload)
///   payload      little-endian IEEE-754 binary64 values, tensors
///                concatenated in directory order
/// save -> load -> save is byte-identical.
void save_checkpoint(const UnrolledNet& net, const TrainingMeta& meta, const std::string& path);

/// Validates magic, version, architecture/directory consistency and payload
/// length; throws CheckpointError otherwise.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace despeckle
