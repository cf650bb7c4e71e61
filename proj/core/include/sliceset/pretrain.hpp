#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sliceset/archive.hpp"
#include "sliceset/encoders.hpp"
#include "sliceset/optim.hpp"
#include "sliceset/synthetic.hpp"

namespace sliceset {

struct PretrainConfig {
  EncoderConfig encoder;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer{OptimizerKind::adam, 1e-3};
  std::uint64_t seed = 0;
};

struct PretrainResult {
  WeightArchive archive;  // encoder entries only, named encoder.*
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;  // eval-mode accuracy on the training images after the last epoch
};

/// Trains encoder + a temporary linear classification head on 2D images
/// with cross-entropy, then exports only the encoder. Images are replicated
/// across the encoder's input channels. A trailing batch of one image is
/// merged into the previous batch so batch norm always sees two samples.
PretrainResult pretrain_2d(const ImageDataset& images, const PretrainConfig& config);

}  // namespace sliceset
