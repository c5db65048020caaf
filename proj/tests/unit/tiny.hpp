#pragma once

#include "mtml/config.hpp"

namespace mtml::testing {

// 16x16 images, a handful of samples and one epoch per stage: enough to
// exercise every code path in well under a second per pass.
inline ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.image_size = 16;
  cfg.num_classes = 3;
  cfg.toy_per_class_train = 2;
  cfg.toy_per_class_eval = 2;
  cfg.widths = {16, 32};
  cfg.blocks = {1, 1};
  cfg.epochs = {1, 1, 1};
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  return cfg;
}

}  // namespace mtml::testing
