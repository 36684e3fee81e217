/* Copyright 2026 The Detkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <vector>

#include "detkit/detio.hpp"

namespace detkit {

struct FusionConfig {
  double iou_threshold = 0.45;        // overlap strictly above this suppresses
  double confidence_threshold = 0.3;  // minimum confidence kept before fusion
  bool class_aware = true;            // suppress only within the same class

  // Throws InputError when a threshold is outside its range.
  void validate() const;
};

// Keeps detections with confidence >= tau, input order preserved.
std::vector<Detection> filter_by_confidence(const std::vector<Detection>& dets,
                                            double tau);

// Greedy non-maximum suppression: repeatedly take the most confident
// remaining box, discard every remaining box whose IoU with it exceeds
// cfg.iou_threshold (same class only when class_aware), and append the taken
// box to the output. Output order is selection order, so confidences are
// non-increasing. Confidence ties break by (model_id, input position), both
// ascending, which makes the result deterministic.
std::vector<Detection> greedy_nms(const std::vector<Detection>& dets,
                                  const FusionConfig& cfg);

// Multi-model fusion: pools the per-model outputs in the given order, drops
// everything below cfg.confidence_threshold, then runs greedy_nms. Equivalent
// to greedy_nms on the filtered union.
std::vector<Detection> ensemble_fuse(
    const std::vector<std::vector<Detection>>& per_model,
    const FusionConfig& cfg);

}  // namespace detkit
