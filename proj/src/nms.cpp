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
#include "detkit/nms.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "detkit/errors.hpp"

namespace detkit {

void FusionConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw InputError("fusion: iou_threshold must lie in (0, 1), got " +
                     std::to_string(iou_threshold));
  }
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw InputError("fusion: confidence_threshold must lie in [0, 1], got " +
                     std::to_string(confidence_threshold));
  }
}

std::vector<Detection> filter_by_confidence(const std::vector<Detection>& dets,
                                            double tau) {
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const auto& det : dets) {
    if (det.confidence >= tau) kept.push_back(det);
  }
  return kept;
}

std::vector<Detection> greedy_nms(const std::vector<Detection>& dets,
                                  const FusionConfig& cfg) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].confidence != dets[b].confidence) {
      return dets[a].confidence > dets[b].confidence;
    }
    if (dets[a].model_id != dets[b].model_id) {
      return dets[a].model_id < dets[b].model_id;
    }
    return a < b;
  });

  std::vector<char> discarded(dets.size(), 0);
  std::vector<Detection> selected;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (discarded[order[i]]) continue;
    const Detection& top = dets[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (discarded[order[j]]) continue;
      const Detection& other = dets[order[j]];
      if (cfg.class_aware && other.class_id != top.class_id) continue;
      if (iou(top.bbox, other.bbox) > cfg.iou_threshold) {
        discarded[order[j]] = 1;
      }
    }
    selected.push_back(top);
  }
  return selected;
}

std::vector<Detection> ensemble_fuse(
    const std::vector<std::vector<Detection>>& per_model,
    const FusionConfig& cfg) {
  std::size_t total = 0;
  for (const auto& model : per_model) total += model.size();
  std::vector<Detection> pooled;
  pooled.reserve(total);
  for (const auto& model : per_model) {
    pooled.insert(pooled.end(), model.begin(), model.end());
  }
  return greedy_nms(filter_by_confidence(pooled, cfg.confidence_threshold),
                    cfg);
}

}  // namespace detkit
