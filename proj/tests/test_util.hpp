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

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "detkit/detio.hpp"

namespace detkit::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto unique = std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1));
    path_ = std::filesystem::temp_directory_path() / ("detkit_" + unique);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline BBox random_bbox(std::mt19937& rng) {
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  double x1 = coord(rng), x2 = coord(rng);
  double y1 = coord(rng), y2 = coord(rng);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return BBox{x1, y1, x2, y2};
}

// Confidences are quantized to multiples of 0.05 so ties actually occur.
inline Detection random_detection(std::mt19937& rng, int class_count,
                                  int model_count) {
  std::uniform_int_distribution<int> cls(0, class_count - 1);
  std::uniform_int_distribution<int> model(0, model_count - 1);
  std::uniform_int_distribution<int> conf_step(0, 20);
  Detection det;
  det.class_id = cls(rng);
  det.bbox = random_bbox(rng);
  det.confidence = conf_step(rng) * 0.05;
  det.model_id = model(rng);
  return det;
}

}  // namespace detkit::testing
