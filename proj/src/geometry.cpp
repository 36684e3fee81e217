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
#include "detkit/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace detkit {

namespace {

double interval_overlap(double a_min, double a_max, double b_min,
                        double b_max) {
  return std::max(0.0, std::min(a_max, b_max) - std::max(a_min, b_min));
}

}  // namespace

double area(const BBox& b) {
  return (b.x_max - b.x_min) * (b.y_max - b.y_min);
}

double iou(const BBox& a, const BBox& b) {
  const double inter = interval_overlap(a.x_min, a.x_max, b.x_min, b.x_max) *
                       interval_overlap(a.y_min, a.y_max, b.y_min, b.y_max);
  const double uni = area(a) + area(b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BBox clip_to_unit(const BBox& b) {
  return BBox{std::clamp(b.x_min, 0.0, 1.0), std::clamp(b.y_min, 0.0, 1.0),
              std::clamp(b.x_max, 0.0, 1.0), std::clamp(b.y_max, 0.0, 1.0)};
}

bool satisfies_invariants(const BBox& b) {
  return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= 1.0 &&
         b.y_max <= 1.0 && b.x_min <= b.x_max && b.y_min <= b.y_max;
}

BBox yolo_to_corner(const YoloBox& y) {
  return clip_to_unit(BBox{y.cx - y.w / 2.0, y.cy - y.h / 2.0,
                           y.cx + y.w / 2.0, y.cy + y.h / 2.0});
}

YoloBox corner_to_yolo(const BBox& b) {
  return YoloBox{(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0,
                 b.x_max - b.x_min, b.y_max - b.y_min};
}

PixelRect to_pixels(const BBox& b, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument(
        "to_pixels: image dimensions must be positive");
  }
  return PixelRect{b.x_min * width, b.y_min * height, b.x_max * width,
                   b.y_max * height};
}

}  // namespace detkit
