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

namespace detkit {

// Axis-aligned box in normalized corner coordinates: dimensionless fractions
// of image width/height in [0, 1], with x_min <= x_max and y_min <= y_max.
// Normalized form is invariant under non-uniform image resizing; pixel
// coordinates are a derived view (to_pixels).
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Box in the YOLO label convention: normalized center plus width/height.
struct YoloBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const YoloBox&, const YoloBox&) = default;
};

// Box scaled to the pixel grid of a concrete image.
struct PixelRect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

double area(const BBox& b);

// Intersection over union. Defined as 0 when the union has zero area, so
// degenerate boxes never produce NaN in downstream loops.
double iou(const BBox& a, const BBox& b);

// Clamps all four coordinates to [0, 1]. Preserves coordinate order.
BBox clip_to_unit(const BBox& b);

bool satisfies_invariants(const BBox& b);

// Center form to corner form, clipped to [0, 1].
BBox yolo_to_corner(const YoloBox& y);

// Corner form to center form. Inverse of yolo_to_corner for in-range input.
YoloBox corner_to_yolo(const BBox& b);

// Scales to pixel units. Throws std::invalid_argument for non-positive
// dimensions.
PixelRect to_pixels(const BBox& b, int width, int height);

}  // namespace detkit
