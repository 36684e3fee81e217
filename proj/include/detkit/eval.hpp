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

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detkit/detio.hpp"

namespace detkit {

// Outcome of one ranked prediction.
struct PredictionMatch {
  double confidence = 0.0;
  bool is_tp = false;
  std::optional<std::size_t> gt_index;  // set only for true positives
};

// Per-prediction outcomes in descending-confidence order plus the
// ground-truth denominator of the recall.
struct MatchResult {
  std::vector<PredictionMatch> matches;
  std::size_t total_gt = 0;
};

// Single-image, single-class matching: predictions are processed in
// descending confidence (ties by input order); each claims the still
// unmatched ground truth with the highest IoU when that IoU >= iou_threshold,
// otherwise it counts as a false positive. Each ground truth is claimed at
// most once; IoU ties go to the lowest ground-truth index. Callers are
// expected to pass boxes of one image and one class.
MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<GroundTruthBox>& gts,
                             double iou_threshold);

struct PRPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

// One point per distinct confidence value, thresholds strictly ascending. At
// point k, precision and recall cover the predictions with confidence >=
// threshold k. The conventions Recall(n) = 0 and Precision(n) = 1 apply past
// the last point; only Recall(n) ever enters the AP sum.
struct PRCurve {
  std::vector<PRPoint> points;
  std::size_t total_gt = 0;
  bool undefined_recall = false;  // no ground truth: recall has no denominator

  static constexpr double kRecallPastEnd = 0.0;
  static constexpr double kPrecisionPastEnd = 1.0;
};

// Requires match.matches in descending-confidence order (as produced by
// match_detections, or by sorting pooled matches).
PRCurve pr_curve(const MatchResult& match);

struct ApOptions {
  // When set, AP is the mean of the precision envelope sampled at
  // recall_points evenly spaced recall values, for cross-checking against
  // other tools. Off by default: the rectangle sum is the reference.
  bool interpolated = false;
  int recall_points = 101;
};

// Rectangle sum: sum_k [Recall(k) - Recall(k+1)] * Precision(k) with
// Recall(n) = 0. An empty curve gives 0.
double average_precision(const PRCurve& curve, const ApOptions& options = {});

// Arithmetic mean. Throws UndefinedMetricError when the list is empty.
double mean_average_precision(const std::vector<double>& per_class_ap);

// Ground truth and predictions for one image.
struct ImageSample {
  std::string image_id;
  std::vector<GroundTruthBox> gts;
  std::vector<Detection> preds;
};

struct ClassEval {
  int class_id = 0;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  std::optional<double> ap;  // unset when the class has no ground truth
  PRCurve curve;
};

// Per-class evaluation at one IoU threshold. Matching runs per image; the
// curves pool the ranked outcomes of all images per class.
std::vector<ClassEval> evaluate_classes(const std::vector<ImageSample>& samples,
                                        int class_count, double iou_threshold,
                                        const ApOptions& options = {});

// Mean AP over classes that have ground truth; classes without any are
// excluded from the mean. Throws UndefinedMetricError when none remain.
double map_of(const std::vector<ClassEval>& classes);

struct ThresholdMap {
  double iou_threshold = 0.0;
  double map = 0.0;
};

struct IouRangeResult {
  std::vector<ThresholdMap> per_threshold;
  double mean = 0.0;
};

// mAP at lo, lo+step, ..., hi plus the mean over those thresholds.
IouRangeResult map_over_iou_range(const std::vector<ImageSample>& samples,
                                  int class_count, double lo, double hi,
                                  double step, const ApOptions& options = {});

// A single matching threshold or an inclusive range swept by step.
struct IouSpec {
  double lo = 0.5;
  double hi = 0.5;
  double step = 0.05;

  static IouSpec single(double threshold) {
    return IouSpec{threshold, threshold, 0.05};
  }
  static IouSpec range(double lo, double hi, double step) {
    return IouSpec{lo, hi, step};
  }
  bool is_range() const { return hi > lo; }
  std::vector<double> thresholds() const;
  void validate() const;
};

struct EvalReport {
  static constexpr int kSchemaVersion = 1;

  IouSpec iou_spec;
  std::vector<std::string> class_names;
  std::vector<ClassEval> per_class;     // evaluated at thresholds().front()
  std::vector<int> classes_without_gt;  // excluded from every mAP mean
  std::vector<ThresholdMap> map_by_threshold;
  double map_mean = 0.0;
  std::optional<double> confidence_threshold;  // metadata only
  bool interpolated_ap = false;
  std::string timestamp;  // ISO-8601 UTC
};

// Loads ground truth through the manifest and scores the predictions.
// Every prediction image id must exist in the manifest and every class id
// must fit the class table; offenders are listed in the error.
EvalReport evaluate_dataset(
    const DatasetManifest& manifest,
    const std::map<std::string, std::vector<Detection>>& predictions_by_image,
    const IouSpec& iou_spec, const ApOptions& options = {});

void write_report_text(std::ostream& out, const EvalReport& report);
void write_report_json(std::ostream& out, const EvalReport& report);

// CSV with a `threshold,recall,precision` header, one row per curve point.
void write_pr_curve_csv(std::ostream& out, const PRCurve& curve);

// Report metadata clock; the DETKIT_TIMESTAMP environment variable overrides
// the wall clock so pipelines can pin their output.
std::string report_timestamp();

}  // namespace detkit
