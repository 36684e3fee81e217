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
#include "detkit/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "detkit/errors.hpp"

namespace detkit {

MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<GroundTruthBox>& gts,
                             double iou_threshold) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return preds[a].confidence > preds[b].confidence;
                   });

  MatchResult result;
  result.total_gt = gts.size();
  result.matches.reserve(preds.size());
  std::vector<char> claimed(gts.size(), 0);
  for (const std::size_t idx : order) {
    double best_iou = -1.0;
    std::size_t best_gt = 0;
    bool found = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (claimed[g]) continue;
      const double v = iou(preds[idx].bbox, gts[g].bbox);
      if (v > best_iou) {  // strict: ties keep the lowest index
        best_iou = v;
        best_gt = g;
        found = true;
      }
    }
    PredictionMatch match;
    match.confidence = preds[idx].confidence;
    if (found && best_iou >= iou_threshold) {
      claimed[best_gt] = 1;
      match.is_tp = true;
      match.gt_index = best_gt;
    }
    result.matches.push_back(match);
  }
  return result;
}

PRCurve pr_curve(const MatchResult& match) {
  PRCurve curve;
  curve.total_gt = match.total_gt;
  curve.undefined_recall = match.total_gt == 0;

  const auto& ranked = match.matches;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::vector<PRPoint> descending;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ranked[i].is_tp ? ++tp : ++fp;
    const bool last_of_threshold =
        i + 1 == ranked.size() ||
        ranked[i + 1].confidence != ranked[i].confidence;
    if (!last_of_threshold) continue;
    PRPoint point;
    point.threshold = ranked[i].confidence;
    point.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    point.recall = curve.total_gt == 0
                       ? 0.0
                       : static_cast<double>(tp) /
                             static_cast<double>(curve.total_gt);
    descending.push_back(point);
  }
  curve.points.assign(descending.rbegin(), descending.rend());
  return curve;
}

namespace {

double interpolated_ap(const PRCurve& curve, int recall_points) {
  const int n = std::max(2, recall_points);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = static_cast<double>(i) / (n - 1);
    double envelope = 0.0;
    for (const auto& p : curve.points) {
      if (p.recall >= r) envelope = std::max(envelope, p.precision);
    }
    total += envelope;
  }
  return total / n;
}

}  // namespace

double average_precision(const PRCurve& curve, const ApOptions& options) {
  if (curve.points.empty()) return 0.0;
  if (options.interpolated) {
    return interpolated_ap(curve, options.recall_points);
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const double next_recall = k + 1 < curve.points.size()
                                   ? curve.points[k + 1].recall
                                   : PRCurve::kRecallPastEnd;
    ap += (curve.points[k].recall - next_recall) * curve.points[k].precision;
  }
  return ap;
}

double mean_average_precision(const std::vector<double>& per_class_ap) {
  if (per_class_ap.empty()) {
    throw UndefinedMetricError(
        "mAP is undefined: no class has ground truth in the evaluated set");
  }
  double sum = 0.0;
  for (const double ap : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

std::vector<ClassEval> evaluate_classes(const std::vector<ImageSample>& samples,
                                        int class_count, double iou_threshold,
                                        const ApOptions& options) {
  if (class_count <= 0) {
    throw InputError("evaluation requires a positive class count");
  }
  std::vector<ClassEval> out(static_cast<std::size_t>(class_count));
  for (int c = 0; c < class_count; ++c) {
    ClassEval& entry = out[static_cast<std::size_t>(c)];
    entry.class_id = c;

    MatchResult pooled;
    for (const auto& sample : samples) {
      std::vector<GroundTruthBox> gts_c;
      for (const auto& gt : sample.gts) {
        if (gt.class_id == c) gts_c.push_back(gt);
      }
      std::vector<Detection> preds_c;
      for (const auto& det : sample.preds) {
        if (det.class_id == c) preds_c.push_back(det);
      }
      MatchResult local = match_detections(preds_c, gts_c, iou_threshold);
      pooled.total_gt += local.total_gt;
      pooled.matches.insert(pooled.matches.end(), local.matches.begin(),
                            local.matches.end());
      entry.pred_count += preds_c.size();
    }
    // Re-rank the pooled outcomes; ties keep image order for determinism.
    std::stable_sort(pooled.matches.begin(), pooled.matches.end(),
                     [](const PredictionMatch& a, const PredictionMatch& b) {
                       return a.confidence > b.confidence;
                     });
    entry.gt_count = pooled.total_gt;
    entry.curve = pr_curve(pooled);
    if (entry.gt_count > 0) {
      entry.ap = average_precision(entry.curve, options);
    }
  }
  return out;
}

double map_of(const std::vector<ClassEval>& classes) {
  std::vector<double> included;
  for (const auto& entry : classes) {
    if (entry.ap.has_value()) included.push_back(*entry.ap);
  }
  return mean_average_precision(included);
}

void IouSpec::validate() const {
  if (!(lo > 0.0 && lo <= 1.0 && hi > 0.0 && hi <= 1.0)) {
    throw InputError("IoU thresholds must lie in (0, 1]");
  }
  if (lo > hi) throw InputError("IoU range: lo must not exceed hi");
  if (!(step > 0.0)) throw InputError("IoU range: step must be positive");
}

std::vector<double> IouSpec::thresholds() const {
  validate();
  // Relative slack so 0.5:0.95:0.05 yields exactly ten thresholds.
  const int count =
      hi > lo ? static_cast<int>(std::floor((hi - lo) / step + 1e-6)) : 0;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) values.push_back(lo + i * step);
  return values;
}

IouRangeResult map_over_iou_range(const std::vector<ImageSample>& samples,
                                  int class_count, double lo, double hi,
                                  double step, const ApOptions& options) {
  const IouSpec spec = IouSpec::range(lo, hi, step);
  IouRangeResult result;
  double sum = 0.0;
  for (const double threshold : spec.thresholds()) {
    const double value =
        map_of(evaluate_classes(samples, class_count, threshold, options));
    result.per_threshold.push_back({threshold, value});
    sum += value;
  }
  result.mean = sum / static_cast<double>(result.per_threshold.size());
  return result;
}

std::string report_timestamp() {
  if (const char* env = std::getenv("DETKIT_TIMESTAMP")) return env;
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

namespace {

std::string join(const std::vector<std::string>& items,
                 const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

EvalReport evaluate_dataset(
    const DatasetManifest& manifest,
    const std::map<std::string, std::vector<Detection>>& predictions_by_image,
    const IouSpec& iou_spec, const ApOptions& options) {
  iou_spec.validate();
  const int class_count = static_cast<int>(manifest.classes.size());
  if (class_count == 0) {
    throw InputError("manifest has an empty class table");
  }

  std::unordered_set<std::string_view> known_ids;
  for (const auto& image : manifest.images) known_ids.insert(image.id);
  std::vector<std::string> unknown_images;
  std::unordered_set<int> bad_class_set;
  for (const auto& [image_id, dets] : predictions_by_image) {
    if (!known_ids.count(image_id)) unknown_images.push_back(image_id);
    for (const auto& det : dets) {
      if (det.class_id < 0 || det.class_id >= class_count) {
        bad_class_set.insert(det.class_id);
      }
    }
  }
  if (!unknown_images.empty()) {
    throw InputError("predictions reference image ids missing from the "
                     "manifest: " +
                     join(unknown_images, ", "));
  }
  if (!bad_class_set.empty()) {
    std::vector<int> bad(bad_class_set.begin(), bad_class_set.end());
    std::sort(bad.begin(), bad.end());
    std::string list;
    for (std::size_t i = 0; i < bad.size(); ++i) {
      if (i > 0) list += ", ";
      list += std::to_string(bad[i]);
    }
    throw InputError("predictions carry class ids outside the class table: " +
                     list);
  }

  std::vector<ImageSample> samples;
  samples.reserve(manifest.images.size());
  for (const auto& image : manifest.images) {
    ImageSample sample;
    sample.image_id = image.id;
    if (!image.label_path.empty()) {
      sample.gts =
          read_label_file(manifest.resolve_labels(image), class_count);
    }
    const auto it = predictions_by_image.find(image.id);
    if (it != predictions_by_image.end()) sample.preds = it->second;
    samples.push_back(std::move(sample));
  }

  const std::vector<double> thresholds = iou_spec.thresholds();
  EvalReport report;
  report.iou_spec = iou_spec;
  report.class_names = manifest.classes.names();
  report.interpolated_ap = options.interpolated;
  report.per_class =
      evaluate_classes(samples, class_count, thresholds.front(), options);
  for (const auto& entry : report.per_class) {
    if (entry.gt_count == 0) {
      report.classes_without_gt.push_back(entry.class_id);
    }
  }
  double sum = 0.0;
  for (const double threshold : thresholds) {
    const auto classes =
        threshold == thresholds.front()
            ? report.per_class
            : evaluate_classes(samples, class_count, threshold, options);
    const double value = map_of(classes);
    report.map_by_threshold.push_back({threshold, value});
    sum += value;
  }
  report.map_mean = sum / static_cast<double>(thresholds.size());
  report.timestamp = report_timestamp();
  return report;
}

namespace {

std::string format_threshold(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

}  // namespace

void write_report_text(std::ostream& out, const EvalReport& report) {
  out << "Evaluation report (" << report.timestamp << ")\n";
  if (report.iou_spec.is_range()) {
    out << "IoU thresholds: " << format_threshold(report.iou_spec.lo) << ":"
        << format_threshold(report.iou_spec.hi) << ":"
        << format_threshold(report.iou_spec.step) << "\n";
  } else {
    out << "IoU threshold: " << format_threshold(report.iou_spec.lo) << "\n";
  }
  if (report.confidence_threshold) {
    out << "Confidence threshold: " << *report.confidence_threshold << "\n";
  }
  if (report.interpolated_ap) {
    out << "AP mode: interpolated (precision envelope)\n";
  }
  out << "\n";

  std::size_t name_width = std::string("Class Name").size();
  for (const auto& name : report.class_names) {
    name_width = std::max(name_width, name.size());
  }
  out << std::left << std::setw(static_cast<int>(name_width) + 2)
      << "Class Name" << std::right << std::setw(8) << "GT" << std::setw(8)
      << "Preds" << std::setw(10) << "AP" << "\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& entry : report.per_class) {
    const std::string& name =
        report.class_names[static_cast<std::size_t>(entry.class_id)];
    out << std::left << std::setw(static_cast<int>(name_width) + 2) << name
        << std::right << std::setw(8) << entry.gt_count << std::setw(8)
        << entry.pred_count << std::setw(10);
    if (entry.ap) {
      out << *entry.ap;
    } else {
      out << "n/a";
    }
    out << "\n";
  }
  if (!report.classes_without_gt.empty()) {
    std::vector<std::string> names;
    for (const int id : report.classes_without_gt) {
      names.push_back(report.class_names[static_cast<std::size_t>(id)]);
    }
    out << "\nExcluded from mAP (no ground truth): " << join(names, ", ")
        << "\n";
  }
  out << "\n";
  for (const auto& row : report.map_by_threshold) {
    out << "mAP@" << format_threshold(row.iou_threshold) << " = "
        << std::setprecision(4) << row.map << "\n";
  }
  if (report.iou_spec.is_range()) {
    out << "mean mAP@[" << format_threshold(report.iou_spec.lo) << ":"
        << format_threshold(report.iou_spec.hi) << ":"
        << format_threshold(report.iou_spec.step) << "] = "
        << report.map_mean << "\n";
  }
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = EvalReport::kSchemaVersion;
  doc["timestamp"] = report.timestamp;
  std::vector<double> thresholds;
  for (const auto& row : report.map_by_threshold) {
    thresholds.push_back(row.iou_threshold);
  }
  doc["iou_thresholds"] = thresholds;
  if (report.confidence_threshold) {
    doc["confidence_threshold"] = *report.confidence_threshold;
  } else {
    doc["confidence_threshold"] = nullptr;
  }
  doc["interpolated_ap"] = report.interpolated_ap;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& entry : report.per_class) {
    nlohmann::ordered_json item;
    item["id"] = entry.class_id;
    item["name"] = report.class_names[static_cast<std::size_t>(entry.class_id)];
    item["gt_count"] = entry.gt_count;
    item["prediction_count"] = entry.pred_count;
    if (entry.ap) {
      item["ap"] = *entry.ap;
    } else {
      item["ap"] = nullptr;
    }
    classes.push_back(std::move(item));
  }
  doc["classes"] = std::move(classes);
  doc["classes_without_ground_truth"] = report.classes_without_gt;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.map_by_threshold) {
    rows.push_back({{"iou", row.iou_threshold}, {"map", row.map}});
  }
  doc["map_by_threshold"] = std::move(rows);
  doc["map_mean"] = report.map_mean;
  out << doc.dump(2) << "\n";
}

void write_pr_curve_csv(std::ostream& out, const PRCurve& curve) {
  out << "threshold,recall,precision\n";
  out << std::fixed << std::setprecision(9);
  for (const auto& point : curve.points) {
    out << point.threshold << ',' << point.recall << ',' << point.precision
        << "\n";
  }
}

}  // namespace detkit
