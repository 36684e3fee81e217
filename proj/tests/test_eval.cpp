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

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace detkit;

namespace {

MatchResult fixture_match() {
  // Flags by descending confidence 0.9, 0.8, 0.7 = TP, FP, TP over 2 GT.
  MatchResult match;
  match.total_gt = 2;
  match.matches = {
      PredictionMatch{0.9, true, 0},
      PredictionMatch{0.8, false, std::nullopt},
      PredictionMatch{0.7, true, 1},
  };
  return match;
}

}  // namespace

TEST_CASE("perfect single prediction is a true positive") {
  const GroundTruthBox gt{0, BBox{0.2, 0.2, 0.5, 0.5}};
  const Detection pred{0, gt.bbox, 0.9, 0};
  const auto result = match_detections({pred}, {gt}, 0.5);
  REQUIRE(result.matches.size() == 1);
  CHECK(result.matches[0].is_tp);
  CHECK(result.matches[0].gt_index == 0);
  CHECK(result.total_gt == 1);
}

TEST_CASE("one ground truth matches at most one prediction") {
  const GroundTruthBox gt{0, BBox{0.2, 0.2, 0.5, 0.5}};
  const Detection strong{0, BBox{0.21, 0.21, 0.51, 0.51}, 0.9, 0};
  const Detection weak{0, BBox{0.19, 0.19, 0.49, 0.49}, 0.6, 0};
  const auto result = match_detections({weak, strong}, {gt}, 0.5);
  REQUIRE(result.matches.size() == 2);
  // matches are ranked by confidence: strong first
  CHECK(result.matches[0].confidence == doctest::Approx(0.9));
  CHECK(result.matches[0].is_tp);
  CHECK_FALSE(result.matches[1].is_tp);
}

TEST_CASE("IoU below the matching threshold is a false positive") {
  // contained box: IoU = 0.196 / 0.4 = 0.49 against threshold 0.5
  const GroundTruthBox gt{0, BBox{0.0, 0.0, 0.5, 0.4}};
  const Detection pred{0, BBox{0.0, 0.0, 0.5, 0.196}, 1.0, 0};
  const double v = iou(pred.bbox, gt.bbox);
  REQUIRE(v == doctest::Approx(0.49).epsilon(1e-3));
  REQUIRE(v < 0.5);
  const auto result = match_detections({pred}, {gt}, 0.5);
  CHECK_FALSE(result.matches[0].is_tp);
}

TEST_CASE("IoU ties go to the lowest ground-truth index") {
  // dyadic coordinates so both overlaps are bit-identical
  const GroundTruthBox gt_a{0, BBox{0.0, 0.0, 0.25, 0.25}};
  const GroundTruthBox gt_b{0, BBox{0.125, 0.0, 0.375, 0.25}};
  const Detection pred{0, BBox{0.0625, 0.0, 0.3125, 0.25}, 0.9, 0};
  REQUIRE(iou(pred.bbox, gt_a.bbox) == iou(pred.bbox, gt_b.bbox));
  const auto result = match_detections({pred}, {gt_a, gt_b}, 0.5);
  REQUIRE(result.matches[0].is_tp);
  CHECK(result.matches[0].gt_index == 0);
}

TEST_CASE("pr_curve of the hand-tallied fixture") {
  const PRCurve curve = pr_curve(fixture_match());
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].threshold == doctest::Approx(0.7));
  CHECK(curve.points[0].recall == doctest::Approx(1.0));
  CHECK(curve.points[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(curve.points[1].threshold == doctest::Approx(0.8));
  CHECK(curve.points[1].recall == doctest::Approx(0.5));
  CHECK(curve.points[1].precision == doctest::Approx(0.5));
  CHECK(curve.points[2].threshold == doctest::Approx(0.9));
  CHECK(curve.points[2].recall == doctest::Approx(0.5));
  CHECK(curve.points[2].precision == doctest::Approx(1.0));
  CHECK_FALSE(curve.undefined_recall);
}

TEST_CASE("average precision of the fixture is exactly the rectangle sum") {
  const double ap = average_precision(pr_curve(fixture_match()));
  CHECK(std::abs(ap - 5.0 / 6.0) <= 1e-12);
}

TEST_CASE("all-TP curve has precision one everywhere") {
  MatchResult match;
  match.total_gt = 3;
  match.matches = {PredictionMatch{0.9, true, 0}, PredictionMatch{0.8, true, 1},
                   PredictionMatch{0.7, true, 2}};
  const PRCurve curve = pr_curve(match);
  for (const auto& point : curve.points) {
    CHECK(point.precision == 1.0);
  }
  CHECK(curve.points.front().recall == 1.0);
  CHECK(average_precision(curve) == 1.0);
}

TEST_CASE("no predictions yield an empty curve and AP zero") {
  MatchResult match;
  match.total_gt = 4;
  const PRCurve curve = pr_curve(match);
  CHECK(curve.points.empty());
  CHECK(average_precision(curve) == 0.0);
}

TEST_CASE("zero ground truth flags undefined recall") {
  MatchResult match;
  match.total_gt = 0;
  match.matches = {PredictionMatch{0.9, false, std::nullopt}};
  CHECK(pr_curve(match).undefined_recall);
}

TEST_CASE("duplicate confidences collapse into one curve point") {
  MatchResult match;
  match.total_gt = 2;
  match.matches = {PredictionMatch{0.8, true, 0}, PredictionMatch{0.8, false, std::nullopt},
                   PredictionMatch{0.8, true, 1}};
  const PRCurve curve = pr_curve(match);
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].recall == doctest::Approx(1.0));
  CHECK(curve.points[0].precision == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("mean_average_precision") {
  CHECK(mean_average_precision({1.0, 1.0, 1.0}) == 1.0);
  CHECK(mean_average_precision({0.8, 0.4}) == doctest::Approx(0.6));
  CHECK_THROWS_AS(mean_average_precision({}), UndefinedMetricError);
}

TEST_CASE("AP pipeline equals the exhaustive oracle on random instances") {
  std::mt19937 rng(61);
  std::uniform_int_distribution<int> gt_dist(1, 5);
  std::uniform_int_distribution<int> pred_dist(0, 8);
  for (int round = 0; round < 300; ++round) {
    std::vector<GroundTruthBox> gts;
    const int n_gt = gt_dist(rng);
    for (int i = 0; i < n_gt; ++i) {
      gts.push_back({0, testing::random_bbox(rng)});
    }
    std::vector<Detection> preds;
    const int n_pred = pred_dist(rng);
    for (int i = 0; i < n_pred; ++i) {
      auto det = testing::random_detection(rng, 1, 1);
      det.class_id = 0;
      preds.push_back(det);
    }
    const double expected = testing::ap_oracle(preds, gts, 0.5);
    const double actual =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    CHECK(std::abs(actual - expected) <= 1e-9);
  }
}

TEST_CASE("AP is invariant under monotone confidence rescaling") {
  std::mt19937 rng(71);
  for (int round = 0; round < 100; ++round) {
    std::vector<GroundTruthBox> gts;
    for (int i = 0; i < 4; ++i) gts.push_back({0, testing::random_bbox(rng)});
    std::vector<Detection> preds;
    for (int i = 0; i < 6; ++i) {
      auto det = testing::random_detection(rng, 1, 1);
      det.class_id = 0;
      preds.push_back(det);
    }
    const double before =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    for (auto& det : preds) {
      det.confidence = 0.1 + 0.8 * det.confidence * det.confidence;
    }
    const double after =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    CHECK(std::abs(after - before) <= 1e-12);
  }
}

TEST_CASE("a trailing false positive never increases AP") {
  std::mt19937 rng(73);
  for (int round = 0; round < 100; ++round) {
    std::vector<GroundTruthBox> gts;
    for (int i = 0; i < 3; ++i) gts.push_back({0, testing::random_bbox(rng)});
    std::vector<Detection> preds;
    for (int i = 0; i < 5; ++i) {
      auto det = testing::random_detection(rng, 1, 1);
      det.class_id = 0;
      det.confidence = 0.2 + det.confidence * 0.8;  // keep headroom below
      preds.push_back(det);
    }
    const double before =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    // a far-away box below every existing confidence
    preds.push_back(Detection{0, BBox{0.0, 0.0, 0.001, 0.001}, 0.01, 0});
    const double after =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("a top-ranked new true positive never decreases AP") {
  std::mt19937 rng(79);
  for (int round = 0; round < 100; ++round) {
    std::vector<GroundTruthBox> gts;
    for (int i = 0; i < 3; ++i) gts.push_back({0, testing::random_bbox(rng)});
    // an extra GT in a far corner that no random box is near
    gts.push_back({0, BBox{0.98, 0.98, 1.0, 1.0}});
    std::vector<Detection> preds;
    for (int i = 0; i < 5; ++i) {
      auto det = testing::random_detection(rng, 1, 1);
      det.class_id = 0;
      det.confidence = det.confidence * 0.9;  // keep headroom above
      det.bbox = BBox{det.bbox.x_min * 0.9, det.bbox.y_min * 0.9,
                      det.bbox.x_max * 0.9, det.bbox.y_max * 0.9};
      preds.push_back(det);
    }
    const double before =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    preds.push_back(Detection{0, BBox{0.98, 0.98, 1.0, 1.0}, 1.0, 0});
    const double after =
        average_precision(pr_curve(match_detections(preds, gts, 0.5)));
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("interpolated mode stays within [0,1] and is optional") {
  const PRCurve curve = pr_curve(fixture_match());
  ApOptions interpolated;
  interpolated.interpolated = true;
  const double envelope_ap = average_precision(curve, interpolated);
  CHECK(envelope_ap >= 0.0);
  CHECK(envelope_ap <= 1.0);
  // default mode is the rectangle sum, not the envelope
  CHECK(average_precision(curve) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("mAP equals AP for a single included class") {
  std::vector<ImageSample> samples(1);
  samples[0].gts = {GroundTruthBox{0, BBox{0.1, 0.1, 0.4, 0.4}}};
  samples[0].preds = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
  const auto classes = evaluate_classes(samples, 1, 0.5);
  CHECK(map_of(classes) == *classes[0].ap);
}

TEST_CASE("per-class pooling spans images") {
  std::vector<ImageSample> samples(2);
  samples[0].gts = {GroundTruthBox{0, BBox{0.1, 0.1, 0.4, 0.4}}};
  samples[0].preds = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
  samples[1].gts = {GroundTruthBox{0, BBox{0.5, 0.5, 0.8, 0.8}}};
  samples[1].preds = {Detection{0, BBox{0.2, 0.2, 0.3, 0.3}, 0.95, 0}};
  const auto classes = evaluate_classes(samples, 1, 0.5);
  CHECK(classes[0].gt_count == 2);
  CHECK(classes[0].pred_count == 2);
  // top-ranked prediction (0.95) is a FP, the 0.9 one a TP:
  // AP = (0.5 - 0) * 0.5 = 0.25
  CHECK(*classes[0].ap == doctest::Approx(0.25));
}

TEST_CASE("classes without ground truth are excluded from the mean") {
  std::vector<ImageSample> samples(1);
  samples[0].gts = {GroundTruthBox{0, BBox{0.1, 0.1, 0.4, 0.4}}};
  samples[0].preds = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0},
                      Detection{1, BBox{0.6, 0.6, 0.9, 0.9}, 0.9, 0}};
  const auto classes = evaluate_classes(samples, 2, 0.5);
  CHECK(classes[0].ap.has_value());
  CHECK_FALSE(classes[1].ap.has_value());
  CHECK(map_of(classes) == *classes[0].ap);
}

TEST_CASE("iou spec thresholds") {
  CHECK(IouSpec::single(0.5).thresholds() == std::vector<double>{0.5});
  const auto sweep = IouSpec::range(0.5, 0.95, 0.05).thresholds();
  REQUIRE(sweep.size() == 10);
  CHECK(sweep.front() == doctest::Approx(0.5));
  CHECK(sweep.back() == doctest::Approx(0.95));
  CHECK_THROWS_AS(IouSpec::range(0.9, 0.5, 0.05).validate(), InputError);
  CHECK_THROWS_AS(IouSpec::range(0.5, 0.9, 0.0).validate(), InputError);
}

TEST_CASE("map over a degenerate range equals the single-threshold value") {
  std::vector<ImageSample> samples(1);
  samples[0].gts = {GroundTruthBox{0, BBox{0.1, 0.1, 0.4, 0.4}}};
  samples[0].preds = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
  const auto result = map_over_iou_range(samples, 1, 0.5, 0.5, 0.05);
  REQUIRE(result.per_threshold.size() == 1);
  CHECK(result.mean == map_of(evaluate_classes(samples, 1, 0.5)));
}

TEST_CASE("a jittered detector never beats its own mAP@0.5 over the range") {
  std::mt19937 rng(83);
  std::vector<ImageSample> samples(10);
  for (auto& sample : samples) {
    for (int i = 0; i < 4; ++i) {
      const BBox gt = testing::random_bbox(rng);
      sample.gts.push_back({0, gt});
      std::uniform_real_distribution<double> jitter(-0.02, 0.02);
      BBox noisy{gt.x_min + jitter(rng), gt.y_min + jitter(rng),
                 gt.x_max + jitter(rng), gt.y_max + jitter(rng)};
      if (noisy.x_min > noisy.x_max) std::swap(noisy.x_min, noisy.x_max);
      if (noisy.y_min > noisy.y_max) std::swap(noisy.y_min, noisy.y_max);
      sample.preds.push_back({0, clip_to_unit(noisy), 0.5 + 0.4 * iou(gt, noisy), 0});
    }
  }
  const auto result = map_over_iou_range(samples, 1, 0.5, 0.95, 0.05);
  CHECK(result.mean <= result.per_threshold.front().map + 1e-12);
}

TEST_CASE("evaluate_dataset end to end") {
  testing::TempDir tmp;
  std::filesystem::create_directories(tmp.path() / "labels");
  std::ofstream manifest_out(tmp.path() / "manifest.json");
  manifest_out << R"({"classes": ["Car", "Bus"], "images": [
    {"id": "a", "width": 100, "height": 100, "labels": "labels/a.txt"},
    {"id": "b", "width": 100, "height": 100, "labels": "labels/b.txt"}
  ]})";
  manifest_out.close();
  write_label_file(tmp.path() / "labels/a.txt",
                   {GroundTruthBox{0, BBox{0.1, 0.1, 0.4, 0.4}}});
  write_label_file(tmp.path() / "labels/b.txt",
                   {GroundTruthBox{1, BBox{0.5, 0.5, 0.9, 0.9}}});
  const auto manifest = load_manifest(tmp.path() / "manifest.json");

  SUBCASE("perfect predictions give mAP one") {
    std::map<std::string, std::vector<Detection>> preds;
    preds["a"] = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
    preds["b"] = {Detection{1, BBox{0.5, 0.5, 0.9, 0.9}, 0.8, 0}};
    const auto report =
        evaluate_dataset(manifest, preds, IouSpec::single(0.5));
    CHECK(report.map_by_threshold[0].map == 1.0);
    CHECK(report.classes_without_gt.empty());
  }

  SUBCASE("empty prediction set gives mAP zero") {
    const auto report =
        evaluate_dataset(manifest, {}, IouSpec::single(0.5));
    CHECK(report.map_by_threshold[0].map == 0.0);
  }

  SUBCASE("unknown image ids are listed in the error") {
    std::map<std::string, std::vector<Detection>> preds;
    preds["zz"] = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
    CHECK_THROWS_WITH_AS(
        evaluate_dataset(manifest, preds, IouSpec::single(0.5)),
        doctest::Contains("zz"), InputError);
  }

  SUBCASE("unknown class ids are rejected") {
    std::map<std::string, std::vector<Detection>> preds;
    preds["a"] = {Detection{7, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
    CHECK_THROWS_AS(evaluate_dataset(manifest, preds, IouSpec::single(0.5)),
                    InputError);
  }

  SUBCASE("report serializes to text and json") {
    std::map<std::string, std::vector<Detection>> preds;
    preds["a"] = {Detection{0, BBox{0.1, 0.1, 0.4, 0.4}, 0.9, 0}};
    const auto report =
        evaluate_dataset(manifest, preds, IouSpec::range(0.5, 0.6, 0.05));
    std::ostringstream text;
    write_report_text(text, report);
    CHECK(text.str().find("Car") != std::string::npos);
    CHECK(text.str().find("mAP@0.50") != std::string::npos);
    std::ostringstream json_text;
    write_report_json(json_text, report);
    CHECK(json_text.str().find("\"schema_version\": 1") != std::string::npos);
    CHECK(json_text.str().find("\"map_by_threshold\"") != std::string::npos);
  }
}

TEST_CASE("pr curve csv has the documented header") {
  std::ostringstream out;
  write_pr_curve_csv(out, pr_curve(fixture_match()));
  CHECK(out.str().rfind("threshold,recall,precision\n", 0) == 0);
}
