#pragma once

#include "scenebal/box.hpp"
#include "scenebal/scene.hpp"

#include <map>
#include <string>
#include <vector>

namespace scenebal {

struct Detection {
    std::string image_id;
    Box box;
    double score = 0.0;  // in [0,1]
};

struct GroundTruth {
    std::string image_id;
    Box box;
};

double iou(const Box& a, const Box& b);

struct MatchResult {
    std::vector<bool> detection_is_tp;  // aligned with the detections passed in
    std::vector<bool> gt_matched;       // aligned with the ground truths passed in
};

// Greedy score-descending matching: each detection claims the unmatched ground
// truth of highest IoU >= threshold; the rest are false positives. Ties in
// score keep input order.
MatchResult match_detections(const std::vector<Box>& gts, const std::vector<Detection>& dets,
                             double iou_threshold = 0.5);

struct RatePair {
    double recall = 0.0;
    double precision = 0.0;
    bool recall_undefined = false;     // 0/0, reported as 0
    bool precision_undefined = false;
};

RatePair precision_recall(long tp, long fp, long fn);

struct PRCurve {
    std::vector<double> recall;
    std::vector<double> precision;
    std::vector<double> score;  // threshold producing each point
};

// One cumulative (R, P) point per detection over the global descending-score
// ranking; recall denominator is the group's total ground-truth count.
PRCurve pr_curve(const std::vector<Detection>& dets, const std::vector<bool>& det_is_tp,
                 long total_gts);

// Area under the monotone precision envelope (all-point interpolation).
double average_precision(const PRCurve& curve);

struct GroupReport {
    std::string name;
    long tp = 0, fp = 0, fn = 0;
    double recall = 0.0, precision = 0.0, map = 0.0;
    double false_alarm_rate = 0.0;  // identically 1 - precision
    bool undefined_rates = false;   // some 0/0 was reported as 0
    PRCurve curve;
};

struct EvalReport {
    double iou_threshold = 0.5;
    GroupReport combined;
    GroupReport inshore;
    GroupReport offshore;

    const GroupReport& group(const std::string& name) const;
};

// Scores detections against ground truths, stratified into the
// combined / inshore / offshore groups by each image's scene label.
// Single class, so the mAP column is the AP of the group curve.
EvalReport evaluate(const std::map<std::string, Scene>& image_scenes,
                    const std::vector<GroundTruth>& gts,
                    const std::vector<Detection>& dets,
                    double iou_threshold = 0.5);

std::string format_report(const EvalReport& report);

}  // namespace scenebal
