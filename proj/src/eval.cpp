#include "scenebal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scenebal {

double iou(const Box& a, const Box& b) {
    a.require_valid("iou");
    b.require_valid("iou");
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

MatchResult match_detections(const std::vector<Box>& gts, const std::vector<Detection>& dets,
                             double iou_threshold) {
    MatchResult r;
    r.detection_is_tp.assign(dets.size(), false);
    r.gt_matched.assign(gts.size(), false);

    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&dets](size_t a, size_t b) { return dets[a].score > dets[b].score; });

    for (size_t oi : order) {
        double best_iou = 0.0;
        long best_gt = -1;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (r.gt_matched[g]) continue;
            const double v = iou(gts[g], dets[oi].box);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best_gt = static_cast<long>(g);
            }
        }
        if (best_gt >= 0) {
            r.gt_matched[static_cast<size_t>(best_gt)] = true;
            r.detection_is_tp[oi] = true;
        }
    }
    return r;
}

RatePair precision_recall(long tp, long fp, long fn) {
    if (tp < 0 || fp < 0 || fn < 0) throw std::invalid_argument("precision_recall: negative counts");
    RatePair r;
    if (tp + fn == 0) {
        r.recall_undefined = true;
    } else {
        r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (tp + fp == 0) {
        r.precision_undefined = true;
    } else {
        r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    return r;
}

PRCurve pr_curve(const std::vector<Detection>& dets, const std::vector<bool>& det_is_tp,
                 long total_gts) {
    if (total_gts <= 0) throw std::invalid_argument("pr_curve: group has no ground truths");
    if (dets.size() != det_is_tp.size()) throw std::invalid_argument("pr_curve: flag list misaligned");

    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&dets](size_t a, size_t b) { return dets[a].score > dets[b].score; });

    PRCurve c;
    long tp = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (det_is_tp[order[rank]]) ++tp;
        c.recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gts));
        c.precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
        c.score.push_back(dets[order[rank]].score);
    }
    return c;
}

double average_precision(const PRCurve& curve) {
    const size_t n = curve.recall.size();
    if (n == 0) throw std::invalid_argument("average_precision: empty curve");

    // Monotone envelope: each precision replaced by the max at >= that recall.
    std::vector<double> env(curve.precision);
    for (size_t i = n - 1; i-- > 0;) env[i] = std::max(env[i], env[i + 1]);

    double ap = 0.0;
    double prev_recall = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ap += (curve.recall[i] - prev_recall) * env[i];
        prev_recall = curve.recall[i];
    }
    return ap;
}

namespace {

GroupReport score_group(const std::string& name, const std::vector<Detection>& dets,
                        const std::vector<bool>& flags, long total_gts) {
    GroupReport g;
    g.name = name;
    for (bool f : flags) (f ? g.tp : g.fp)++;
    g.fn = total_gts - g.tp;
    const RatePair rates = precision_recall(g.tp, g.fp, g.fn);
    g.recall = rates.recall;
    g.precision = rates.precision;
    g.undefined_rates = rates.recall_undefined || rates.precision_undefined;
    g.false_alarm_rate = 1.0 - g.precision;
    if (total_gts > 0 && !dets.empty()) {
        g.curve = pr_curve(dets, flags, total_gts);
        g.map = average_precision(g.curve);
    } else {
        g.map = 0.0;
        g.undefined_rates = true;
    }
    return g;
}

}  // namespace

const GroupReport& EvalReport::group(const std::string& name) const {
    if (name == combined.name) return combined;
    if (name == inshore.name) return inshore;
    if (name == offshore.name) return offshore;
    throw std::invalid_argument("no report group named '" + name + "'");
}

EvalReport evaluate(const std::map<std::string, Scene>& image_scenes,
                    const std::vector<GroundTruth>& gts,
                    const std::vector<Detection>& dets,
                    double iou_threshold) {
    for (const Detection& d : dets) {
        if (!image_scenes.count(d.image_id))
            throw std::invalid_argument("evaluate: detection references unknown image '" + d.image_id + "'");
        if (d.score < 0.0 || d.score > 1.0)
            throw std::invalid_argument("evaluate: score out of [0,1] for image '" + d.image_id + "'");
    }
    for (const GroundTruth& g : gts)
        if (!image_scenes.count(g.image_id))
            throw std::invalid_argument("evaluate: ground truth references unknown image '" + g.image_id + "'");

    // Per-image matching, computed once and reused by every group.
    std::map<std::string, std::vector<Box>> gt_by_image;
    for (const GroundTruth& g : gts) gt_by_image[g.image_id].push_back(g.box);
    std::map<std::string, std::vector<Detection>> det_by_image;
    for (const Detection& d : dets) det_by_image[d.image_id].push_back(d);

    std::vector<Detection> all_dets;
    std::vector<bool> all_flags;
    std::vector<Scene> det_scene;
    std::map<std::string, long> gt_count_by_scene{{"inshore", 0}, {"offshore", 0}, {"all", 0}};
    for (const auto& [id, boxes] : gt_by_image) {
        const Scene sc = image_scenes.at(id);
        gt_count_by_scene["all"] += static_cast<long>(boxes.size());
        if (sc == Scene::Inshore) gt_count_by_scene["inshore"] += static_cast<long>(boxes.size());
        if (sc == Scene::Offshore) gt_count_by_scene["offshore"] += static_cast<long>(boxes.size());
    }
    for (const auto& [id, image_dets] : det_by_image) {
        static const std::vector<Box> kNoBoxes;
        const auto it = gt_by_image.find(id);
        const MatchResult m = match_detections(it == gt_by_image.end() ? kNoBoxes : it->second,
                                               image_dets, iou_threshold);
        const Scene sc = image_scenes.at(id);
        for (size_t i = 0; i < image_dets.size(); ++i) {
            all_dets.push_back(image_dets[i]);
            all_flags.push_back(m.detection_is_tp[i]);
            det_scene.push_back(sc);
        }
    }

    auto filter = [&](Scene want, const std::string& name, long total) {
        std::vector<Detection> d;
        std::vector<bool> f;
        for (size_t i = 0; i < all_dets.size(); ++i) {
            if (want != Scene::Unknown && det_scene[i] != want) continue;
            d.push_back(all_dets[i]);
            f.push_back(all_flags[i]);
        }
        return score_group(name, d, f, total);
    };

    EvalReport report;
    report.iou_threshold = iou_threshold;
    report.combined = filter(Scene::Unknown, "inshore+offshore", gt_count_by_scene["all"]);
    report.inshore = filter(Scene::Inshore, "inshore", gt_count_by_scene["inshore"]);
    report.offshore = filter(Scene::Offshore, "offshore", gt_count_by_scene["offshore"]);
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    char line[160];
    os << "detection report (iou >= " << report.iou_threshold
       << ", duplicate detections on one ground truth count as false positives)\n";
    std::snprintf(line, sizeof(line), "%-18s %8s %10s %8s %8s %6s %6s %6s\n", "group", "recall",
                  "precision", "mAP", "Pf", "TP", "FP", "FN");
    os << line;
    for (const GroupReport* g : {&report.combined, &report.inshore, &report.offshore}) {
        std::snprintf(line, sizeof(line), "%-18s %7.2f%% %9.2f%% %7.2f%% %7.2f%% %6ld %6ld %6ld%s\n",
                      g->name.c_str(), 100.0 * g->recall, 100.0 * g->precision, 100.0 * g->map,
                      100.0 * g->false_alarm_rate, g->tp, g->fp, g->fn,
                      g->undefined_rates ? "  (0/0 reported as 0)" : "");
        os << line;
    }
    return os.str();
}

}  // namespace scenebal
