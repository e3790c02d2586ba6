#include "lanefit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace lanefit {

PointAccuracy point_accuracy(const std::vector<double>& pred_lane,
                             const std::vector<double>& gt_lane, double threshold_px) {
    if (pred_lane.size() != gt_lane.size()) {
        throw MisalignedRows("prediction and ground truth use different row grids");
    }
    PointAccuracy pa;
    for (std::size_t r = 0; r < gt_lane.size(); ++r) {
        if (gt_lane[r] == SceneAnnotation::kAbsent) continue;
        ++pa.total;
        if (pred_lane[r] != SceneAnnotation::kAbsent &&
            std::abs(pred_lane[r] - gt_lane[r]) < threshold_px) {
            ++pa.correct;
        }
    }
    return pa;
}

namespace {

// Optimal assignment maximizing total correct points; lane counts are tiny,
// so brute-force over permutations of the smaller side.
std::vector<int> best_matching(const std::vector<std::vector<PointAccuracy>>& table) {
    const std::size_t n_pred = table.size();
    const std::size_t n_gt = n_pred ? table[0].size() : 0;

    // Permute the larger side so every injection of the smaller side is seen.
    std::vector<int> order(std::max(n_pred, n_gt));
    std::iota(order.begin(), order.end(), 0);
    const bool permute_preds = n_pred > n_gt;

    std::vector<int> best_assign(n_pred, -1);
    double best_score = -1.0;
    std::vector<int> assign(n_pred, -1);
    do {
        std::fill(assign.begin(), assign.end(), -1);
        double score = 0.0;
        for (std::size_t i = 0; i < std::min(n_pred, n_gt); ++i) {
            const std::size_t p = permute_preds ? order[i] : i;
            const std::size_t g = permute_preds ? i : order[i];
            assign[p] = static_cast<int>(g);
            score += static_cast<double>(table[p][g].correct);
        }
        if (score > best_score) {
            best_score = score;
            best_assign = assign;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return best_assign;
}

}  // namespace

MetricsReport lane_metrics(const std::vector<SceneAnnotation>& pred_set,
                           const std::vector<SceneAnnotation>& gt_set,
                           const MetricsConfig& cfg) {
    std::map<std::string, const SceneAnnotation*> preds;
    for (const auto& rec : pred_set) preds[rec.raw_file] = &rec;

    MetricsReport report;
    report.point_threshold_px = cfg.point_threshold_px;
    report.lane_match_fraction = cfg.lane_match_fraction;

    double acc_sum = 0.0;
    std::size_t acc_images = 0;
    std::size_t false_total = 0, pred_total = 0, missed_total = 0, gt_total = 0;

    for (const SceneAnnotation& gt : gt_set) {
        ImageMetrics im;
        im.raw_file = gt.raw_file;
        im.gt_lanes = gt.lanes.size();

        const auto it = preds.find(gt.raw_file);
        if (it == preds.end()) {
            if (cfg.strict_missing_images) {
                throw MissingImage("no prediction record for " + gt.raw_file);
            }
            report.warnings.push_back("no prediction for " + gt.raw_file +
                                      "; all its lanes count as missed");
            im.missed_lanes = gt.lanes.size();
            for (const auto& lane : gt.lanes) {
                for (double x : lane) im.gt_points += (x != SceneAnnotation::kAbsent);
            }
            if (im.gt_points > 0) ++acc_images;  // contributes 0 to the mean
            missed_total += im.missed_lanes;
            gt_total += im.gt_lanes;
            report.per_image.push_back(std::move(im));
            continue;
        }

        const SceneAnnotation& pred = *it->second;
        im.pred_lanes = pred.lanes.size();
        if (pred.h_samples != gt.h_samples) {
            throw MisalignedRows("prediction rows differ from gt rows for " + gt.raw_file);
        }
        std::vector<std::vector<PointAccuracy>> table(pred.lanes.size());
        for (std::size_t p = 0; p < pred.lanes.size(); ++p) {
            for (const auto& gt_lane : gt.lanes) {
                table[p].push_back(point_accuracy(pred.lanes[p], gt_lane,
                                                  cfg.point_threshold_px));
            }
        }

        std::vector<bool> pred_correct(pred.lanes.size(), false);
        std::vector<bool> gt_covered(gt.lanes.size(), false);
        std::size_t c_im = 0;
        if (!pred.lanes.empty() && !gt.lanes.empty()) {
            const auto assign = best_matching(table);
            for (std::size_t p = 0; p < pred.lanes.size(); ++p) {
                if (assign[p] < 0) continue;
                const PointAccuracy& pa = table[p][assign[p]];
                c_im += pa.correct;
                const double ratio =
                    pa.total ? static_cast<double>(pa.correct) / pa.total : 0.0;
                if (ratio >= cfg.lane_match_fraction) {
                    pred_correct[p] = true;
                    gt_covered[assign[p]] = true;
                }
            }
        }

        std::size_t s_im = 0;
        for (const auto& lane : gt.lanes) {
            for (double x : lane) s_im += (x != SceneAnnotation::kAbsent);
        }
        im.correct_points = c_im;
        im.gt_points = s_im;
        for (bool ok : pred_correct) im.false_lanes += !ok;
        for (bool ok : gt_covered) im.missed_lanes += !ok;

        if (s_im == 0) {
            report.warnings.push_back("image " + gt.raw_file +
                                      " has no gt points; excluded from acc");
        } else {
            acc_sum += static_cast<double>(c_im) / static_cast<double>(s_im);
            ++acc_images;
        }
        false_total += im.false_lanes;
        pred_total += im.pred_lanes;
        missed_total += im.missed_lanes;
        gt_total += im.gt_lanes;
        report.per_image.push_back(std::move(im));
    }

    report.acc = acc_images ? acc_sum / static_cast<double>(acc_images) : 0.0;
    if (pred_total == 0) {
        report.fp = 0.0;
        if (gt_total > 0) report.warnings.push_back("no predicted lanes; FP defined as 0");
    } else {
        report.fp = static_cast<double>(false_total) / static_cast<double>(pred_total);
    }
    report.fn = gt_total ? static_cast<double>(missed_total) / static_cast<double>(gt_total) : 0.0;
    return report;
}

}  // namespace lanefit
