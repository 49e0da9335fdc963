#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthweight/corpus.hpp"
#include "synthweight/encoder.hpp"

namespace synthweight {

/// Product-moment correlation. Returns 0 when either side has zero
/// variance (and sets *degenerate when given).
double pearson(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);

/// 1-based ranks; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);

struct BinaryCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    double f1() const;        // 2tp / (2tp + fp + fn); 0 when tp == 0
    double accuracy() const;  // (tp + tn) / total
};

/// Confusion counts for the rule pred >= threshold => positive.
BinaryCounts count_at(std::span<const double> preds, std::span<const double> labels, double threshold);

/// Candidate thresholds: midpoints between adjacent distinct predictions plus
/// min - 1e-6 and max + 1e-6, ascending.
std::vector<double> threshold_candidates(std::span<const double> preds);

/// F1-maximizing candidate threshold; ties go to the smallest threshold.
/// Labels must be 0/1 with both present.
double select_threshold(std::span<const double> preds, std::span<const double> labels);

struct EvalReport {
    std::size_t count = 0;
    double pearson = 0.0;
    double spearman = 0.0;
    std::optional<double> threshold;
    std::optional<double> accuracy;  // percent
    std::optional<double> f1;        // percent
    /// e.g. "zero variance in predictions"
    std::vector<std::string> diagnostics;
};

bool labels_are_binary(std::span<const double> labels);

/// Report from raw predictions. When labels are binary the threshold comes
/// from the dev predictions/labels, which are then required.
EvalReport evaluate_predictions(std::span<const double> preds, std::span<const double> labels,
                                std::span<const double> dev_preds = {},
                                std::span<const double> dev_labels = {});

/// Predicts every pair with the encoder and reports. `dev_pairs` is only
/// read for threshold tuning and must be given when the labels are binary.
EvalReport evaluate(const EncoderModel& model, const std::vector<PairedExample>& pairs,
                    const std::vector<PairedExample>* dev_pairs = nullptr);

std::string eval_to_json(const EvalReport& report);
/// One line: "n=... pearson=... spearman=..." plus threshold/accuracy/f1 when present.
std::string eval_summary_line(const EvalReport& report);

}  // namespace synthweight
