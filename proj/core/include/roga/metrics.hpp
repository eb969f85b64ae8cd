#pragma once

#include <cstddef>
#include <span>

namespace roga {

struct MetricsReport {
  double acc = 0.0;
  double auc = 0.0;
  double ap = 0.0;
  double eer = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Fraction of examples where (score >= threshold) equals the label.
/// Ties with the threshold predict the positive class.
double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold = 0.5);

/// Mann-Whitney AUC via midranks: the fraction of (positive, negative)
/// pairs ordered correctly, ties counted as one half.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Step-wise average precision over positives in descending score order;
/// equal scores keep their input order.
double average_precision(std::span<const double> scores, std::span<const int> labels);

/// Equal error rate from a sweep over the distinct scores, interpolating
/// linearly where FPR - FNR changes sign.
double eer(std::span<const double> scores, std::span<const int> labels);

/// All four metrics, accuracy at `threshold`.
MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> labels,
                              double threshold = 0.5);

}  // namespace roga
