#include "roga/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "roga/errors.hpp"

namespace roga {
namespace {

struct ClassCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels,
                         const char* metric) {
  if (scores.size() != labels.size()) {
    throw DimensionError(std::string(metric) + ": " + std::to_string(scores.size()) +
                         " scores but " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw InputError(std::string(metric) + ": empty input");
  ClassCounts counts;
  for (int y : labels) {
    if (y == 1) {
      ++counts.pos;
    } else if (y == 0) {
      ++counts.neg;
    } else {
      throw InputError(std::string(metric) + ": label " + std::to_string(y) + " is not 0 or 1");
    }
  }
  return counts;
}

void require_both_classes(const ClassCounts& c, const char* metric) {
  if (c.pos == 0 || c.neg == 0) {
    throw DegenerateInputError(std::string(metric) + " needs both classes (positives " +
                               std::to_string(c.pos) + ", negatives " + std::to_string(c.neg) +
                               ")");
  }
}

/// Indices ordered by descending score; equal scores keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels, "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] >= threshold ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "auc");
  require_both_classes(c, "auc");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based midranks of the positives.
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      pos_in_group += labels[order[j]] == 1 ? 1 : 0;
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    pos_rank_sum += midrank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double p = static_cast<double>(c.pos);
  const double n = static_cast<double>(c.neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "average_precision");
  if (c.pos == 0) throw DegenerateInputError("average_precision needs at least one positive");

  double sum = 0.0;
  std::size_t hits = 0;
  std::size_t rank = 0;
  for (std::size_t idx : descending_order(scores)) {
    ++rank;
    if (labels[idx] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return sum / static_cast<double>(c.pos);
}

double eer(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "eer");
  require_both_classes(c, "eer");

  const std::vector<std::size_t> order = descending_order(scores);
  const double p = static_cast<double>(c.pos);
  const double n = static_cast<double>(c.neg);

  // Operating point "predict positive iff score >= threshold", starting
  // above every score (FPR 0, FNR 1).
  double prev_fpr = 0.0;
  double prev_fnr = 1.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    const double fpr = static_cast<double>(fp) / n;
    const double fnr = static_cast<double>(c.pos - tp) / p;
    const double diff = fpr - fnr;
    if (diff >= 0.0) {
      if (diff == 0.0) return fpr;
      const double prev_diff = prev_fpr - prev_fnr;
      const double t = -prev_diff / (diff - prev_diff);
      return prev_fpr + t * (fpr - prev_fpr);
    }
    prev_fpr = fpr;
    prev_fnr = fnr;
  }
  return 1.0;  // unreachable: the last point has FPR 1, FNR 0
}

MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> labels,
                              double threshold) {
  const ClassCounts c = check_inputs(scores, labels, "compute_metrics");
  require_both_classes(c, "compute_metrics");
  MetricsReport r;
  r.acc = accuracy(scores, labels, threshold);
  r.auc = auc(scores, labels);
  r.ap = average_precision(scores, labels);
  r.eer = eer(scores, labels);
  r.n_pos = c.pos;
  r.n_neg = c.neg;
  return r;
}

}  // namespace roga
