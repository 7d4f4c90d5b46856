#pragma once

#include <span>
#include <vector>

#include "gpb/ad/matrix.hpp"

namespace gpb::eval {

// Fraction of positions where preds == labels.
double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels);

// Unweighted mean over classes of one-vs-rest F1 = 2TP / (2TP + FP + FN); a
// class with no TP, FP or FN scores 0.
double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                std::size_t num_classes);

struct AurocResult {
  double value = 0.0;
  std::vector<std::size_t> skipped;  // classes without both positives and negatives
};

// One-vs-rest AUROC from the rank statistic (ties count ½), averaged over the
// classes that have both positives and negatives. Throws when none do.
AurocResult macro_auroc(const ad::Matrix& scores, std::span<const std::size_t> labels,
                        std::size_t num_classes);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation

  friend bool operator==(const Stat&, const Stat&) = default;
};
Stat summarize(std::span<const double> values);

}  // namespace gpb::eval
