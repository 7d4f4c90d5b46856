#include "gpb/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpb/error.hpp"

namespace gpb::eval {

namespace {

void check_pair(std::span<const std::size_t> preds, std::span<const std::size_t> labels) {
  if (preds.size() != labels.size()) throw DimensionError("predictions and labels differ in length");
  if (labels.empty()) throw InvalidArgument("metric over an empty set");
}

}  // namespace

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels) {
  check_pair(preds, labels);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

double macro_f1(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                std::size_t num_classes) {
  check_pair(preds, labels);
  if (num_classes == 0) throw InvalidArgument("macro_f1 needs at least one class");
  std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= num_classes || labels[i] >= num_classes)
      throw InvalidArgument("class index out of range in macro_f1");
    if (preds[i] == labels[i]) {
      tp[preds[i]]++;
    } else {
      fp[preds[i]]++;
      fn[labels[i]]++;
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom > 0) total += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  return total / static_cast<double>(num_classes);
}

AurocResult macro_auroc(const ad::Matrix& scores, std::span<const std::size_t> labels,
                        std::size_t num_classes) {
  if (scores.rows() != labels.size()) throw DimensionError("score rows and labels differ in length");
  if (scores.cols() != num_classes) throw DimensionError("score columns differ from class count");
  if (labels.empty()) throw InvalidArgument("metric over an empty set");
  if (!scores.all_finite()) throw InvalidArgument("macro_auroc: non-finite score");
  for (auto l : labels)
    if (l >= num_classes) throw InvalidArgument("class index out of range in macro_auroc");

  const std::size_t n = labels.size();
  AurocResult out;
  double total = 0.0;
  std::size_t used = 0;
  std::vector<std::size_t> order(n);
  std::vector<double> rank(n);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
    if (pos == 0 || pos == n) {
      out.skipped.push_back(c);
      continue;
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores(a, c) < scores(b, c); });
    // average 1-based ranks over tie groups
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && scores(order[j + 1], c) == scores(order[i], c)) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t q = i; q <= j; ++q) rank[order[q]] = avg;
      i = j + 1;
    }
    double pos_rank = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) pos_rank += rank[i];
    const double p = static_cast<double>(pos), q = static_cast<double>(n - pos);
    total += (pos_rank - p * (p + 1.0) / 2.0) / (p * q);
    ++used;
  }
  if (used == 0) throw InvalidArgument("macro_auroc: no class has both positives and negatives");
  out.value = total / static_cast<double>(used);
  return out;
}

Stat summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("summarize over no values");
  const double n = static_cast<double>(values.size());
  Stat s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

}  // namespace gpb::eval
