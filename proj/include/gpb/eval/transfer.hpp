#pragma once

#include <span>
#include <string>
#include <vector>

namespace gpb::eval {

enum class Arrow { up, down, equal };
std::string to_string(Arrow a);  // "↑", "↓", "="

struct TransferRow {
  std::string dataset;
  double supervised = 0.0;
  double candidate = 0.0;
  Arrow arrow = Arrow::equal;
};

struct TransferReport {
  std::vector<TransferRow> rows;
  std::size_t down = 0;
  double negative_rate = 0.0;  // down / rows
};

inline constexpr double kTransferTolerance = 1e-9;

// Compares mean accuracies per dataset; |Δ| < 1e-9 counts as "=".
TransferReport transfer_table(std::span<const std::string> datasets,
                              std::span<const double> supervised,
                              std::span<const double> candidate);

// Whole percent with one decimal place, e.g. 3/7 -> "43.0%".
std::string format_rate(double rate);

}  // namespace gpb::eval
