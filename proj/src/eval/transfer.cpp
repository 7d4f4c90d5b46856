#include "gpb/eval/transfer.hpp"

#include <cmath>
#include <cstdio>

#include "gpb/error.hpp"

namespace gpb::eval {

std::string to_string(Arrow a) {
  switch (a) {
    case Arrow::up: return "↑";
    case Arrow::down: return "↓";
    case Arrow::equal: return "=";
  }
  return "?";
}

TransferReport transfer_table(std::span<const std::string> datasets,
                              std::span<const double> supervised,
                              std::span<const double> candidate) {
  if (datasets.size() != supervised.size() || datasets.size() != candidate.size())
    throw DimensionError("transfer_table: dataset, supervised and candidate lists differ in length");
  if (datasets.empty()) throw InvalidArgument("transfer_table over no datasets");
  TransferReport r;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    TransferRow row{datasets[i], supervised[i], candidate[i], Arrow::equal};
    const double delta = candidate[i] - supervised[i];
    if (std::abs(delta) >= kTransferTolerance) row.arrow = delta > 0 ? Arrow::up : Arrow::down;
    r.down += row.arrow == Arrow::down;
    r.rows.push_back(std::move(row));
  }
  r.negative_rate = static_cast<double>(r.down) / static_cast<double>(r.rows.size());
  return r;
}

std::string format_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("rate must lie in [0, 1]");
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f%%", std::round(100.0 * rate));
  return buf;
}

}  // namespace gpb::eval
