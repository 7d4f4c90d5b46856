#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpb/bench/runner.hpp"

namespace gpb::bench {

// Rows from <dir>/runs/*/row.csv in directory-name order.
std::vector<ResultRow> collect_rows(const std::filesystem::path& dir);

std::string render_csv(const std::vector<ResultRow>& rows);
// Per (method, pretext, dataset, k) group: seed count and mean/std of every
// metric; plus negative-transfer tables against "supervised" rows.
std::string render_json(const std::vector<ResultRow>& rows);
std::string render_markdown(const std::vector<ResultRow>& rows);

}  // namespace gpb::bench
