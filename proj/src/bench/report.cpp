#include "gpb/bench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "gpb/error.hpp"
#include "gpb/eval/metrics.hpp"
#include "gpb/eval/transfer.hpp"

namespace gpb::bench {

using nlohmann::json;

namespace {

struct Group {
  std::string method, pretext, dataset, level;
  std::size_t k = 0;
  std::vector<const ResultRow*> rows;

  eval::Stat stat(double ResultRow::*field) const {
    std::vector<double> v;
    for (const auto* r : rows) v.push_back(r->*field);
    return eval::summarize(v);
  }
};

std::vector<Group> group_rows(const std::vector<ResultRow>& rows) {
  std::vector<Group> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.method == r.method && g.pretext == r.pretext && g.dataset == r.dataset && g.level == r.level &&
             g.k == r.k;
    });
    if (it == groups.end()) {
      groups.push_back({r.method, r.pretext, r.dataset, r.level, r.k, {}});
      it = groups.end() - 1;
    }
    it->rows.push_back(&r);
  }
  return groups;
}

struct Transfer {
  const Group* candidate;
  std::vector<std::string> datasets;
  eval::TransferReport report;
};

std::vector<Transfer> transfers(const std::vector<Group>& groups) {
  std::vector<Transfer> out;
  std::vector<std::pair<std::string, std::string>> seen;
  for (const auto& g : groups) {
    if (g.method == "supervised") continue;
    const auto key = std::make_pair(g.method, g.pretext);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    std::vector<std::string> names;
    std::vector<double> sup, cand;
    for (const auto& c : groups) {
      if (c.method != g.method || c.pretext != g.pretext) continue;
      for (const auto& s : groups)
        if (s.method == "supervised" && s.dataset == c.dataset && s.level == c.level && s.k == c.k) {
          names.push_back(c.dataset);
          sup.push_back(s.stat(&ResultRow::accuracy).mean);
          cand.push_back(c.stat(&ResultRow::accuracy).mean);
        }
    }
    if (names.empty()) continue;
    out.push_back({&g, names, eval::transfer_table(names, sup, cand)});
  }
  return out;
}

json stat_json(const eval::Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

std::string pm(const eval::Stat& s) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", s.mean, s.std);
  return buf;
}

}  // namespace

std::vector<ResultRow> collect_rows(const std::filesystem::path& dir) {
  const auto runs = dir / "runs";
  if (!std::filesystem::is_directory(runs)) throw MissingFileError("no runs directory under " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(runs))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "row.csv")) files.push_back(entry.path() / "row.csv");
  std::sort(files.begin(), files.end());
  std::vector<ResultRow> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string header, line;
    std::getline(in, header);
    if (header != kResultHeader) throw ParseError(f.string() + ": unexpected header");
    while (std::getline(in, line))
      if (!line.empty()) rows.push_back(parse_result_row(line));
  }
  return rows;
}

std::string render_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultHeader) + "\n";
  for (const auto& r : rows) out += to_csv(r) + "\n";
  return out;
}

std::string render_json(const std::vector<ResultRow>& rows) {
  const auto groups = group_rows(rows);
  json jg = json::array();
  for (const auto& g : groups) {
    jg.push_back({{"method", g.method},
                  {"pretext", g.pretext},
                  {"dataset", g.dataset},
                  {"level", g.level},
                  {"k", g.k},
                  {"seeds", g.rows.size()},
                  {"accuracy", stat_json(g.stat(&ResultRow::accuracy))},
                  {"macro_f1", stat_json(g.stat(&ResultRow::macro_f1))},
                  {"macro_auroc", stat_json(g.stat(&ResultRow::macro_auroc))},
                  {"tunable_params", g.rows.front()->tunable_params},
                  {"wall_ms", stat_json(g.stat(&ResultRow::wall_ms))}});
  }
  json jt = json::array();
  for (const auto& t : transfers(groups)) {
    json trows = json::array();
    for (const auto& r : t.report.rows)
      trows.push_back({{"dataset", r.dataset}, {"supervised", r.supervised}, {"candidate", r.candidate},
                       {"arrow", eval::to_string(r.arrow)}});
    jt.push_back({{"method", t.candidate->method},
                  {"pretext", t.candidate->pretext},
                  {"rows", trows},
                  {"down", t.report.down},
                  {"negative_rate", t.report.negative_rate},
                  {"negative_rate_display", eval::format_rate(t.report.negative_rate)}});
  }
  return json{{"groups", jg}, {"transfer", jt}}.dump(2) + "\n";
}

std::string render_markdown(const std::vector<ResultRow>& rows) {
  const auto groups = group_rows(rows);
  std::ostringstream out;
  out << "| method | pretext | dataset | k | seeds | accuracy | macro-F1 | macro-AUROC | tunable params |\n"
      << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& g : groups)
    out << "| " << g.method << " | " << g.pretext << " | " << g.dataset << " | " << g.k << " | " << g.rows.size()
        << " | " << pm(g.stat(&ResultRow::accuracy)) << " | " << pm(g.stat(&ResultRow::macro_f1)) << " | "
        << pm(g.stat(&ResultRow::macro_auroc)) << " | " << g.rows.front()->tunable_params << " |\n";
  const auto ts = transfers(groups);
  if (!ts.empty()) {
    out << "\n| method | pretext |";
    for (const auto& d : ts.front().datasets) out << ' ' << d << " |";
    out << " negative rate |\n|---|---|";
    for (std::size_t i = 0; i < ts.front().datasets.size(); ++i) out << "---|";
    out << "---|\n";
    for (const auto& t : ts) {
      out << "| " << t.candidate->method << " | " << t.candidate->pretext << " |";
      for (const auto& r : t.report.rows) out << ' ' << eval::to_string(r.arrow) << " |";
      out << ' ' << eval::format_rate(t.report.negative_rate) << " |\n";
    }
  }
  return out.str();
}

}  // namespace gpb::bench
