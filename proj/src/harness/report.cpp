#include "rili/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "rili/core/errors.hpp"
#include "rili/harness/metrics.hpp"

namespace rili::harness {

namespace {

bool is_metrics_file(const std::filesystem::path& p) {
  if (p.extension() != ".csv") return false;
  std::ifstream in(p);
  std::string first;
  std::getline(in, first);
  return first == kMetricsHeader;
}

std::string group_of(const std::filesystem::path& rel) {
  std::filesystem::path g;
  for (const auto& part : rel.parent_path()) {
    if (part.string().rfind("seed_", 0) != 0) g /= part;
  }
  g /= rel.stem();
  return g.generic_string();
}

std::pair<double, double> mean_sem(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

}  // namespace

Report build_report(const std::filesystem::path& root, std::size_t window) {
  if (window == 0) throw ConfigError("report window must be positive");
  if (!std::filesystem::is_directory(root)) throw ConfigError("no such directory: " + root.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && is_metrics_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  Report report;
  for (const auto& f : files) {
    const auto rows = read_metrics(f);
    RunSummary r;
    r.file = std::filesystem::relative(f, root);
    r.group = group_of(r.file);
    r.interactions = rows.size();
    if (!rows.empty()) r.seed = rows.front().seed;
    std::vector<double> tail;
    for (std::size_t i = rows.size() - std::min(rows.size(), window); i < rows.size(); ++i) tail.push_back(-rows[i].ret);
    r.final_cost = mean_sem(tail).first;
    for (std::size_t start = 0; start < rows.size(); start += window) {
      std::vector<double> bin;
      for (std::size_t i = start; i < std::min(rows.size(), start + window); ++i) bin.push_back(-rows[i].ret);
      r.binned_cost.push_back(mean_sem(bin).first);
    }
    report.runs.push_back(std::move(r));
  }

  std::map<std::string, std::vector<const RunSummary*>> groups;
  for (const auto& r : report.runs) groups[r.group].push_back(&r);
  for (const auto& [g, runs] : groups) {
    std::size_t bins = 0;
    for (const auto* r : runs) bins = std::max(bins, r->binned_cost.size());
    for (std::size_t b = 0; b < bins; ++b) {
      std::vector<double> v;
      std::size_t end = 0;
      for (const auto* r : runs) {
        if (b < r->binned_cost.size()) {
          v.push_back(r->binned_cost[b]);
          end = std::max(end, std::min(r->interactions, (b + 1) * window));
        }
      }
      const auto [m, s] = mean_sem(v);
      report.curve.push_back({g, b, end, m, s, v.size()});
    }
  }
  return report;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "summary.csv");
  summary << "group,file,seed,interactions,final_cost\n";
  std::map<std::string, std::vector<double>> finals;
  for (const auto& r : report.runs) {
    summary << r.group << ',' << r.file.generic_string() << ',' << r.seed << ',' << r.interactions << ','
            << format_double(r.final_cost) << '\n';
    finals[r.group].push_back(r.final_cost);
  }
  std::ofstream groups(dir / "groups.csv");
  groups << "group,runs,final_cost_mean,final_cost_sem\n";
  for (const auto& [g, v] : finals) {
    const auto [m, s] = mean_sem(v);
    groups << g << ',' << v.size() << ',' << format_double(m) << ',' << format_double(s) << '\n';
  }
  std::ofstream curve(dir / "curve.csv");
  curve << "group,bin,interaction_end,mean_cost,sem,runs\n";
  for (const auto& c : report.curve) {
    curve << c.group << ',' << c.bin << ',' << c.interaction_end << ',' << format_double(c.mean_cost) << ','
          << format_double(c.sem) << ',' << c.runs << '\n';
  }
}

}  // namespace rili::harness
