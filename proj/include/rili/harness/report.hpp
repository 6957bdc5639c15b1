#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rili::harness {

// One metrics CSV found under a report root.
struct RunSummary {
  std::string group;  // relative path with seed_* components and ".csv" dropped
  std::filesystem::path file;
  std::uint64_t seed = 0;
  std::size_t interactions = 0;
  double final_cost = 0.0;  // mean cost over the last `window` interactions
  std::vector<double> binned_cost;
};

struct CurvePoint {
  std::string group;
  std::size_t bin = 0;
  std::size_t interaction_end = 0;
  double mean_cost = 0.0;
  double sem = 0.0;
  std::size_t runs = 0;
};

struct Report {
  std::vector<RunSummary> runs;
  std::vector<CurvePoint> curve;
};

// Scans `root` recursively for files carrying the metrics header. Costs are
// negated returns, binned in windows of `window` interactions and averaged
// over the seeds of a group.
Report build_report(const std::filesystem::path& root, std::size_t window);

// summary.csv (one row per run), groups.csv (mean +- SEM of the final cost
// per group) and curve.csv.
void write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace rili::harness
