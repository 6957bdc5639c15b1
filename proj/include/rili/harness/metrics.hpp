#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rili::harness {

// One row per interaction. dynamics_id is the hidden partner label, written
// for analysis only.
struct MetricsRow {
  std::uint64_t seed = 0;
  std::int64_t interaction = 0;
  std::string dynamics_id;
  double ret = 0.0;
  double rep_loss = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double wall_seconds = 0.0;  // goes to timing.csv, never to metrics.csv
};

inline constexpr const char* kMetricsHeader = "seed,interaction,dynamics_id,return,rep_loss,critic_loss,actor_loss,alpha";

// Shortest round-trip text for a double; NaN prints as "nan".
std::string format_double(double v);

std::string metrics_line(const MetricsRow& row);

// Appends rows to metrics.csv and timing.csv in one directory. Rows must
// arrive in increasing interaction order without gaps.
class MetricsWriter {
 public:
  MetricsWriter() = default;
  explicit MetricsWriter(const std::filesystem::path& dir, const std::string& stem = "metrics");

  bool is_open() const { return metrics_.is_open(); }
  void write(const MetricsRow& row);
  void flush();

 private:
  std::ofstream metrics_, timing_;
  std::int64_t next_ = 0;
};

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

}  // namespace rili::harness
