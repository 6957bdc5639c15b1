#include "rili/harness/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "rili/core/errors.hpp"

namespace rili::harness {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string metrics_line(const MetricsRow& r) {
  std::ostringstream s;
  s << r.seed << ',' << r.interaction << ',' << r.dynamics_id << ',' << format_double(r.ret) << ','
    << format_double(r.rep_loss) << ',' << format_double(r.critic_loss) << ',' << format_double(r.actor_loss) << ','
    << format_double(r.alpha);
  return s.str();
}

MetricsWriter::MetricsWriter(const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  metrics_.open(dir / (stem + ".csv"));
  timing_.open(dir / (stem + "_timing.csv"));
  if (!metrics_ || !timing_) throw ConfigError("cannot write metrics under " + dir.string());
  metrics_ << kMetricsHeader << '\n';
  timing_ << "seed,interaction,wall_seconds\n";
}

void MetricsWriter::write(const MetricsRow& row) {
  if (row.interaction != next_) throw SequencingError("metrics rows must be consecutive");
  ++next_;
  metrics_ << metrics_line(row) << '\n';
  timing_ << row.seed << ',' << row.interaction << ',' << format_double(row.wall_seconds) << '\n';
}

void MetricsWriter::flush() {
  metrics_.flush();
  timing_.flush();
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) throw ConfigError(path.string() + ": unexpected metrics header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ConfigError(path.string() + ": malformed row '" + line + "'");
    auto num = [](const std::string& x) { return x == "nan" ? std::nan("") : std::stod(x); };
    MetricsRow r;
    r.seed = std::stoull(f[0]);
    r.interaction = std::stoll(f[1]);
    r.dynamics_id = f[2];
    r.ret = num(f[3]);
    r.rep_loss = num(f[4]);
    r.critic_loss = num(f[5]);
    r.actor_loss = num(f[6]);
    r.alpha = num(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rili::harness
