#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "klper/error.hpp"
#include "klper/text.hpp"

namespace klper {

// One row per evaluation. Loss and kappa columns average the updates since the
// previous row; they are nan when no update happened in that window.
struct MetricsRow {
  std::uint64_t step = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double kappa_selected = 0.0;
  double kappa_candidates_mean = 0.0;
  double wallclock_s = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "step,eval_return_mean,eval_return_std,critic_loss,actor_loss,kappa_selected,"
    "kappa_candidates_mean,wallclock_s";

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw Error("write_metrics_csv: no rows to write");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FileError(path, "cannot open for writing");
  using text::format_double;
  os << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    os << r.step << ',' << format_double(r.eval_return_mean) << ','
       << format_double(r.eval_return_std) << ',' << format_double(r.critic_loss) << ','
       << format_double(r.actor_loss) << ',' << format_double(r.kappa_selected) << ','
       << format_double(r.kappa_candidates_mean) << ',' << format_double(r.wallclock_s) << '\n';
  }
  os.flush();
  if (!os) throw FileError(path, "write failed");
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) {
    throw FileError(path, "unexpected metrics header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 8) throw FileError(path, "metrics row has " + std::to_string(f.size()) + " fields");
    try {
      MetricsRow r;
      r.step = text::parse_uint(f[0]);
      r.eval_return_mean = text::parse_double(f[1]);
      r.eval_return_std = text::parse_double(f[2]);
      r.critic_loss = text::parse_double(f[3]);
      r.actor_loss = text::parse_double(f[4]);
      r.kappa_selected = text::parse_double(f[5]);
      r.kappa_candidates_mean = text::parse_double(f[6]);
      r.wallclock_s = text::parse_double(f[7]);
      rows.push_back(r);
    } catch (const UsageError& e) {
      throw FileError(path, e.what());
    }
  }
  return rows;
}

} // namespace klper
