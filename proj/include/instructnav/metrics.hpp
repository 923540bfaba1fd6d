#pragma once

#include <string>
#include <vector>

#include "instructnav/episode.hpp"

namespace instructnav::eval {

/// Suite-level navigation metrics: SR/OSR/SPL in percent, NE/TL in
/// meters (arithmetic means). SPL_i = S_i * l_i / max(p_i, l_i).
struct MetricsTable {
  double sr = 0.0;
  double osr = 0.0;
  double spl = 0.0;
  double ne = 0.0;
  double tl = 0.0;
  int episodes = 0;
};

MetricsTable compute_metrics(const std::vector<EpisodeResult>& results);

std::string format_metrics(const MetricsTable& table);

/// One episode result as a results-file line (stable key order).
std::string result_to_line(const EpisodeResult& result);
EpisodeResult result_from_line(const std::string& line);

}  // namespace instructnav::eval
