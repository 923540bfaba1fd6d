#include "instructnav/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace instructnav::eval {

namespace {

const char* stop_reason_string(const EpisodeResult& r) {
  if (r.planner_error) return "PlannerError";
  return plan::to_string(r.stop_reason);
}

}  // namespace

MetricsTable compute_metrics(const std::vector<EpisodeResult>& results) {
  if (results.empty()) throw std::invalid_argument("compute_metrics: no results");
  MetricsTable t;
  t.episodes = static_cast<int>(results.size());
  for (const EpisodeResult& r : results) {
    if (!(r.shortest_path > 0.0))
      throw std::invalid_argument("compute_metrics: episode '" + r.id +
                                  "' has non-positive shortest_path");
    t.sr += r.success ? 1.0 : 0.0;
    t.osr += r.oracle_success ? 1.0 : 0.0;
    if (r.success) t.spl += r.shortest_path / std::max(r.traj_length, r.shortest_path);
    t.ne += r.nav_error;
    t.tl += r.traj_length;
  }
  const double n = static_cast<double>(t.episodes);
  t.sr = 100.0 * t.sr / n;
  t.osr = 100.0 * t.osr / n;
  t.spl = 100.0 * t.spl / n;
  t.ne /= n;
  t.tl /= n;
  return t;
}

std::string format_metrics(const MetricsTable& t) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "episodes %d\nSR   %6.1f %%\nOSR  %6.1f %%\nSPL  %6.1f %%\nNE   %6.2f m\nTL   %6.2f m\n",
                t.episodes, t.sr, t.osr, t.spl, t.ne, t.tl);
  return buf;
}

std::string result_to_line(const EpisodeResult& r) {
  nlohmann::ordered_json line;
  line["v"] = 1;
  line["id"] = r.id;
  line["success"] = r.success;
  line["oracle_success"] = r.oracle_success;
  line["nav_error"] = r.nav_error;
  line["traj_length"] = r.traj_length;
  line["shortest_path"] = r.shortest_path;
  line["step_count"] = r.step_count;
  line["decision_steps"] = r.decision_steps;
  line["stop_reason"] = stop_reason_string(r);
  line["traj_hash"] = r.trajectory_hash;
  if (!r.transcript_ref.empty()) line["transcript"] = r.transcript_ref;
  if (!r.error.empty()) line["error"] = r.error;
  return line.dump();
}

EpisodeResult result_from_line(const std::string& line) {
  const nlohmann::json doc = nlohmann::json::parse(line);
  EpisodeResult r;
  r.id = doc.value("id", "");
  r.success = doc.value("success", false);
  r.oracle_success = doc.value("oracle_success", false);
  r.nav_error = doc.value("nav_error", 0.0);
  r.traj_length = doc.value("traj_length", 0.0);
  r.shortest_path = doc.value("shortest_path", 0.0);
  r.step_count = doc.value("step_count", 0);
  r.decision_steps = doc.value("decision_steps", 0);
  r.trajectory_hash = doc.value("traj_hash", 0ULL);
  r.transcript_ref = doc.value("transcript", "");
  r.error = doc.value("error", "");
  const std::string reason = doc.value("stop_reason", "None");
  r.planner_error = reason == "PlannerError";
  if (reason == "DconFlag") r.stop_reason = plan::StopReason::DconFlag;
  else if (reason == "JudgeStop") r.stop_reason = plan::StopReason::JudgeStop;
  else if (reason == "Budget") r.stop_reason = plan::StopReason::Budget;
  else r.stop_reason = plan::StopReason::None;
  return r;
}

}  // namespace instructnav::eval
