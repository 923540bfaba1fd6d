#include "instructnav/intuition.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "instructnav/templates_generated.hpp"

namespace instructnav::intuition {

namespace {

std::string fmt_meters(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

/// Last 'Direction <id>' or 'Stop' mention in the reply wins.
std::optional<DirectionJudgment> scan_reply(const std::string& text) {
  const std::string low = [&] {
    std::string s = text;
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  }();

  std::size_t best_pos = std::string::npos;
  DirectionJudgment j;
  j.cot = text;

  for (std::size_t pos = low.find("stop"); pos != std::string::npos;
       pos = low.find("stop", pos + 1)) {
    if (best_pos == std::string::npos || pos > best_pos) {
      best_pos = pos;
      j.stop = true;
      j.direction_id = 0;
    }
  }
  for (std::size_t pos = low.find("direction"); pos != std::string::npos;
       pos = low.find("direction", pos + 1)) {
    std::size_t k = pos + 9;
    while (k < low.size() && (std::isspace(static_cast<unsigned char>(low[k])) || low[k] == ':' ||
                              low[k] == '#' || low[k] == '='))
      ++k;
    if (k >= low.size() || !std::isdigit(static_cast<unsigned char>(low[k]))) continue;
    int id = 0;
    while (k < low.size() && std::isdigit(static_cast<unsigned char>(low[k]))) {
      id = id * 10 + (low[k] - '0');
      ++k;
    }
    if (best_pos == std::string::npos || pos > best_pos) {
      best_pos = pos;
      j.stop = false;
      j.direction_id = id;
    }
  }
  if (best_pos == std::string::npos) return std::nullopt;
  return j;
}

}  // namespace

std::string summarize_observation(const world::Observation& obs,
                                  const std::map<int, std::string>& label_table) {
  struct Seen {
    double dist;
    int bucket;
  };
  std::map<std::string, Seen> seen;
  double free_depth[3] = {0.0, 0.0, 0.0};
  const int w = obs.width;
  for (int u = 0; u < w; ++u) {
    const int bucket = std::min(2, u * 3 / std::max(1, w));
    const double d = obs.depth[static_cast<std::size_t>(u)];
    if (d <= 0.0) continue;
    free_depth[bucket] = std::max(free_depth[bucket], d);
    const int label = obs.semantic[static_cast<std::size_t>(u)];
    if (label == 0) continue;
    auto it = label_table.find(label);
    if (it == label_table.end()) continue;
    auto [entry, inserted] = seen.try_emplace(it->second, Seen{d, bucket});
    if (!inserted && d < entry->second.dist) entry->second = Seen{d, bucket};
  }

  static constexpr const char* kBucketName[3] = {"left", "center", "right"};
  std::ostringstream out;
  out << "objects: ";
  if (seen.empty()) {
    out << "none";
  } else {
    bool first = true;
    for (const auto& [name, s] : seen) {
      if (!first) out << ", ";
      first = false;
      out << name << " at " << fmt_meters(s.dist) << "m " << kBucketName[s.bucket];
    }
  }
  out << "; free space: left " << fmt_meters(free_depth[0]) << "m, center "
      << fmt_meters(free_depth[1]) << "m, right " << fmt_meters(free_depth[2]) << "m";
  return out.str();
}

Panorama assemble_panorama(const std::vector<DirectionalView>& views, int n) {
  if (n != 4 && n != 6 && n != 12)
    throw std::invalid_argument("panorama N must be 4, 6 or 12");
  std::vector<int> wanted;
  if (n == 12)
    wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  else if (n == 6)
    wanted = {1, 3, 5, 7, 9, 11};
  else
    wanted = {1, 4, 7, 10};

  Panorama pan;
  pan.n = n;
  for (int id : wanted) {
    auto it = std::find_if(views.begin(), views.end(),
                           [id](const DirectionalView& v) { return v.direction_id == id; });
    if (it == views.end())
      throw std::invalid_argument("panorama needs all 12 directional views; missing direction " +
                                  std::to_string(id));
    pan.tiles.push_back(*it);
  }
  return pan;
}

std::string build_judge_prompt(const JudgeRequest& request) {
  std::string landmarks;
  for (std::size_t k = 0; k < request.landmarks.size(); ++k) {
    if (k) landmarks += ", ";
    landmarks += request.landmarks[k];
  }
  if (landmarks.empty()) landmarks = "(none)";

  std::ostringstream tiles;
  const Panorama* pan = request.panorama;
  for (std::size_t k = 0; pan && k < pan->tiles.size(); ++k) {
    if (k) tiles << "\n";
    tiles << "Direction " << pan->tiles[k].direction_id << ": " << pan->tiles[k].summary;
  }

  std::string prompt = templates::kJudgePromptTemplate;
  prompt = replace_all(prompt, "{{INSTRUCTION}}", request.instruction);
  prompt = replace_all(prompt, "{{ACTION}}", request.action);
  prompt = replace_all(prompt, "{{LANDMARKS}}", landmarks);
  prompt = replace_all(prompt, "{{TILES}}", tiles.str());
  if (request.feedback) prompt += *request.feedback + "\n";
  return prompt;
}

std::string feedback_message(int direction_id) {
  return replace_all(templates::kJudgeFeedbackTemplate, "{{ID}}", std::to_string(direction_id));
}

DirectionJudgment judge_direction(const Panorama& pan, const std::string& instruction,
                                  const std::string& action,
                                  const std::vector<std::string>& landmarks, JudgeBackend& backend,
                                  const JudgeConfig& cfg,
                                  const std::optional<std::string>& feedback) {
  JudgeRequest request;
  request.panorama = &pan;
  request.instruction = instruction;
  request.action = action;
  request.landmarks = landmarks;
  request.feedback = feedback;

  const std::vector<int> ids = pan.direction_ids();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_parse_retries; ++attempt) {
    const std::string reply = backend.judge(request);
    auto j = scan_reply(reply);
    if (!j) {
      last_error = "no direction or stop in reply";
      continue;
    }
    if (!j->stop && std::find(ids.begin(), ids.end(), j->direction_id) == ids.end()) {
      last_error = "direction " + std::to_string(j->direction_id) + " not in panorama";
      continue;
    }
    return *j;
  }
  throw PlannerFailure("judge reply unparseable after retries: " + last_error);
}

IntuitionOutcome judge_with_feedback(const Panorama& pan, const std::string& instruction,
                                     const std::string& action,
                                     const std::vector<std::string>& landmarks,
                                     JudgeBackend& backend, const GridFrame& frame,
                                     const CellSet& nav, const Pose& pose,
                                     const JudgeConfig& cfg) {
  IntuitionOutcome out;
  out.map = maps::ValueMap::zeros(frame, maps::MapSource::Intuition);
  std::optional<std::string> feedback;
  for (int round = 0; round <= cfg.max_judge_retries; ++round) {
    out.judgment = judge_direction(pan, instruction, action, landmarks, backend, cfg, feedback);
    ++out.backend_calls;
    if (out.judgment.stop) return out;
    auto projected =
        maps::intuition_value_map(frame, out.judgment.direction_id, pose, nav, cfg.intuition_range);
    if (projected) {
      out.map = std::move(*projected);
      return out;
    }
    feedback = feedback_message(out.judgment.direction_id);
  }
  out.exhausted = true;
  return out;
}

ScriptedJudge::ScriptedJudge(std::vector<std::string> replies) : replies_(std::move(replies)) {
  if (replies_.empty()) throw std::invalid_argument("scripted judge needs a non-empty script");
}

std::string ScriptedJudge::judge(const JudgeRequest&) {
  const std::size_t k = std::min(static_cast<std::size_t>(calls_), replies_.size() - 1);
  ++calls_;
  return replies_[k];
}

}  // namespace instructnav::intuition
