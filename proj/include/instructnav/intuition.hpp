#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "instructnav/errors.hpp"
#include "instructnav/valuemaps.hpp"
#include "instructnav/worldmodel.hpp"

namespace instructnav::intuition {

/// One panorama tile: the directional view rendered as a structured
/// textual scene summary (the in-process stand-in for an RGB tile).
struct DirectionalView {
  int direction_id = 0;  // 1..12, 1 = current heading, clockwise
  std::string summary;
};

struct Panorama {
  std::vector<DirectionalView> tiles;  // direction_ids strictly increasing
  int n = 0;
  std::vector<int> direction_ids() const {
    std::vector<int> ids;
    ids.reserve(tiles.size());
    for (const auto& t : tiles) ids.push_back(t.direction_id);
    return ids;
  }
};

struct DirectionJudgment {
  std::string cot;
  bool stop = false;
  int direction_id = 0;  // valid when !stop
};

struct JudgeRequest {
  const Panorama* panorama = nullptr;
  std::string instruction;
  std::string action;
  std::vector<std::string> landmarks;
  std::optional<std::string> feedback;
};

/// Multimodal seam: given the panorama plus the textual task context,
/// reply with free-form reasoning ending in a direction or stop call.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string judge(const JudgeRequest& request) = 0;
};

/// Deterministic textual rendering of one directional observation:
/// visible labels with their nearest distance, plus per-third free
/// space. Used to build panorama tiles from the bundled simulator.
std::string summarize_observation(const world::Observation& obs,
                                  const std::map<int, std::string>& label_table);

/// Selects the N equally spaced tiles out of the 12 base directions:
/// N=12 -> 1..12, N=6 -> {1,3,5,7,9,11}, N=4 -> {1,4,7,10}.
Panorama assemble_panorama(const std::vector<DirectionalView>& views, int n);

/// The full judge prompt text (instruction, action, landmarks, tiles,
/// optional failure feedback) from the embedded template.
std::string build_judge_prompt(const JudgeRequest& request);

/// Feedback message naming the rejected direction.
std::string feedback_message(int direction_id);

struct JudgeConfig {
  int max_parse_retries = 3;
  int max_judge_retries = 3;  // re-predictions after EmptyProjection
  double intuition_range = 5.0;
};

/// One judged decision: invokes the backend and parses 'Direction <ID>'
/// or 'Stop' from the reply (last match wins). IDs outside the panorama
/// are parse errors; after max_parse_retries failed attempts this
/// throws PlannerFailure.
DirectionJudgment judge_direction(const Panorama& pan, const std::string& instruction,
                                  const std::string& action,
                                  const std::vector<std::string>& landmarks, JudgeBackend& backend,
                                  const JudgeConfig& cfg = {},
                                  const std::optional<std::string>& feedback = std::nullopt);

struct IntuitionOutcome {
  maps::ValueMap map;
  DirectionJudgment judgment;
  int backend_calls = 0;
  bool exhausted = false;  // re-prediction budget ran out; map is zero
};

/// The re-prediction loop: judge, project the chosen direction onto the
/// intuition map, and on an empty projection feed the failure back and
/// re-judge, at most cfg.max_judge_retries extra times. Exhaustion (or a
/// Stop judgment) yields an all-zero map and the episode continues on
/// the other maps.
IntuitionOutcome judge_with_feedback(const Panorama& pan, const std::string& instruction,
                                     const std::string& action,
                                     const std::vector<std::string>& landmarks,
                                     JudgeBackend& backend, const GridFrame& frame,
                                     const CellSet& nav, const Pose& pose,
                                     const JudgeConfig& cfg = {});

/// Deterministic test judge replying with the scripted strings in order,
/// repeating the last one when exhausted.
class ScriptedJudge final : public JudgeBackend {
 public:
  explicit ScriptedJudge(std::vector<std::string> replies);
  std::string judge(const JudgeRequest& request) override;
  int calls() const { return calls_; }

 private:
  std::vector<std::string> replies_;
  int calls_ = 0;
};

}  // namespace instructnav::intuition
