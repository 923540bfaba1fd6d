#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "instructnav/dcon.hpp"
#include "instructnav/errors.hpp"
#include "instructnav/intuition.hpp"

namespace instructnav::llm {

struct EndpointConfig {
  std::string base_url;    // e.g. http://localhost:8000/v1
  std::string model_name;
  std::string api_key;     // resolved from the environment, never serialized
  double timeout_s = 60.0;
  int max_retries = 2;
  double backoff_base_s = 1.0;  // exponential, factor 2
  std::optional<double> temperature;  // absent = provider default
  std::optional<double> top_p;
  int max_inflight = 4;  // global in-flight request cap
};

/// Reads INSTRUCTNAV_BASE_URL / INSTRUCTNAV_MODEL / INSTRUCTNAV_API_KEY
/// (judge model falls back from INSTRUCTNAV_JUDGE_MODEL).
EndpointConfig endpoint_from_env(bool judge = false);

using Message = std::pair<std::string, std::string>;  // role, content

struct TranscriptRecord {
  std::string kind;  // "planner" or "judge"
  nlohmann::json messages;
  std::string response;
  double latency_ms = 0.0;
  std::int64_t prompt_tokens = -1;
  std::int64_t completion_tokens = -1;
  int retries = 0;
};

/// Append-only exchange log, serializable to the versioned
/// line-oriented transcript file and replayable as a backend.
/// Single-writer: each episode owns its transcript.
class Transcript {
 public:
  void append(TranscriptRecord record) { records_.push_back(std::move(record)); }
  const std::vector<TranscriptRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  void save(const std::string& path) const;
  static Transcript load(const std::string& path);

 private:
  std::vector<TranscriptRecord> records_;
};

/// Whitespace-insensitive canonical hash of a messages array; the key
/// replay backends look requests up by.
std::uint64_t request_hash(const nlohmann::json& messages);

/// One chat completion against the configured endpoint. Transport
/// failures, 429s and 5xx are retried with exponential backoff up to
/// cfg.max_retries; a reply that is not chat-completions shaped raises
/// ProtocolError. When `transcript` is given the exchange is recorded
/// (the API key never is).
std::string chat_complete(const EndpointConfig& cfg, const std::vector<Message>& messages,
                          Transcript* transcript = nullptr, const std::string& record_kind = "chat");

// -- backend adapters ------------------------------------------------

std::unique_ptr<dcon::PlannerBackend> remote_planner(EndpointConfig cfg,
                                                     Transcript* transcript = nullptr);
std::unique_ptr<intuition::JudgeBackend> remote_judge(EndpointConfig cfg,
                                                      Transcript* transcript = nullptr);

/// Wraps any backend and logs every exchange into the transcript.
std::unique_ptr<dcon::PlannerBackend> recording_planner(std::unique_ptr<dcon::PlannerBackend> inner,
                                                        Transcript* transcript);
std::unique_ptr<intuition::JudgeBackend> recording_judge(
    std::unique_ptr<intuition::JudgeBackend> inner, Transcript* transcript);

/// Serves recorded responses keyed by request hash, in recorded order
/// per key. An unseen request raises ReplayMiss; an empty transcript is
/// a constructor error.
std::unique_ptr<dcon::PlannerBackend> replay_planner(const Transcript& transcript);
std::unique_ptr<intuition::JudgeBackend> replay_judge(const Transcript& transcript);

/// Shared per-episode cap on backend calls; exhaustion surfaces as a
/// Budget stop on the episode.
class CallBudget {
 public:
  explicit CallBudget(int max_calls) : remaining_(max_calls) {}
  void spend() {
    if (remaining_ <= 0) throw CallBudgetExhausted("backend call budget exhausted");
    --remaining_;
  }
  int remaining() const { return remaining_; }

 private:
  int remaining_;
};

std::unique_ptr<dcon::PlannerBackend> budgeted_planner(std::unique_ptr<dcon::PlannerBackend> inner,
                                                       CallBudget* budget);
std::unique_ptr<intuition::JudgeBackend> budgeted_judge(std::unique_ptr<intuition::JudgeBackend> inner,
                                                        CallBudget* budget);

/// Messages a planner prompt / judge request turn into on the wire (and
/// in transcripts): a single user message.
nlohmann::json planner_messages(const std::string& prompt);
nlohmann::json judge_messages(const intuition::JudgeRequest& request);

}  // namespace instructnav::llm
