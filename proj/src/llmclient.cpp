#include "instructnav/llmclient.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace instructnav::llm {

namespace {

using nlohmann::json;

constexpr char kTranscriptFormat[] = "instructnav-transcript";
constexpr int kTranscriptVersion = 1;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

/// Collapse whitespace runs to single spaces (for request hashing).
std::string collapse_ws(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct UrlParts {
  std::string host_port;  // scheme://host:port
  std::string path_prefix;
};

UrlParts split_base_url(const std::string& base_url) {
  UrlParts parts;
  const std::size_t scheme = base_url.find("://");
  const std::size_t path_start =
      base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    parts.host_port = base_url;
  } else {
    parts.host_port = base_url.substr(0, path_start);
    parts.path_prefix = base_url.substr(path_start);
    while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/')
      parts.path_prefix.pop_back();
  }
  return parts;
}

// One shared in-flight limiter; sized on first use.
class InflightGate {
 public:
  void enter(int cap) {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return inflight_ < cap; });
    ++inflight_;
  }
  void leave() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      --inflight_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int inflight_ = 0;
};

InflightGate& gate() {
  static InflightGate g;
  return g;
}

class RemotePlanner final : public dcon::PlannerBackend {
 public:
  RemotePlanner(EndpointConfig cfg, Transcript* transcript)
      : cfg_(std::move(cfg)), transcript_(transcript) {}
  std::string plan_step(const std::string& prompt) override {
    return chat_complete(cfg_, {{"user", prompt}}, transcript_, "planner");
  }

 private:
  EndpointConfig cfg_;
  Transcript* transcript_;
};

class RemoteJudge final : public intuition::JudgeBackend {
 public:
  RemoteJudge(EndpointConfig cfg, Transcript* transcript)
      : cfg_(std::move(cfg)), transcript_(transcript) {}
  std::string judge(const intuition::JudgeRequest& request) override {
    return chat_complete(cfg_, {{"user", intuition::build_judge_prompt(request)}}, transcript_,
                         "judge");
  }

 private:
  EndpointConfig cfg_;
  Transcript* transcript_;
};

class RecordingPlanner final : public dcon::PlannerBackend {
 public:
  RecordingPlanner(std::unique_ptr<dcon::PlannerBackend> inner, Transcript* transcript)
      : inner_(std::move(inner)), transcript_(transcript) {}
  std::string plan_step(const std::string& prompt) override {
    const auto t0 = std::chrono::steady_clock::now();
    std::string reply = inner_->plan_step(prompt);
    TranscriptRecord rec;
    rec.kind = "planner";
    rec.messages = planner_messages(prompt);
    rec.response = reply;
    rec.latency_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0).count();
    transcript_->append(std::move(rec));
    return reply;
  }

 private:
  std::unique_ptr<dcon::PlannerBackend> inner_;
  Transcript* transcript_;
};

class RecordingJudge final : public intuition::JudgeBackend {
 public:
  RecordingJudge(std::unique_ptr<intuition::JudgeBackend> inner, Transcript* transcript)
      : inner_(std::move(inner)), transcript_(transcript) {}
  std::string judge(const intuition::JudgeRequest& request) override {
    const auto t0 = std::chrono::steady_clock::now();
    std::string reply = inner_->judge(request);
    TranscriptRecord rec;
    rec.kind = "judge";
    rec.messages = judge_messages(request);
    rec.response = reply;
    rec.latency_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0).count();
    transcript_->append(std::move(rec));
    return reply;
  }

 private:
  std::unique_ptr<intuition::JudgeBackend> inner_;
  Transcript* transcript_;
};

/// Response queues per request hash, served in recorded order.
class ReplayTable {
 public:
  explicit ReplayTable(const Transcript& transcript) {
    if (transcript.empty())
      throw std::invalid_argument("replay backend needs a non-empty transcript");
    for (const auto& rec : transcript.records())
      queues_[request_hash(rec.messages)].push_back(rec.response);
  }

  std::string take(const nlohmann::json& messages) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::uint64_t key = request_hash(messages);
    auto it = queues_.find(key);
    if (it == queues_.end() || it->second.empty())
      throw ReplayMiss("no recorded response for request (prompt changed since recording?)");
    std::string response = it->second.front();
    it->second.erase(it->second.begin());
    return response;
  }

 private:
  std::map<std::uint64_t, std::vector<std::string>> queues_;
  std::mutex mutex_;
};

class ReplayPlanner final : public dcon::PlannerBackend {
 public:
  explicit ReplayPlanner(const Transcript& t) : table_(t) {}
  std::string plan_step(const std::string& prompt) override {
    return table_.take(planner_messages(prompt));
  }

 private:
  ReplayTable table_;
};

class ReplayJudge final : public intuition::JudgeBackend {
 public:
  explicit ReplayJudge(const Transcript& t) : table_(t) {}
  std::string judge(const intuition::JudgeRequest& request) override {
    return table_.take(judge_messages(request));
  }

 private:
  ReplayTable table_;
};

class BudgetedPlanner final : public dcon::PlannerBackend {
 public:
  BudgetedPlanner(std::unique_ptr<dcon::PlannerBackend> inner, CallBudget* budget)
      : inner_(std::move(inner)), budget_(budget) {}
  std::string plan_step(const std::string& prompt) override {
    budget_->spend();
    return inner_->plan_step(prompt);
  }

 private:
  std::unique_ptr<dcon::PlannerBackend> inner_;
  CallBudget* budget_;
};

class BudgetedJudge final : public intuition::JudgeBackend {
 public:
  BudgetedJudge(std::unique_ptr<intuition::JudgeBackend> inner, CallBudget* budget)
      : inner_(std::move(inner)), budget_(budget) {}
  std::string judge(const intuition::JudgeRequest& request) override {
    budget_->spend();
    return inner_->judge(request);
  }

 private:
  std::unique_ptr<intuition::JudgeBackend> inner_;
  CallBudget* budget_;
};

}  // namespace

EndpointConfig endpoint_from_env(bool judge) {
  EndpointConfig cfg;
  cfg.base_url = env_or("INSTRUCTNAV_BASE_URL", "");
  cfg.model_name = env_or("INSTRUCTNAV_MODEL", "");
  if (judge) cfg.model_name = env_or("INSTRUCTNAV_JUDGE_MODEL", cfg.model_name);
  cfg.api_key = env_or("INSTRUCTNAV_API_KEY", "");
  return cfg;
}

void Transcript::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write transcript: " + path);
  json header;
  header["format"] = kTranscriptFormat;
  header["version"] = kTranscriptVersion;
  out << header.dump() << "\n";
  for (const auto& rec : records_) {
    json line;
    line["kind"] = rec.kind;
    line["messages"] = rec.messages;
    line["response"] = rec.response;
    line["latency_ms"] = rec.latency_ms;
    line["prompt_tokens"] = rec.prompt_tokens;
    line["completion_tokens"] = rec.completion_tokens;
    line["retries"] = rec.retries;
    out << line.dump() << "\n";
  }
}

Transcript Transcript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read transcript: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("transcript is empty: " + path);
  const json header = json::parse(line);
  if (header.value("format", "") != kTranscriptFormat)
    throw std::runtime_error("not a transcript file: " + path);
  if (header.value("version", 0) != kTranscriptVersion)
    throw std::runtime_error("unsupported transcript version in " + path);
  Transcript t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    TranscriptRecord out;
    out.kind = rec.value("kind", "chat");
    out.messages = rec.at("messages");
    out.response = rec.value("response", "");
    out.latency_ms = rec.value("latency_ms", 0.0);
    out.prompt_tokens = rec.value("prompt_tokens", -1);
    out.completion_tokens = rec.value("completion_tokens", -1);
    out.retries = rec.value("retries", 0);
    t.records_.push_back(std::move(out));
  }
  return t;
}

std::uint64_t request_hash(const nlohmann::json& messages) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& msg : messages) {
    h = fnv1a(collapse_ws(msg.value("role", "")), h);
    h = fnv1a("\x1f", h);
    h = fnv1a(collapse_ws(msg.value("content", "")), h);
    h = fnv1a("\x1e", h);
  }
  return h;
}

nlohmann::json planner_messages(const std::string& prompt) {
  return json::array({json{{"role", "user"}, {"content", prompt}}});
}

nlohmann::json judge_messages(const intuition::JudgeRequest& request) {
  return json::array({json{{"role", "user"}, {"content", intuition::build_judge_prompt(request)}}});
}

std::string chat_complete(const EndpointConfig& cfg, const std::vector<Message>& messages,
                          Transcript* transcript, const std::string& record_kind) {
  if (cfg.base_url.empty()) throw TransportError("no base_url configured for remote backend");

  json body;
  body["model"] = cfg.model_name;
  body["messages"] = json::array();
  for (const auto& [role, content] : messages)
    body["messages"].push_back(json{{"role", role}, {"content", content}});
  if (cfg.temperature) body["temperature"] = *cfg.temperature;
  if (cfg.top_p) body["top_p"] = *cfg.top_p;

  const UrlParts url = split_base_url(cfg.base_url);
  const std::string path = url.path_prefix + "/chat/completions";

  std::string last_error;
  int retries_used = 0;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      const double delay_s = cfg.backoff_base_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
      retries_used = attempt;
    }

    httplib::Client client(url.host_port);
    client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

    gate().enter(cfg.max_inflight);
    const auto t0 = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(path, headers, body.dump(), "application/json");
    const double latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    gate().leave();

    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TransportError("endpoint returned status " + std::to_string(res->status));

    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("response body is not JSON: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty() ||
        !doc["choices"][0].contains("message"))
      throw ProtocolError("response body is not chat-completions shaped");
    const std::string content = doc["choices"][0]["message"].value("content", "");

    if (transcript) {
      TranscriptRecord rec;
      rec.kind = record_kind;
      rec.messages = body["messages"];
      rec.response = content;
      rec.latency_ms = latency_ms;
      rec.retries = retries_used;
      if (doc.contains("usage")) {
        rec.prompt_tokens = doc["usage"].value("prompt_tokens", -1);
        rec.completion_tokens = doc["usage"].value("completion_tokens", -1);
      }
      transcript->append(std::move(rec));
    }
    return content;
  }
  throw TransportError("chat completion failed after " + std::to_string(cfg.max_retries) +
                       " retries: " + last_error);
}

std::unique_ptr<dcon::PlannerBackend> remote_planner(EndpointConfig cfg, Transcript* transcript) {
  return std::make_unique<RemotePlanner>(std::move(cfg), transcript);
}

std::unique_ptr<intuition::JudgeBackend> remote_judge(EndpointConfig cfg, Transcript* transcript) {
  return std::make_unique<RemoteJudge>(std::move(cfg), transcript);
}

std::unique_ptr<dcon::PlannerBackend> recording_planner(std::unique_ptr<dcon::PlannerBackend> inner,
                                                        Transcript* transcript) {
  return std::make_unique<RecordingPlanner>(std::move(inner), transcript);
}

std::unique_ptr<intuition::JudgeBackend> recording_judge(
    std::unique_ptr<intuition::JudgeBackend> inner, Transcript* transcript) {
  return std::make_unique<RecordingJudge>(std::move(inner), transcript);
}

std::unique_ptr<dcon::PlannerBackend> replay_planner(const Transcript& transcript) {
  return std::make_unique<ReplayPlanner>(transcript);
}

std::unique_ptr<intuition::JudgeBackend> replay_judge(const Transcript& transcript) {
  return std::make_unique<ReplayJudge>(transcript);
}

std::unique_ptr<dcon::PlannerBackend> budgeted_planner(std::unique_ptr<dcon::PlannerBackend> inner,
                                                       CallBudget* budget) {
  return std::make_unique<BudgetedPlanner>(std::move(inner), budget);
}

std::unique_ptr<intuition::JudgeBackend> budgeted_judge(std::unique_ptr<intuition::JudgeBackend> inner,
                                                        CallBudget* budget) {
  return std::make_unique<BudgetedJudge>(std::move(inner), budget);
}

}  // namespace instructnav::llm
