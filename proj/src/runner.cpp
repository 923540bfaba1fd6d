#include "instructnav/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <thread>

#include "instructnav/llmclient.hpp"
#include "instructnav/mapdump.hpp"

namespace instructnav::eval {

namespace {

std::vector<dcon::DconStep> planner_script_or_default(const Episode& ep) {
  if (!ep.planner_script.empty()) return ep.planner_script;
  dcon::DconStep step;
  step.action = dcon::NavAction::Explore;
  step.reason = "no script provided";
  return {step};
}

std::vector<std::string> judge_script_or_default(const Episode& ep) {
  if (!ep.judge_script.empty()) return ep.judge_script;
  return {"Direction 1"};
}

EpisodeResult run_one(const sim::Scene& scene, const Episode& ep, const RunOptions& options) {
  RunConfig cfg = options.config;
  cfg.seed = ep.seed ^ options.config.seed;

  EpisodeBackends backends;
  llm::Transcript transcript;
  std::optional<llm::Transcript> replay_source;

  const std::string transcript_path =
      options.transcript_dir.empty() ? "" : options.transcript_dir + "/" + ep.id + ".transcript";

  switch (options.mode) {
    case BackendMode::Scripted:
      backends.planner = dcon::scripted_backend(planner_script_or_default(ep));
      backends.judge = std::make_unique<intuition::ScriptedJudge>(judge_script_or_default(ep));
      break;
    case BackendMode::Remote: {
      backends.planner = llm::remote_planner(llm::endpoint_from_env(false), &transcript);
      backends.judge = llm::remote_judge(llm::endpoint_from_env(true), &transcript);
      break;
    }
    case BackendMode::Replay: {
      if (transcript_path.empty())
        throw std::invalid_argument("replay mode needs a transcript directory");
      replay_source = llm::Transcript::load(transcript_path);
      backends.planner = llm::replay_planner(*replay_source);
      backends.judge = llm::replay_judge(*replay_source);
      break;
    }
  }
  if (options.record && options.mode == BackendMode::Scripted) {
    backends.planner = llm::recording_planner(std::move(backends.planner), &transcript);
    backends.judge = llm::recording_judge(std::move(backends.judge), &transcript);
  }

  DecisionObserver observer;
  if (!options.dump_dir.empty()) {
    const std::string dir = options.dump_dir;
    const std::string id = ep.id;
    observer = [dir, id](const DecisionTrace& trace) { dump_decision_maps(trace, id, dir); };
  }

  EpisodeResult result = run_episode(scene, ep, std::move(backends), cfg, observer);
  if ((options.record || options.mode == BackendMode::Remote) && !transcript_path.empty() &&
      !transcript.empty()) {
    transcript.save(transcript_path);
    result.transcript_ref = ep.id + ".transcript";
  }
  return result;
}

}  // namespace

std::vector<EpisodeResult> run_suite(const ScenarioSuite& suite, const RunOptions& options) {
  // Scenes are immutable after load; share one instance per path.
  std::map<std::string, std::shared_ptr<const sim::Scene>> scenes;
  for (const std::string& path : suite.episode_scene_paths)
    if (!scenes.count(path))
      scenes[path] = std::make_shared<const sim::Scene>(sim::load_scene(path));

  const std::size_t n = suite.episodes.size();
  std::vector<EpisodeResult> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      const sim::Scene& scene = *scenes.at(suite.episode_scene_paths[k]);
      try {
        results[k] = run_one(scene, suite.episodes[k], options);
      } catch (const std::exception& e) {
        EpisodeResult failed;
        failed.id = suite.episodes[k].id;
        failed.planner_error = true;
        failed.error = e.what();
        failed.shortest_path = 1.0;  // keep the metrics denominator sane
        results[k] = std::move(failed);
      }
    }
  };

  const int threads = std::max(1, options.parallel);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::sort(results.begin(), results.end(),
            [](const EpisodeResult& a, const EpisodeResult& b) { return a.id < b.id; });
  return results;
}

void write_results(const std::vector<EpisodeResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results file: " + path);
  for (const EpisodeResult& r : results) out << result_to_line(r) << "\n";
}

std::vector<EpisodeResult> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read results file: " + path);
  std::vector<EpisodeResult> results;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    results.push_back(result_from_line(line));
  }
  return results;
}

}  // namespace instructnav::eval
