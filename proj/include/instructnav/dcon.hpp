#pragma once

#include <memory>
#include <string>
#include <vector>

#include "instructnav/dcon_types.hpp"
#include "instructnav/errors.hpp"

namespace instructnav::dcon {

enum class TaskKind { ObjectNav, VLN, DemandNav };

const char* to_string(TaskKind k);

/// A language-model seam for chain planning. Scripted, replay and remote
/// implementations all answer with the plain response text.
class PlannerBackend {
 public:
  virtual ~PlannerBackend() = default;
  virtual std::string plan_step(const std::string& prompt) = 0;
};

struct PlanConfig {
  int max_parse_retries = 3;
  bool strict_parse = false;
};

/// Assembles the four-section planning prompt (Robot Definition,
/// Navigation Strategy, Prediction Format, Episode Information) from the
/// embedded templates. Identical inputs give byte-identical prompts.
std::string build_dcon_prompt(const DconChain& chain, const std::vector<std::string>& observed_labels,
                              TaskKind task_kind);

/// Extracts the first well-formed {'Reason', 'Action', 'Landmark', 'Flag'}
/// object from the reply. Keys are case-insensitive; Landmark may be a
/// string or a list; Flag accepts booleans or 'True'/'False' strings;
/// single quotes, trailing commas and surrounding prose are tolerated
/// unless `strict` is set. Throws ParseError (carrying the raw text)
/// when no such object exists or the action string is unknown.
DconStep parse_dcon_response(const std::string& text, bool strict = false);

/// Canonical response text for a step; parse_dcon_response inverts it.
std::string render_dcon_response(const DconStep& step);

/// Enter/Exit become Approach with a "Doorway" landmark prepended;
/// everything else passes through unchanged.
DconStep rewrite_enter_exit(const DconStep& step);

/// One planning turn: prompt, backend call, parse (with retries), the
/// Enter/Exit rewrite, and the chain update (previous current step moves
/// into history). Throws PlannerFailure after max_parse_retries extra
/// attempts still fail to parse.
DconChain plan_next_step(const DconChain& chain, const std::vector<std::string>& observed_labels,
                         TaskKind task_kind, PlannerBackend& backend, const PlanConfig& cfg = {});

/// Deterministic test backend: replies with the canonical rendering of
/// each scripted step in order, repeating the last one when exhausted.
std::unique_ptr<PlannerBackend> scripted_backend(std::vector<DconStep> script);

}  // namespace instructnav::dcon
