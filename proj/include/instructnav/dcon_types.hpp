#pragma once

#include <optional>
#include <string>
#include <vector>

namespace instructnav::dcon {

enum class NavAction { Explore, Approach, MoveForward, TurnLeft, TurnRight, TurnAround, Enter, Exit };

/// Surface string of an action as it appears in prompts and responses.
const char* to_string(NavAction a);

/// Parses the surface strings ("Explore", "Move Forward", ...) case-
/// insensitively, ignoring surrounding whitespace and inner spacing.
std::optional<NavAction> parse_action(const std::string& text);

/// One plan unit of the navigation chain: the next action, its target
/// landmarks, and whether this step finishes the instruction.
struct DconStep {
  std::string reason;
  NavAction action = NavAction::Explore;
  std::vector<std::string> landmarks;
  bool flag = false;

  bool operator==(const DconStep& o) const {
    return reason == o.reason && action == o.action && landmarks == o.landmarks && flag == o.flag;
  }
};

/// The evolving "Action 1 - Landmark 1 -> Action 2 - Landmark 2 -> ..."
/// state: instruction, executed steps, and the step currently executing.
struct DconChain {
  std::string instruction;
  std::vector<DconStep> history;
  std::optional<DconStep> current;
};

}  // namespace instructnav::dcon
