#pragma once

#include <stdexcept>
#include <string>

namespace instructnav {

/// A backend reply that could not be interpreted; carries the raw text
/// so retry layers can log or re-prompt.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string raw)
      : std::runtime_error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

/// Planner or judge gave up after exhausting parse retries.
class PlannerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backend transport could not complete within the retry budget.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The endpoint answered, but not in the chat-completions shape.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replay backend saw a request that was never recorded.
class ReplayMiss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-episode backend call budget exhausted.
class CallBudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace instructnav
