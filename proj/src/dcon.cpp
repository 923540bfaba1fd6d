#include "instructnav/dcon.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <json.hpp>

#include "instructnav/templates_generated.hpp"

namespace instructnav::dcon {

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Lowercase with whitespace/underscores removed, for action matching.
std::string squash(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

// ---- tolerant response object parsing ----

struct RawValue {
  enum class Kind { String, List, Token } kind = Kind::Token;
  std::string str;
  std::vector<std::string> list;
};

void append_utf8(std::string& out, unsigned code) {
  if (code < 0x80) {
    out.push_back(static_cast<char>(code));
  } else if (code < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (code >> 6)));
    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (code >> 12)));
    out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
  }
}

class Scanner {
 public:
  explicit Scanner(const std::string& text, std::size_t pos) : text_(text), pos_(pos) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void next() { ++pos_; }
  std::size_t pos() const { return pos_; }

  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) next();
  }

  bool parse_quoted(std::string& out) {
    const char quote = peek();
    if (quote != '\'' && quote != '"') return false;
    next();
    out.clear();
    while (!done()) {
      char c = peek();
      if (c == '\\') {
        next();
        if (done()) return false;
        char e = peek();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case 'u': {
            unsigned code = 0;
            for (int k = 0; k < 4; ++k) {
              next();
              if (done() || !std::isxdigit(static_cast<unsigned char>(peek()))) return false;
              const char h = peek();
              code = code * 16 + static_cast<unsigned>(
                                     h <= '9' ? h - '0' : (std::tolower(h) - 'a' + 10));
            }
            append_utf8(out, code);
            break;
          }
          default: out.push_back(e); break;  // covers \' \" \\ and friends
        }
        next();
      } else if (c == quote) {
        next();
        return true;
      } else {
        out.push_back(c);
        next();
      }
    }
    return false;  // unterminated
  }

  bool parse_bare(std::string& out) {
    out.clear();
    while (!done()) {
      char c = peek();
      if (c == ',' || c == '}' || c == ']' || c == ':' || std::isspace(static_cast<unsigned char>(c)))
        break;
      out.push_back(c);
      next();
    }
    return !out.empty();
  }

  bool parse_value(RawValue& out) {
    skip_ws();
    if (done()) return false;
    if (peek() == '\'' || peek() == '"') {
      out.kind = RawValue::Kind::String;
      return parse_quoted(out.str);
    }
    if (peek() == '[') {
      next();
      out.kind = RawValue::Kind::List;
      out.list.clear();
      while (true) {
        skip_ws();
        if (done()) return false;
        if (peek() == ']') {
          next();
          return true;
        }
        std::string item;
        if (peek() == '\'' || peek() == '"') {
          if (!parse_quoted(item)) return false;
        } else if (!parse_bare(item)) {
          return false;
        }
        out.list.push_back(item);
        skip_ws();
        if (!done() && peek() == ',') next();
      }
    }
    out.kind = RawValue::Kind::Token;
    return parse_bare(out.str);
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

/// Parses one "{ key: value, ... }" object starting at `start`. Returns
/// the keys lowercased; tolerates trailing commas and bare tokens.
bool parse_object(const std::string& text, std::size_t start,
                  std::map<std::string, RawValue>& out, std::size_t& end) {
  Scanner sc(text, start);
  if (sc.done() || sc.peek() != '{') return false;
  sc.next();
  out.clear();
  while (true) {
    sc.skip_ws();
    if (sc.done()) return false;
    if (sc.peek() == '}') {
      sc.next();
      end = sc.pos();
      return true;
    }
    std::string key;
    if (sc.peek() == '\'' || sc.peek() == '"') {
      if (!sc.parse_quoted(key)) return false;
    } else if (!sc.parse_bare(key)) {
      return false;
    }
    sc.skip_ws();
    if (sc.done() || sc.peek() != ':') return false;
    sc.next();
    RawValue value;
    if (!sc.parse_value(value)) return false;
    out[lower(key)] = std::move(value);
    sc.skip_ws();
    if (!sc.done() && sc.peek() == ',') sc.next();
  }
}

bool interpret_flag(const RawValue& v, bool& out) {
  const std::string s = lower(v.kind == RawValue::Kind::List ? "" : v.str);
  if (s == "true") {
    out = true;
    return true;
  }
  if (s == "false") {
    out = false;
    return true;
  }
  return false;
}

DconStep step_from_fields(const std::map<std::string, RawValue>& fields, const std::string& raw) {
  DconStep step;
  auto action_it = fields.find("action");
  auto flag_it = fields.find("flag");
  if (action_it == fields.end() || flag_it == fields.end())
    throw ParseError("response object lacks Action/Flag", raw);
  auto action = parse_action(action_it->second.str);
  if (!action) throw ParseError("unknown action '" + action_it->second.str + "'", raw);
  step.action = *action;
  if (!interpret_flag(flag_it->second, step.flag))
    throw ParseError("Flag is not a boolean", raw);
  if (auto it = fields.find("reason"); it != fields.end()) step.reason = it->second.str;
  auto lm = fields.find("landmark");
  if (lm == fields.end()) lm = fields.find("landmarks");
  if (lm != fields.end()) {
    if (lm->second.kind == RawValue::Kind::List)
      step.landmarks = lm->second.list;
    else if (!lm->second.str.empty())
      step.landmarks = {lm->second.str};
  }
  return step;
}

std::string render_history(const std::vector<DconStep>& history) {
  if (history.empty()) return "(none)";
  std::ostringstream out;
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (k) out << "; ";
    out << (k + 1) << ". " << to_string(history[k].action);
    if (!history[k].landmarks.empty()) {
      out << " - ";
      for (std::size_t j = 0; j < history[k].landmarks.size(); ++j) {
        if (j) out << ", ";
        out << history[k].landmarks[j];
      }
    }
  }
  return out.str();
}

class ScriptedPlanner final : public PlannerBackend {
 public:
  explicit ScriptedPlanner(std::vector<DconStep> script) : script_(std::move(script)) {
    if (script_.empty()) throw std::invalid_argument("scripted backend needs a non-empty script");
  }

  std::string plan_step(const std::string&) override {
    const std::size_t k = std::min(next_, script_.size() - 1);
    ++next_;
    return render_dcon_response(script_[k]);
  }

 private:
  std::vector<DconStep> script_;
  std::size_t next_ = 0;
};

}  // namespace

const char* to_string(NavAction a) {
  switch (a) {
    case NavAction::Explore: return "Explore";
    case NavAction::Approach: return "Approach";
    case NavAction::MoveForward: return "Move Forward";
    case NavAction::TurnLeft: return "Turn Left";
    case NavAction::TurnRight: return "Turn Right";
    case NavAction::TurnAround: return "Turn Around";
    case NavAction::Enter: return "Enter";
    case NavAction::Exit: return "Exit";
  }
  return "?";
}

std::optional<NavAction> parse_action(const std::string& text) {
  const std::string s = squash(text);
  if (s == "explore") return NavAction::Explore;
  if (s == "approach") return NavAction::Approach;
  if (s == "moveforward") return NavAction::MoveForward;
  if (s == "turnleft") return NavAction::TurnLeft;
  if (s == "turnright") return NavAction::TurnRight;
  if (s == "turnaround") return NavAction::TurnAround;
  if (s == "enter") return NavAction::Enter;
  if (s == "exit") return NavAction::Exit;
  return std::nullopt;
}

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::ObjectNav: return "ObjectNav";
    case TaskKind::VLN: return "VLN";
    case TaskKind::DemandNav: return "DemandNav";
  }
  return "?";
}

std::string build_dcon_prompt(const DconChain& chain,
                              const std::vector<std::string>& observed_labels, TaskKind task_kind) {
  const char* strategy = templates::kStrategyObjectNav;
  if (task_kind == TaskKind::VLN) strategy = templates::kStrategyVln;
  if (task_kind == TaskKind::DemandNav) strategy = templates::kStrategyDemandNav;
  std::string strategy_text(strategy);
  while (!strategy_text.empty() && strategy_text.back() == '\n') strategy_text.pop_back();

  std::vector<std::string> labels = observed_labels;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::string observed;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k) observed += ", ";
    observed += labels[k];
  }
  if (observed.empty()) observed = "(none)";

  std::string prompt = templates::kDconPromptTemplate;
  prompt = replace_all(prompt, "{{STRATEGY}}", strategy_text);
  prompt = replace_all(prompt, "{{INSTRUCTION}}", chain.instruction);
  prompt = replace_all(prompt, "{{OBSERVED}}", observed);
  prompt = replace_all(prompt, "{{HISTORY}}", render_history(chain.history));
  return prompt;
}

DconStep parse_dcon_response(const std::string& text, bool strict) {
  if (strict) {
    nlohmann::json doc;
    const std::size_t start = text.find('{');
    if (start == std::string::npos) throw ParseError("no object in response", text);
    try {
      doc = nlohmann::json::parse(text.substr(start));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("strict parse failed: ") + e.what(), text);
    }
    std::map<std::string, RawValue> fields;
    for (const auto& [key, value] : doc.items()) {
      RawValue rv;
      if (value.is_array()) {
        rv.kind = RawValue::Kind::List;
        for (const auto& item : value) rv.list.push_back(item.get<std::string>());
      } else if (value.is_boolean()) {
        rv.str = value.get<bool>() ? "true" : "false";
      } else {
        rv.str = value.is_string() ? value.get<std::string>() : value.dump();
      }
      fields[lower(key)] = std::move(rv);
    }
    return step_from_fields(fields, text);
  }

  std::size_t search = 0;
  while ((search = text.find('{', search)) != std::string::npos) {
    std::map<std::string, RawValue> fields;
    std::size_t end = search;
    if (parse_object(text, search, fields, end) && fields.count("action") && fields.count("flag"))
      return step_from_fields(fields, text);
    ++search;
  }
  throw ParseError("no well-formed response object found", text);
}

std::string render_dcon_response(const DconStep& step) {
  nlohmann::ordered_json obj;
  obj["Reason"] = step.reason;
  obj["Action"] = to_string(step.action);
  obj["Landmark"] = step.landmarks;
  obj["Flag"] = step.flag ? "True" : "False";
  return obj.dump();
}

DconStep rewrite_enter_exit(const DconStep& step) {
  if (step.action != NavAction::Enter && step.action != NavAction::Exit) return step;
  DconStep out = step;
  out.action = NavAction::Approach;
  out.landmarks.insert(out.landmarks.begin(), "Doorway");
  return out;
}

DconChain plan_next_step(const DconChain& chain, const std::vector<std::string>& observed_labels,
                         TaskKind task_kind, PlannerBackend& backend, const PlanConfig& cfg) {
  const std::string prompt = build_dcon_prompt(chain, observed_labels, task_kind);
  DconStep step;
  std::string last_error;
  bool parsed = false;
  for (int attempt = 0; attempt <= cfg.max_parse_retries; ++attempt) {
    const std::string reply = backend.plan_step(prompt);
    try {
      step = parse_dcon_response(reply, cfg.strict_parse);
      parsed = true;
      break;
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }
  if (!parsed)
    throw PlannerFailure("planner response unparseable after retries: " + last_error);

  DconChain next = chain;
  if (next.current) next.history.push_back(*next.current);
  next.current = rewrite_enter_exit(step);
  return next;
}

std::unique_ptr<PlannerBackend> scripted_backend(std::vector<DconStep> script) {
  return std::make_unique<ScriptedPlanner>(std::move(script));
}

}  // namespace instructnav::dcon
