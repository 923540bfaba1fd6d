#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "instructnav/dcon.hpp"
#include "support/oracles.hpp"

using namespace instructnav;
using dcon::DconChain;
using dcon::DconStep;
using dcon::NavAction;
using dcon::TaskKind;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string golden(const std::string& name) {
  return read_file(std::string(INSTRUCTNAV_GOLDEN_DIR) + "/" + name);
}

}  // namespace

TEST_CASE("action surface strings parse case-insensitively") {
  CHECK(dcon::parse_action("Explore") == NavAction::Explore);
  CHECK(dcon::parse_action("move forward") == NavAction::MoveForward);
  CHECK(dcon::parse_action("MOVE FORWARD") == NavAction::MoveForward);
  CHECK(dcon::parse_action(" Turn Left ") == NavAction::TurnLeft);
  CHECK(dcon::parse_action("turn_right") == NavAction::TurnRight);
  CHECK(dcon::parse_action("TurnAround") == NavAction::TurnAround);
  CHECK(dcon::parse_action("enter") == NavAction::Enter);
  CHECK(dcon::parse_action("Exit") == NavAction::Exit);
  CHECK(!dcon::parse_action("fly"));
  CHECK(!dcon::parse_action(""));
}

TEST_CASE("response parsing: paper-shaped objects") {
  SUBCASE("single-quoted with a landmark list") {
    const auto step = dcon::parse_dcon_response(
        "{'Reason':'r','Action':'Explore','Landmark':['TV'],'Flag':'False'}");
    CHECK(step.action == NavAction::Explore);
    CHECK(step.landmarks == std::vector<std::string>{"TV"});
    CHECK(!step.flag);
    CHECK(step.reason == "r");
  }
  SUBCASE("scalar landmark, shuffled keys, boolean-ish flag") {
    const auto step = dcon::parse_dcon_response(
        "{'Action':'Approach','Landmark':'a bottle of water','Flag':'True','Reason':'thirst'}");
    CHECK(step.action == NavAction::Approach);
    CHECK(step.landmarks == std::vector<std::string>{"a bottle of water"});
    CHECK(step.flag);
  }
  SUBCASE("prose wrapping and a trailing comma still parse") {
    const auto step = dcon::parse_dcon_response(
        "Sure! Here is my prediction:\n"
        "{'Reason': 'the tv is a hint', 'Action': 'Explore', 'Landmark': ['TV',], 'Flag': 'False',}\n"
        "Good luck!");
    CHECK(step.action == NavAction::Explore);
    CHECK(step.landmarks == std::vector<std::string>{"TV"});
  }
  SUBCASE("bare booleans and double quotes") {
    const auto step = dcon::parse_dcon_response(
        R"({"Reason": "done", "Action": "Approach", "Landmark": ["sofa"], "Flag": true})");
    CHECK(step.flag);
  }
  SUBCASE("unknown action is a parse error") {
    CHECK_THROWS_AS(dcon::parse_dcon_response(
                        "{'Reason':'r','Action':'Teleport','Landmark':[],'Flag':'False'}"),
                    ParseError);
  }
  SUBCASE("no object at all is a parse error carrying the raw text") {
    try {
      dcon::parse_dcon_response("I cannot answer that.");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.raw() == "I cannot answer that.");
    }
  }
  SUBCASE("strict mode rejects single quotes but accepts JSON") {
    CHECK_THROWS_AS(dcon::parse_dcon_response(
                        "{'Reason':'r','Action':'Explore','Landmark':[],'Flag':'False'}", true),
                    ParseError);
    const auto step = dcon::parse_dcon_response(
        R"({"Reason":"r","Action":"Explore","Landmark":[],"Flag":"False"})", true);
    CHECK(step.action == NavAction::Explore);
  }
}

TEST_CASE("fuzzed perturbations of a golden response still parse") {
  // 50 perturbed variants: prose, whitespace, casing, quote style,
  // trailing commas, earlier malformed braces.
  std::mt19937 rng(71);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int k = 0; k < 50; ++k) {
    std::string body = coin(rng) ? "'" : "\"";
    const std::string q = body;
    std::string obj = "{" + q + "Reason" + q + ": " + q + "going to the TV" + q + ", ";
    if (coin(rng)) obj += q + "Action" + q + ": " + q + "Move Forward" + q + ", ";
    else obj += q + "action" + q + ": " + q + "move forward" + q + ", ";
    obj += q + "Landmark" + q + ": [" + q + "TV" + q + (coin(rng) ? "," : "") + "], ";
    obj += q + "Flag" + q + ": " + (coin(rng) ? q + "False" + q : "false");
    if (coin(rng)) obj += ",";
    obj += "}";
    std::string text;
    if (coin(rng)) text += "Let me think { hmm } first.\n";
    text += coin(rng) ? "Answer: " : "";
    text += obj;
    if (coin(rng)) text += "\nHope that helps.";
    const auto step = dcon::parse_dcon_response(text);
    CHECK(step.action == NavAction::MoveForward);
    CHECK(step.landmarks == std::vector<std::string>{"TV"});
    CHECK(!step.flag);
  }
}

TEST_CASE("render and parse are inverse over random steps") {
  std::mt19937 rng(73);
  for (int k = 0; k < 300; ++k) {
    const DconStep step = oracles::random_step(rng);
    const DconStep back = dcon::parse_dcon_response(dcon::render_dcon_response(step));
    CHECK(back == step);
  }
}

TEST_CASE("enter/exit rewrite") {
  SUBCASE("enter becomes approach with Doorway prepended") {
    DconStep step;
    step.action = NavAction::Enter;
    step.landmarks = {"bedroom"};
    const DconStep out = dcon::rewrite_enter_exit(step);
    CHECK(out.action == NavAction::Approach);
    CHECK(out.landmarks == std::vector<std::string>{"Doorway", "bedroom"});
  }
  SUBCASE("exit with no landmarks") {
    DconStep step;
    step.action = NavAction::Exit;
    const DconStep out = dcon::rewrite_enter_exit(step);
    CHECK(out.action == NavAction::Approach);
    CHECK(out.landmarks == std::vector<std::string>{"Doorway"});
  }
  SUBCASE("everything else is untouched") {
    DconStep step;
    step.action = NavAction::Explore;
    step.landmarks = {"TV"};
    CHECK(dcon::rewrite_enter_exit(step) == step);
  }
  SUBCASE("property: output never carries Enter/Exit, Doorway present iff rewritten") {
    std::mt19937 rng(79);
    for (int k = 0; k < 500; ++k) {
      const DconStep step = oracles::random_step(rng);
      const DconStep out = dcon::rewrite_enter_exit(step);
      CHECK(out.action != NavAction::Enter);
      CHECK(out.action != NavAction::Exit);
      const bool fired = step.action == NavAction::Enter || step.action == NavAction::Exit;
      if (fired) {
        REQUIRE(!out.landmarks.empty());
        CHECK(out.landmarks.front() == "Doorway");
        CHECK(out.action == NavAction::Approach);
      } else {
        CHECK(out == step);
      }
    }
  }
}

TEST_CASE("prompt assembly matches the golden files") {
  DconChain fresh;
  fresh.instruction = "Find the nearest coffee machine.";
  CHECK(dcon::build_dcon_prompt(fresh, {}, TaskKind::ObjectNav) ==
        golden("dcon_objectnav_fresh.txt"));
  CHECK(dcon::build_dcon_prompt(fresh, {}, TaskKind::VLN) == golden("dcon_vln_fresh.txt"));
  CHECK(dcon::build_dcon_prompt(fresh, {}, TaskKind::DemandNav) ==
        golden("dcon_demandnav_fresh.txt"));

  DconChain mid;
  mid.instruction = "Find the nearest coffee machine.";
  DconStep done;
  done.action = NavAction::Explore;
  done.landmarks = {"kitchen counter"};
  done.reason = "look for the kitchen";
  mid.history.push_back(done);
  DconStep cur;
  cur.action = NavAction::Approach;
  cur.landmarks = {"coffee machine"};
  mid.current = cur;
  CHECK(dcon::build_dcon_prompt(mid, {"tv", "sofa", "kitchen counter"}, TaskKind::ObjectNav) ==
        golden("dcon_objectnav_midway.txt"));
}

TEST_CASE("prompt structure invariants") {
  DconChain chain;
  chain.instruction = "Bring me to the printer";
  const std::string prompt =
      dcon::build_dcon_prompt(chain, {"tv", "sofa", "tv"}, TaskKind::ObjectNav);
  CHECK(prompt.find("## Robot Definition") != std::string::npos);
  CHECK(prompt.find("## Navigation Strategy") != std::string::npos);
  CHECK(prompt.find("## Prediction Format") != std::string::npos);
  CHECK(prompt.find("## Episode Information") != std::string::npos);
  CHECK(prompt.find("Bring me to the printer") != std::string::npos);
  // Sections come in the paper's order.
  CHECK(prompt.find("## Robot Definition") < prompt.find("## Navigation Strategy"));
  CHECK(prompt.find("## Navigation Strategy") < prompt.find("## Prediction Format"));
  CHECK(prompt.find("## Prediction Format") < prompt.find("## Episode Information"));
  // Duplicated labels appear once.
  CHECK(prompt.find("tv") == prompt.rfind("tv"));
  // Task kinds swap only the strategy paragraph.
  const std::string vln = dcon::build_dcon_prompt(chain, {"tv", "sofa", "tv"}, TaskKind::VLN);
  CHECK(vln != prompt);
  CHECK(vln.find("step-by-step route") != std::string::npos);
  CHECK(prompt.find("step-by-step route") == std::string::npos);
}

TEST_CASE("plan_next_step drives the chain") {
  DconChain chain;
  chain.instruction = "Find a sofa.";

  SUBCASE("scripted two-step plan advances one step per call") {
    DconStep explore;
    explore.action = NavAction::Explore;
    explore.landmarks = {"TV"};
    DconStep approach;
    approach.action = NavAction::Approach;
    approach.landmarks = {"sofa"};
    approach.flag = true;
    auto backend = dcon::scripted_backend({explore, approach});

    DconChain c1 = dcon::plan_next_step(chain, {}, TaskKind::ObjectNav, *backend);
    REQUIRE(c1.current.has_value());
    CHECK(c1.current->action == NavAction::Explore);
    CHECK(c1.history.empty());  // nothing executed yet

    DconChain c2 = dcon::plan_next_step(c1, {"tv"}, TaskKind::ObjectNav, *backend);
    CHECK(c2.current->action == NavAction::Approach);
    CHECK(c2.history.size() == 1);
    CHECK(c2.history[0].action == NavAction::Explore);

    // The script repeats its last step once exhausted.
    DconChain c3 = dcon::plan_next_step(c2, {"tv", "sofa"}, TaskKind::ObjectNav, *backend);
    CHECK(c3.current->action == NavAction::Approach);
    CHECK(c3.history.size() == 2);
  }

  SUBCASE("backends emitting Enter are rewritten before installation") {
    DconStep enter;
    enter.action = NavAction::Enter;
    enter.landmarks = {"bedroom"};
    auto backend = dcon::scripted_backend({enter});
    const DconChain c = dcon::plan_next_step(chain, {}, TaskKind::VLN, *backend);
    CHECK(c.current->action == NavAction::Approach);
    CHECK(c.current->landmarks.front() == "Doorway");
  }

  SUBCASE("deterministic backends give identical chains") {
    DconStep s;
    s.action = NavAction::Explore;
    auto b1 = dcon::scripted_backend({s});
    auto b2 = dcon::scripted_backend({s});
    const DconChain c1 = dcon::plan_next_step(chain, {"tv"}, TaskKind::ObjectNav, *b1);
    const DconChain c2 = dcon::plan_next_step(chain, {"tv"}, TaskKind::ObjectNav, *b2);
    CHECK(c1.current == c2.current);
    CHECK(c1.history == c2.history);
  }

  SUBCASE("history grows by exactly one per planning turn") {
    DconStep s;
    s.action = NavAction::MoveForward;
    auto backend = dcon::scripted_backend({s});
    DconChain c = dcon::plan_next_step(chain, {}, TaskKind::VLN, *backend);
    for (std::size_t expected = 1; expected <= 5; ++expected) {
      c = dcon::plan_next_step(c, {}, TaskKind::VLN, *backend);
      CHECK(c.history.size() == expected);
    }
  }

  SUBCASE("unparseable replies exhaust retries into PlannerFailure") {
    class Garbage final : public dcon::PlannerBackend {
     public:
      int calls = 0;
      std::string plan_step(const std::string&) override {
        ++calls;
        return "no object here";
      }
    };
    Garbage backend;
    CHECK_THROWS_AS(dcon::plan_next_step(chain, {}, TaskKind::ObjectNav, backend), PlannerFailure);
    CHECK(backend.calls == 4);  // 1 + max_parse_retries
  }
}

TEST_CASE("scripted backend rejects an empty script") {
  CHECK_THROWS_AS(dcon::scripted_backend({}), std::invalid_argument);
}
