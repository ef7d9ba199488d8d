#include <doctest.h>

#include <random>

#include "alienzoo/errors.hpp"
#include "alienzoo/game.hpp"
#include "alienzoo/game_json.hpp"
#include "fixtures.hpp"

using namespace alienzoo;
using alienzoo::testing::clean_survey;
using alienzoo::testing::make_game;
using alienzoo::testing::play_fixed;

namespace {

const PlantVector kZero({0, 0, 0, 0, 0});
const PlantVector kExp2Best({0, 5, 0, 1, 0});

bool contains_key(const nlohmann::json& j, const std::string& key) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k == key || contains_key(v, key)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (contains_key(v, key)) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("growth_to_delta") {
  CHECK(growth_to_delta(0.1) == -10);
  CHECK(growth_to_delta(1.0) == 0);
  CHECK(growth_to_delta(1.9) == 10);
  CHECK(growth_to_delta(1.18) == 2);
  CHECK(growth_to_delta(1.36) == 4);
  CHECK(growth_to_delta(1.0 + 0.0451) == 1);
  CHECK(growth_to_delta(1.0 + 0.0449) == 0);
  CHECK(growth_to_delta(1.0 - 0.0451) == -1);
  CHECK_THROWS_AS(growth_to_delta(0.05), ValidationError);
  CHECK_THROWS_AS(growth_to_delta(2.0), ValidationError);
}

TEST_CASE("create_session") {
  const auto game = make_game(Experiment::Exp2);
  const auto a = game.create_session("a", Condition::Cfe, 99);
  const auto b = game.create_session("b", Condition::Cfe, 99);
  CHECK(a.plant_display_order == b.plant_display_order);
  CHECK(a.pack_size == 20);
  CHECK(a.trial_index == 1);
  CHECK(a.phase == Phase::Instructions);
  CHECK(a.condition == Condition::Cfe);
  CHECK(game.create_session("c", Condition::Control, 1).condition == Condition::Control);

  std::set<std::array<int, 5>> orders;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto order = game.create_session("x", Condition::Control, seed).plant_display_order;
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::array<int, 5>{0, 1, 2, 3, 4});
    orders.insert(order);
  }
  CHECK(orders.size() > 10);

  GameConfig bad;
  bad.experiment = 3;
  bad.model = testing::shared_model(Experiment::Exp2);
  CHECK_THROWS_AS(Game(bad).create_session("z", Condition::Control, 1), ValidationError);
  bad.experiment = 1;  // model trained for Exp2
  CHECK_THROWS_AS(Game(bad).create_session("z", Condition::Control, 1), ValidationError);
}

TEST_CASE("pack dynamics") {
  const auto game = make_game(Experiment::Exp2);
  auto s = game.create_session("p", Condition::Control, 1);
  game.start(s, 20'000);
  const auto t1 = game.submit_feeding(s, kZero, 3000, 30'000);
  CHECK(t1.growth == doctest::Approx(0.1));
  CHECK(t1.pack_before == 20);
  CHECK(t1.pack_after == 10);
  game.submit_feeding(s, kZero, 3000, 40'000);
  CHECK(s.pack_size == 2);  // 10 - 10 floored at 2
  game.continue_after_feedback(s, 60'000);
  const auto t3 = game.submit_feeding(s, kZero, 3000, 70'000);
  CHECK(t3.pack_before == 2);
  CHECK(t3.pack_after == 2);
}

TEST_CASE("scripted session visits feedback and attention at the right trials") {
  for (auto condition : {Condition::Control, Condition::Cfe}) {
    const auto game = make_game(Experiment::Exp2);
    auto s = game.create_session("script", condition, 5);
    std::int64_t now = 25'000;
    game.start(s, now);
    std::vector<int> feedback_after, attention_after;
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> leaf(0, 6);
    while (s.phase != Phase::Survey) {
      now += 12'000;
      if (s.phase == Phase::Choice) {
        const PlantVector choice({leaf(rng), leaf(rng), leaf(rng), leaf(rng), leaf(rng)});
        game.submit_feeding(s, choice, 4000, now);
      } else if (s.phase == Phase::Feedback) {
        feedback_after.push_back(static_cast<int>(s.trials.size()));
        const auto block = game.feedback_payload(s);
        CHECK(block.entries.size() == 2);
        CHECK(block.entries[0].trial == static_cast<int>(s.trials.size()) - 1);
        CHECK(block.entries[1].trial == static_cast<int>(s.trials.size()));
        CHECK(block.continue_delay_s == 10);
        const auto j = feedback_to_json(block);
        if (condition == Condition::Control) {
          CHECK_FALSE(contains_key(j, "suggestion"));
          CHECK_FALSE(contains_key(j, "near_optimal"));
        } else {
          for (const auto& e : j["entries"]) {
            CHECK((e.contains("suggestion") != e.contains("near_optimal")));
          }
        }
        game.continue_after_feedback(s, now);
      } else if (s.phase == Phase::Attention) {
        attention_after.push_back(static_cast<int>(s.trials.size()));
        game.submit_attention(s, s.pack_size, now);
      } else {
        FAIL("unexpected phase " << to_string(s.phase));
      }
    }
    CHECK(feedback_after == std::vector<int>{2, 4, 6, 8, 10, 12});
    CHECK(attention_after == std::vector<int>{3, 7});
    CHECK(s.trials.size() == 12);
    CHECK(s.attention.size() == 2);
    CHECK(s.timing_flags.empty());
    CHECK(replay_pack_size(s) == s.pack_size);

    const nlohmann::json history = s;
    if (condition == Condition::Control) {
      CHECK_FALSE(contains_key(history, "cfe_shown"));
    }
  }
}

TEST_CASE("CFE feedback at the optimum shows near-optimal messages only") {
  const auto game = make_game(Experiment::Exp2);
  auto s = game.create_session("opt", Condition::Cfe, 2);
  game.start(s, 20'000);
  game.submit_feeding(s, kExp2Best, 3000, 30'000);
  game.submit_feeding(s, kExp2Best, 3000, 40'000);
  const auto block = game.feedback_payload(s);
  REQUIRE(block.entries.size() == 2);
  CHECK(block.show_cfe);
  CHECK_FALSE(block.entries[0].cfe);
  CHECK_FALSE(block.entries[1].cfe);
  const auto j = feedback_to_json(block);
  CHECK(j["entries"][0]["near_optimal"] == true);
  CHECK(j["entries"][1]["near_optimal"] == true);

  game.continue_after_feedback(s, 60'000);
  game.submit_feeding(s, kZero, 3000, 70'000);
  CHECK(s.phase == Phase::Attention);
  game.submit_attention(s, s.pack_size, 80'000);
  game.submit_feeding(s, kZero, 3000, 90'000);
  const auto block2 = game.feedback_payload(s);
  REQUIRE(block2.entries.size() == 2);
  CHECK(block2.block == 2);
  CHECK(block2.entries[0].trial == 3);
  CHECK(block2.entries[1].trial == 4);
  REQUIRE(block2.entries[0].cfe);
  CHECK(block2.entries[0].cfe == compute_cfe(game.model(), kZero, {}));
}

TEST_CASE("attention checks") {
  const auto game = make_game(Experiment::Exp2);
  auto s = game.create_session("att", Condition::Control, 3);
  game.start(s, 20'000);
  std::int64_t now = 20'000;
  for (int i = 0; i < 3; ++i) {
    if (s.phase == Phase::Feedback) game.continue_after_feedback(s, now += 10'000);
    game.submit_feeding(s, kExp2Best, 3000, now += 10'000);
  }
  REQUIRE(s.phase == Phase::Attention);
  const int pack = s.pack_size;
  CHECK(game.scene_descriptor(s, now + 5'000).kind == SceneKind::Attention);
  const auto wrong = game.submit_attention(s, pack + 6, now += 5'000);
  CHECK_FALSE(wrong.correct);
  CHECK(wrong.after_trial == 3);
  CHECK(s.phase == Phase::Choice);
  CHECK(s.trial_index == 4);
  CHECK_THROWS_AS(game.submit_attention(s, pack, now), ProtocolError);

  auto s2 = game.create_session("att2", Condition::Control, 3);
  game.start(s2, 20'000);
  now = 20'000;
  for (int i = 0; i < 3; ++i) {
    if (s2.phase == Phase::Feedback) game.continue_after_feedback(s2, now += 10'000);
    game.submit_feeding(s2, kExp2Best, 3000, now += 10'000);
  }
  CHECK(game.submit_attention(s2, s2.pack_size, now + 4000).correct);
}

TEST_CASE("protocol errors") {
  const auto game = make_game(Experiment::Exp2);
  auto s = game.create_session("err", Condition::Control, 4);
  CHECK_THROWS_AS(game.submit_feeding(s, kZero, 1000, 0), ProtocolError);
  CHECK_THROWS_AS(game.feedback_payload(s), ProtocolError);
  game.start(s, 20'000);
  CHECK_THROWS_AS(game.start(s, 20'000), ProtocolError);
  game.submit_feeding(s, kZero, 1000, 30'000);
  game.submit_feeding(s, kZero, 1000, 40'000);
  CHECK(s.phase == Phase::Feedback);
  CHECK_THROWS_AS(game.submit_feeding(s, kZero, 1000, 50'000), ProtocolError);
  CHECK_THROWS_AS(game.submit_survey(s, clean_survey(), 50'000), ProtocolError);
  game.continue_after_feedback(s, 60'000);
  CHECK_THROWS_AS(game.submit_feeding(s, kZero, -5, 70'000), ValidationError);
  CHECK(s.trials.size() == 2);
}

TEST_CASE("survey submission") {
  const auto game = make_game(Experiment::Exp2);
  auto s = play_fixed(game, Condition::Control, kExp2Best);
  CHECK(s.phase == Phase::Done);
  REQUIRE(s.survey);
  CHECK(s.survey->likert.at(kCatchItem) == kPreferNotToAnswer);

  // Replay up to the survey and try incomplete responses.
  auto r = clean_survey();
  r.likert.erase(9);
  try {
    validate_survey(r);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.fields() == std::vector<std::string>{"item9"});
  }
  auto r2 = clean_survey();
  r2.relevant_plants.reset();
  r2.gender = "";
  try {
    validate_survey(r2);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.fields() == std::vector<std::string>{"item1", "gender"});
  }
  auto r3 = clean_survey();
  r3.irrelevant_plants = PlantSelection{false, {0, 6}};
  CHECK_THROWS_AS(validate_survey(r3), ValidationError);
  auto r4 = clean_survey();
  r4.relevant_plants = PlantSelection{true, {}};
  CHECK_NOTHROW(validate_survey(r4));
}

TEST_CASE("scene descriptors") {
  const auto game = make_game(Experiment::Exp2);
  auto s = game.create_session("scene", Condition::Cfe, 6, 1'000);
  auto d = game.scene_descriptor(s, 1'000);
  CHECK(d.kind == SceneKind::Instructions);
  CHECK(d.delay_s == 20);
  CHECK(scene_to_json(d)["start_delay_s"] == 20);
  CHECK(d.plant_display_order == s.plant_display_order);
  CHECK_FALSE(scene_to_json(d).contains("condition"));

  game.start(s, 25'000);
  CHECK(game.scene_descriptor(s, 25'000).kind == SceneKind::Choice);
  game.submit_feeding(s, kZero, 3000, 30'000);
  d = game.scene_descriptor(s, 30'000);
  CHECK(d.kind == SceneKind::Progress);
  CHECK(d.delay_s == 3);
  CHECK(scene_to_json(d)["duration_s"] == 3);
  CHECK(d.next == SceneKind::Choice);
  REQUIRE(d.previous);
  CHECK(d.previous->pack_before == 20);
  CHECK(d.previous->pack_after == 10);
  d = game.scene_descriptor(s, 33'000);
  CHECK(d.kind == SceneKind::Choice);
  CHECK(d.trial == 2);

  game.submit_feeding(s, kZero, 3000, 40'000);
  CHECK(game.scene_descriptor(s, 41'000).next == SceneKind::Feedback);
  d = game.scene_descriptor(s, 45'000);
  CHECK(d.kind == SceneKind::Feedback);
  CHECK(d.delay_s == 10);

  const auto done = play_fixed(game, Condition::Cfe, kExp2Best, 6);
  CHECK(game.scene_descriptor(done, 10'000'000).kind == SceneKind::Payout);
}

TEST_CASE("early submissions are flagged, not rejected") {
  const auto game = make_game(Experiment::Exp2);
  auto s = game.create_session("early", Condition::Control, 7, 0);
  game.start(s, 5'000);
  REQUIRE(s.timing_flags.size() == 1);
  CHECK(s.timing_flags[0].kind == "early_start");
  CHECK(s.timing_flags[0].elapsed_ms == 5'000);
  game.submit_feeding(s, kZero, 100, 6'000);
  game.submit_feeding(s, kZero, 100, 7'000);
  CHECK(s.timing_flags.back().kind == "early_feed");
  game.continue_after_feedback(s, 8'000);
  CHECK(s.timing_flags.back().kind == "early_continue");
  CHECK(s.phase == Phase::Choice);
}

TEST_CASE("random sessions: replay, floor, canonical order, JSON round trip") {
  const auto game = make_game(Experiment::Exp1);
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> leaf(0, 6);
  for (int n = 0; n < 40; ++n) {
    const auto cond = n % 2 ? Condition::Cfe : Condition::Control;
    auto s = game.create_session("r" + std::to_string(n), cond, n, 0);
    std::int64_t now = 20'000;
    game.start(s, now);
    std::vector<PlantVector> played;
    while (s.phase != Phase::Survey) {
      now += 15'000;
      if (s.phase == Phase::Choice) {
        PlantVector c({leaf(rng), leaf(rng), leaf(rng), leaf(rng), leaf(rng)});
        played.push_back(c);
        game.submit_feeding(s, c, 3000 + n, now);
      } else if (s.phase == Phase::Feedback) {
        game.continue_after_feedback(s, now);
      } else {
        game.submit_attention(s, leaf(rng) + 10, now);
      }
    }
    game.submit_survey(s, clean_survey(), now + 1);
    REQUIRE(s.trials.size() == 12);
    for (std::size_t i = 0; i < s.trials.size(); ++i) {
      const auto& t = s.trials[i];
      CHECK(t.choice == played[i]);
      CHECK(t.pack_after == std::max(2, t.pack_before + growth_to_delta(t.growth)));
      CHECK(t.pack_after >= 2);
      if (cond == Condition::Control) CHECK_FALSE(t.cfe_shown);
    }
    CHECK(replay_pack_size(s) == s.pack_size);

    const nlohmann::json j = s;
    const auto back = j.get<Session>();
    CHECK(nlohmann::json(back).dump() == j.dump());
  }
}
