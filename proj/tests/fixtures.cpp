#include "fixtures.hpp"

#include <map>
#include <mutex>

namespace alienzoo::testing {

namespace {

TrainedModel train(Experiment e) {
  const auto grid = generate_grid(e, 1);
  const auto balanced = smote_balance(grid, SmoteOptions{10, 5, kFixtureSeed});
  auto [train, test] = train_test_split(balanced, 0.2, kFixtureSeed);
  TreeOptions opts;
  opts.max_depth = e == Experiment::Exp1 ? 7 : 5;
  auto model = fit_tree(train, opts);
  const auto metrics = evaluate(model, test);
  model.set_metrics(metrics);
  return {std::move(model), metrics};
}

}  // namespace

const TrainedModel& trained_model(Experiment e) {
  static std::mutex mu;
  static std::map<Experiment, TrainedModel> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(e);
  if (it == cache.end()) it = cache.emplace(e, train(e)).first;
  return it->second;
}

}  // namespace alienzoo::testing

namespace alienzoo::testing {

std::shared_ptr<const GrowthModel> shared_model(Experiment e) {
  static std::mutex mu;
  static std::map<Experiment, std::shared_ptr<const GrowthModel>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[e];
  if (!slot) slot = std::make_shared<const GrowthModel>(trained_model(e).model);
  return slot;
}

Game make_game(Experiment e, Timings timings) {
  GameConfig cfg;
  cfg.experiment = static_cast<int>(e);
  cfg.model = shared_model(e);
  cfg.timings = timings;
  return Game(cfg);
}

SurveyResponse clean_survey() {
  SurveyResponse r;
  r.relevant_plants = PlantSelection{false, {2, 4}};
  r.irrelevant_plants = PlantSelection{false, {1, 3, 5}};
  r.likert = {{3, 4}, {4, 2}, {5, 4}, {6, 3}, {7, kPreferNotToAnswer}, {8, 2}, {9, 5}, {10, 4}};
  r.age_band = "25-34";
  r.gender = "prefer_not_to_answer";
  return r;
}

Session play_fixed(const Game& game, Condition condition, const PlantVector& choice,
                   std::uint64_t seed) {
  std::int64_t now = 0;
  auto s = game.create_session("fixed-" + std::to_string(seed), condition, seed, now);
  now += 21'000;
  game.start(s, now);
  while (s.phase != Phase::Survey) {
    switch (s.phase) {
      case Phase::Choice:
        now += 5'000;
        game.submit_feeding(s, choice, 5'000, now);
        break;
      case Phase::Feedback:
        now += 11'000;
        game.continue_after_feedback(s, now);
        break;
      case Phase::Attention:
        now += 4'000;
        game.submit_attention(s, s.pack_size, now);
        break;
      default: throw std::logic_error("unexpected phase");
    }
  }
  now += 30'000;
  game.submit_survey(s, clean_survey(), now);
  return s;
}

}  // namespace alienzoo::testing
