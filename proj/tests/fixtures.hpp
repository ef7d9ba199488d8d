#pragma once

#include "alienzoo/data_gen.hpp"
#include "alienzoo/tree_model.hpp"

namespace alienzoo::testing {

struct TrainedModel {
  GrowthModel model;
  ModelMetrics test_metrics;
};

inline constexpr std::uint64_t kFixtureSeed = 20220101;

/// Balanced grid (1 replicate), 80/20 split, tree at the experiment's production depth
/// (7 for Exp1, 5 for Exp2). Built once per process.
const TrainedModel& trained_model(Experiment e);

}  // namespace alienzoo::testing

#include <memory>

#include "alienzoo/game.hpp"

namespace alienzoo::testing {

std::shared_ptr<const GrowthModel> shared_model(Experiment e);
Game make_game(Experiment e, Timings timings = {});

/// A valid survey that passes every quality screen (catch item answered correctly).
SurveyResponse clean_survey();

/// Plays a full session with one fixed choice, correct attention answers and a clean
/// survey, each step timed to respect every delay.
Session play_fixed(const Game& game, Condition condition, const PlantVector& choice,
                   std::uint64_t seed = 1);

}  // namespace alienzoo::testing
