#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "alienzoo/game.hpp"

namespace alienzoo {

enum class BotKind { Random, CfeFollower, Greedy, StraightLiner, Speeder };

std::string to_string(BotKind k);
/// "random", "cfe-follower", "greedy", "straight-liner", "speeder".
BotKind bot_kind_from_string(const std::string& s);

struct BotPolicy {
  BotKind kind = BotKind::Random;
  std::int64_t min_decision_ms = 2500;
  std::int64_t max_decision_ms = 8000;
  bool attentive = true;                    // false: every attention answer is wrong
  std::optional<PlantVector> fixed_choice;  // StraightLiner; drawn at random when unset
};

/// Policy with the kind's default decision-time range ([500, 1900] ms for Speeder).
BotPolicy make_policy(BotKind kind);

/// What the client shows at a Choice scene.
struct Observation {
  int trial = 0;
  int pack_size = 0;
  std::vector<ChoiceSummary> history;
  std::optional<FeedbackBlock> last_feedback;
};

struct Decision {
  PlantVector choice;
  std::int64_t decision_time_ms = 0;
};

class Bot {
 public:
  /// Throws ConfigError for a CfeFollower in the Control condition.
  Bot(BotPolicy policy, Condition condition, std::uint64_t seed);

  Decision next_choice(const Observation& obs);
  int attention_answer(int pack_size);
  SurveyResponse survey();

  const BotPolicy& policy() const { return policy_; }

 private:
  PlantVector random_vector();
  PlantVector greedy_choice(const Observation& obs);

  BotPolicy policy_;
  Condition condition_;
  std::mt19937_64 rng_;
  std::optional<PlantVector> incumbent_;
};

/// Plays one full session (game, attention checks, templated survey) against `game`,
/// with a simulated clock that respects every mandated delay.
Session play_session(const Game& game, const BotPolicy& policy, Condition condition,
                     std::string id, std::uint64_t seed);

/// n completed sessions; deterministic under `seed`.
std::vector<Session> run_cohort(const BotPolicy& policy, int n, const Game& game,
                                Condition condition, std::uint64_t seed);

}  // namespace alienzoo
