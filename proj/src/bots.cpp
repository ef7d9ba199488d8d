#include "alienzoo/bots.hpp"

#include <array>

#include "alienzoo/errors.hpp"

namespace alienzoo {

namespace {

constexpr std::array<std::pair<BotKind, const char*>, 5> kKindNames{{
    {BotKind::Random, "random"},
    {BotKind::CfeFollower, "cfe-follower"},
    {BotKind::Greedy, "greedy"},
    {BotKind::StraightLiner, "straight-liner"},
    {BotKind::Speeder, "speeder"},
}};

}  // namespace

std::string to_string(BotKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "unknown";
}

BotKind bot_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames)
    if (s == name) return kind;
  throw ConfigError("unknown bot policy '" + s + "'");
}

BotPolicy make_policy(BotKind kind) {
  BotPolicy p;
  p.kind = kind;
  if (kind == BotKind::Speeder) {
    p.min_decision_ms = 500;
    p.max_decision_ms = 1900;
  }
  return p;
}

Bot::Bot(BotPolicy policy, Condition condition, std::uint64_t seed)
    : policy_(std::move(policy)), condition_(condition), rng_(seed) {
  if (policy_.kind == BotKind::CfeFollower && condition_ != Condition::Cfe) {
    throw ConfigError("cfe-follower bots need the cfe condition");
  }
  if (policy_.min_decision_ms < 0 || policy_.max_decision_ms < policy_.min_decision_ms) {
    throw ConfigError("invalid decision-time range");
  }
  if (policy_.kind == BotKind::StraightLiner && !policy_.fixed_choice) {
    policy_.fixed_choice = random_vector();
  }
}

PlantVector Bot::random_vector() {
  std::uniform_int_distribution<int> leaves(0, kMaxLeaves);
  std::array<int, kNumPlants> v{};
  for (auto& x : v) x = leaves(rng_);
  return PlantVector(v);
}

PlantVector Bot::greedy_choice(const Observation& obs) {
  if (!incumbent_) {
    incumbent_ = random_vector();
    return *incumbent_;
  }
  // A probe is kept only if it made the pack grow.
  const auto& last = obs.history.back();
  if (last.choice != *incumbent_ && last.pack_after > last.pack_before) incumbent_ = last.choice;
  std::uniform_int_distribution<int> plant(0, kNumPlants - 1);
  std::bernoulli_distribution up(0.5);
  auto v = incumbent_->leaves();
  const int i = plant(rng_);
  int step = up(rng_) ? 1 : -1;
  if (v[i] + step < 0 || v[i] + step > kMaxLeaves) step = -step;
  v[i] += step;
  return PlantVector(v);
}

Decision Bot::next_choice(const Observation& obs) {
  std::uniform_int_distribution<std::int64_t> dt(policy_.min_decision_ms, policy_.max_decision_ms);
  PlantVector choice;
  switch (policy_.kind) {
    case BotKind::Random:
    case BotKind::Speeder:
      choice = random_vector();
      break;
    case BotKind::StraightLiner:
      choice = *policy_.fixed_choice;
      break;
    case BotKind::Greedy:
      choice = greedy_choice(obs);
      break;
    case BotKind::CfeFollower:
      if (!obs.last_feedback || obs.last_feedback->entries.empty()) {
        choice = random_vector();
      } else {
        const auto& latest = obs.last_feedback->entries.back();
        choice = latest.cfe ? latest.cfe->suggestion : latest.choice;
      }
      break;
  }
  return {choice, dt(rng_)};
}

int Bot::attention_answer(int pack_size) {
  return policy_.attentive ? pack_size : pack_size + 1;
}

SurveyResponse Bot::survey() {
  SurveyResponse r;
  r.relevant_plants = PlantSelection{false, {2, 4}};
  r.irrelevant_plants = PlantSelection{false, {1, 3, 5}};
  // Mixed valence; catch item answered as instructed.
  r.likert = {{3, 4}, {4, 2}, {5, 3}, {6, 4}, {7, kPreferNotToAnswer}, {8, 2}, {9, 4}, {10, 3}};
  r.age_band = "25-34";
  r.gender = "prefer_not_to_answer";
  return r;
}

Session play_session(const Game& game, const BotPolicy& policy, Condition condition,
                     std::string id, std::uint64_t seed) {
  Bot bot(policy, condition, seed);
  const auto& t = game.config().timings;
  std::int64_t now = 0;
  auto s = game.create_session(std::move(id), condition, seed, now);
  now += t.start_delay_s * 1000 + 1500;
  game.start(s, now);

  Observation obs;
  while (s.phase != Phase::Survey) {
    switch (s.phase) {
      case Phase::Choice: {
        obs.trial = s.trial_index;
        obs.pack_size = s.pack_size;
        const auto d = bot.next_choice(obs);
        now += d.decision_time_ms;
        const auto rec = game.submit_feeding(s, d.choice, d.decision_time_ms, now);
        obs.history.push_back({rec.trial, rec.choice, rec.pack_before, rec.pack_after});
        now += t.progress_s * 1000;
        break;
      }
      case Phase::Feedback:
        obs.last_feedback = game.feedback_payload(s);
        now += t.continue_delay_s * 1000 + 2000;
        game.continue_after_feedback(s, now);
        break;
      case Phase::Attention:
        now += 3000;
        game.submit_attention(s, bot.attention_answer(s.pack_size), now);
        break;
      default:
        throw std::logic_error("bot reached unexpected phase " + to_string(s.phase));
    }
  }
  now += 60'000;
  game.submit_survey(s, bot.survey(), now);
  return s;
}

std::vector<Session> run_cohort(const BotPolicy& policy, int n, const Game& game,
                                Condition condition, std::uint64_t seed) {
  if (n < 1) throw ConfigError("cohort size must be at least 1");
  std::mt19937_64 seeds(seed);
  std::vector<Session> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(play_session(game, policy, condition,
                               to_string(policy.kind) + "-" + std::to_string(seed) + "-" +
                                   std::to_string(i + 1),
                               seeds()));
  }
  return out;
}

}  // namespace alienzoo
