#include "alienzoo/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "alienzoo/errors.hpp"

namespace alienzoo {

namespace {

bool is_attention_trial(int trial) {
  return std::find(kAttentionAfterTrials.begin(), kAttentionAfterTrials.end(), trial) !=
         kAttentionAfterTrials.end();
}

}  // namespace

std::string to_string(Condition c) { return c == Condition::Control ? "control" : "cfe"; }

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Instructions: return "instructions";
    case Phase::Choice: return "choice";
    case Phase::Feedback: return "feedback";
    case Phase::Attention: return "attention";
    case Phase::Survey: return "survey";
    case Phase::Done: return "done";
  }
  return "?";
}

std::string to_string(SceneKind k) {
  switch (k) {
    case SceneKind::Instructions: return "instructions";
    case SceneKind::Choice: return "choice";
    case SceneKind::Progress: return "progress";
    case SceneKind::Feedback: return "feedback";
    case SceneKind::Attention: return "attention";
    case SceneKind::Survey: return "survey";
    case SceneKind::Payout: return "payout";
  }
  return "?";
}

Condition condition_from_string(const std::string& s) {
  if (s == "control") return Condition::Control;
  if (s == "cfe") return Condition::Cfe;
  throw ParseError("unknown condition '" + s + "'");
}

Phase phase_from_string(const std::string& s) {
  for (auto p : {Phase::Instructions, Phase::Choice, Phase::Feedback, Phase::Attention,
                 Phase::Survey, Phase::Done}) {
    if (to_string(p) == s) return p;
  }
  throw ParseError("unknown phase '" + s + "'");
}

int growth_to_delta(double growth) {
  constexpr double slack = 1e-9;
  if (!(growth >= kMinGrowth - slack && growth <= kMaxGrowth + slack)) {
    throw ValidationError("growth " + std::to_string(growth) + " outside [0.1, 1.9]", {"growth"});
  }
  // std::round rounds halves away from zero.
  const auto delta = static_cast<int>(std::round((growth - 1.0) / 0.09));
  return std::clamp(delta, -10, 10);
}

const std::vector<std::string>& age_bands() {
  static const std::vector<std::string> bands{"18-24", "25-34", "35-44", "45-54", "55-64",
                                              "65+",   "prefer_not_to_answer"};
  return bands;
}

const std::vector<std::string>& genders() {
  static const std::vector<std::string> g{"female",
                                          "male",
                                          "transgender_female",
                                          "transgender_male",
                                          "non_binary",
                                          "not_listed",
                                          "prefer_not_to_answer"};
  return g;
}

void validate_survey(const SurveyResponse& r) {
  std::vector<std::string> bad;
  auto check_selection = [&](const std::optional<PlantSelection>& sel, const char* item) {
    if (!sel) {
      bad.emplace_back(item);
      return;
    }
    const bool out_of_range = std::any_of(sel->plants.begin(), sel->plants.end(),
                                          [](int p) { return p < 1 || p > kNumPlants; });
    if (out_of_range || (sel->dont_know && !sel->plants.empty())) bad.emplace_back(item);
  };
  check_selection(r.relevant_plants, "item1");
  check_selection(r.irrelevant_plants, "item2");
  for (int item = 3; item <= 10; ++item) {
    auto it = r.likert.find(item);
    if (it == r.likert.end() || it->second < kPreferNotToAnswer || it->second > 5) {
      bad.push_back("item" + std::to_string(item));
    }
  }
  for (const auto& [item, value] : r.likert) {
    if (item < 3 || item > 10) bad.push_back("item" + std::to_string(item));
  }
  const auto& bands = age_bands();
  if (std::find(bands.begin(), bands.end(), r.age_band) == bands.end()) bad.emplace_back("age");
  const auto& g = genders();
  if (std::find(g.begin(), g.end(), r.gender) == g.end()) bad.emplace_back("gender");
  if (!bad.empty()) {
    std::string msg = "survey response missing or invalid:";
    for (const auto& b : bad) msg += " " + b;
    throw ValidationError(msg, bad);
  }
}

Game::Game(GameConfig config) : config_(std::move(config)) {
  if (!config_.model) throw ValidationError("game requires a trained model", {"model"});
  config_.cfe.validate();
  const auto& t = config_.timings;
  if (t.start_delay_s <= 0 || t.continue_delay_s <= 0 || t.progress_s <= 0) {
    throw ValidationError("timings must be positive", {"timings"});
  }
}

void Game::enter(Session& s, Phase p, std::int64_t now_ms) const {
  s.phase = p;
  s.phase_entered_ms = now_ms;
}

void Game::require_phase(const Session& s, Phase expected, const char* op) const {
  if (s.phase != expected) {
    throw ProtocolError(std::string(op) + " requires phase " + to_string(expected) +
                        ", session is in " + to_string(s.phase));
  }
}

void Game::flag_if_early(Session& s, const char* kind, std::int64_t since_ms, int delay_s,
                         std::int64_t now_ms) const {
  const auto elapsed = now_ms - since_ms;
  if (elapsed < static_cast<std::int64_t>(delay_s) * 1000) {
    s.timing_flags.push_back({kind, s.trial_index, elapsed});
  }
}

Session Game::create_session(std::string id, Condition condition, std::uint64_t seed,
                             std::int64_t now_ms) const {
  const auto experiment = experiment_from_int(config_.experiment);
  if (experiment != model().experiment()) {
    throw ValidationError("model was trained for " + std::string(to_string(model().experiment())) +
                              " but the study runs " + std::string(to_string(experiment)),
                          {"experiment"});
  }
  Session s;
  s.id = std::move(id);
  s.condition = condition;
  s.experiment = experiment;
  s.seed = seed;
  std::iota(s.plant_display_order.begin(), s.plant_display_order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(s.plant_display_order.begin(), s.plant_display_order.end(), rng);
  s.created_at_ms = now_ms;
  s.phase_entered_ms = now_ms;
  return s;
}

void Game::start(Session& s, std::int64_t now_ms) const {
  require_phase(s, Phase::Instructions, "start");
  flag_if_early(s, "early_start", s.phase_entered_ms, config_.timings.start_delay_s, now_ms);
  enter(s, Phase::Choice, now_ms);
}

TrialRecord Game::submit_feeding(Session& s, const PlantVector& choice,
                                 std::int64_t decision_time_ms, std::int64_t now_ms) const {
  require_phase(s, Phase::Choice, "feed");
  if (static_cast<int>(s.trials.size()) >= kTrialsPerSession) {
    throw ProtocolError("all " + std::to_string(kTrialsPerSession) + " trials already played");
  }
  if (decision_time_ms < 0) {
    throw ValidationError("decision_time_ms must be nonnegative", {"decision_time_ms"});
  }
  if (!s.trials.empty()) {
    flag_if_early(s, "early_feed", s.trials.back().submitted_at_ms, config_.timings.progress_s,
                  now_ms);
  }

  TrialRecord rec;
  rec.trial = static_cast<int>(s.trials.size()) + 1;
  rec.choice = choice;
  rec.growth = model().predict(choice);
  rec.delta = growth_to_delta(rec.growth);
  rec.pack_before = s.pack_size;
  rec.pack_after = std::max(kMinPackSize, s.pack_size + rec.delta);
  rec.decision_time_ms = decision_time_ms;
  rec.submitted_at_ms = now_ms;
  s.pack_size = rec.pack_after;
  s.trials.push_back(rec);

  if (rec.trial % 2 == 0) {
    if (s.condition == Condition::Cfe) {
      // Cached now so the feedback scene is read-only.
      for (auto i = s.trials.size() - 2; i < s.trials.size(); ++i) {
        s.trials[i].cfe_shown = compute_cfe(model(), s.trials[i].choice, config_.cfe);
      }
      rec.cfe_shown = s.trials.back().cfe_shown;
    }
    enter(s, Phase::Feedback, now_ms);
  } else if (is_attention_trial(rec.trial)) {
    enter(s, Phase::Attention, now_ms);
  } else {
    s.trial_index = rec.trial + 1;
    enter(s, Phase::Choice, now_ms);
  }
  return rec;
}

FeedbackBlock Game::feedback_payload(const Session& s) const {
  require_phase(s, Phase::Feedback, "feedback");
  FeedbackBlock block;
  block.block = static_cast<int>(s.trials.size()) / 2;
  block.show_cfe = s.condition == Condition::Cfe;
  block.continue_delay_s = config_.timings.continue_delay_s;
  for (auto i = s.trials.size() - 2; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    FeedbackEntry e{t.trial, t.choice, t.pack_before, t.pack_after, t.delta, std::nullopt};
    if (block.show_cfe) e.cfe = t.cfe_shown;
    block.entries.push_back(std::move(e));
  }
  return block;
}

void Game::continue_after_feedback(Session& s, std::int64_t now_ms) const {
  require_phase(s, Phase::Feedback, "continue");
  flag_if_early(s, "early_continue", s.phase_entered_ms, config_.timings.continue_delay_s, now_ms);
  if (static_cast<int>(s.trials.size()) >= kTrialsPerSession) {
    enter(s, Phase::Survey, now_ms);
  } else {
    s.trial_index = static_cast<int>(s.trials.size()) + 1;
    enter(s, Phase::Choice, now_ms);
  }
}

AttentionRecord Game::submit_attention(Session& s, int answer, std::int64_t now_ms) const {
  require_phase(s, Phase::Attention, "attention");
  AttentionRecord rec{s.trials.back().trial, answer, answer == s.pack_size};
  s.attention.push_back(rec);
  s.trial_index = static_cast<int>(s.trials.size()) + 1;
  enter(s, Phase::Choice, now_ms);
  return rec;
}

void Game::submit_survey(Session& s, const SurveyResponse& response, std::int64_t now_ms) const {
  require_phase(s, Phase::Survey, "survey");
  validate_survey(response);
  s.survey = response;
  enter(s, Phase::Done, now_ms);
}

SceneDescriptor Game::scene_descriptor(const Session& s, std::int64_t now_ms) const {
  SceneDescriptor d;
  d.trial = s.trial_index;
  d.pack_size = s.pack_size;
  d.plant_display_order = s.plant_display_order;
  if (!s.trials.empty()) {
    const auto& t = s.trials.back();
    d.previous = ChoiceSummary{t.trial, t.choice, t.pack_before, t.pack_after};
  }

  SceneKind kind = SceneKind::Instructions;
  switch (s.phase) {
    case Phase::Instructions:
      kind = SceneKind::Instructions;
      d.delay_s = config_.timings.start_delay_s;
      break;
    case Phase::Choice: kind = SceneKind::Choice; break;
    case Phase::Feedback:
      kind = SceneKind::Feedback;
      d.delay_s = config_.timings.continue_delay_s;
      break;
    case Phase::Attention:
      kind = SceneKind::Attention;
      d.attention_after_trial = s.trials.back().trial;
      break;
    case Phase::Survey: kind = SceneKind::Survey; break;
    case Phase::Done: kind = SceneKind::Payout; break;
  }

  const bool in_progress_window =
      !s.trials.empty() && s.phase != Phase::Survey && s.phase != Phase::Done &&
      s.phase_entered_ms == s.trials.back().submitted_at_ms &&
      now_ms - s.trials.back().submitted_at_ms <
          static_cast<std::int64_t>(config_.timings.progress_s) * 1000;
  if (in_progress_window) {
    d.next = kind;
    d.kind = SceneKind::Progress;
    d.delay_s = config_.timings.progress_s;
  } else {
    d.kind = kind;
  }
  return d;
}

int replay_pack_size(const Session& s) {
  int pack = kInitialPackSize;
  for (const auto& t : s.trials) pack = std::max(kMinPackSize, pack + growth_to_delta(t.growth));
  return pack;
}

}  // namespace alienzoo
