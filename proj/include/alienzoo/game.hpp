#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "alienzoo/cfe.hpp"
#include "alienzoo/tree_model.hpp"

namespace alienzoo {

inline constexpr int kTrialsPerSession = 12;
inline constexpr int kInitialPackSize = 20;
inline constexpr int kMinPackSize = 2;
inline constexpr std::array<int, 2> kAttentionAfterTrials{3, 7};
inline constexpr int kCatchItem = 7;
inline constexpr int kPreferNotToAnswer = 0;  // Likert code for "I prefer not to answer"

enum class Condition { Control, Cfe };
enum class Phase { Instructions, Choice, Feedback, Attention, Survey, Done };
enum class SceneKind { Instructions, Choice, Progress, Feedback, Attention, Survey, Payout };

std::string to_string(Condition c);
std::string to_string(Phase p);
std::string to_string(SceneKind k);
Condition condition_from_string(const std::string& s);
Phase phase_from_string(const std::string& s);

struct Timings {
  int start_delay_s = 20;
  int continue_delay_s = 10;
  int progress_s = 3;
};

/// Growth in [0.1, 1.9] to a pack-size change in [-10, 10]; half-away-from-zero rounding.
int growth_to_delta(double growth);

struct TrialRecord {
  int trial = 0;
  PlantVector choice;  // canonical plant order
  double growth = 0.0;
  int delta = 0;
  int pack_before = 0;
  int pack_after = 0;
  std::int64_t decision_time_ms = 0;
  std::int64_t submitted_at_ms = 0;
  std::optional<Counterfactual> cfe_shown;  // CFE condition only, set at the block's feedback
};

struct AttentionRecord {
  int after_trial = 0;
  int answer = 0;
  bool correct = false;
};

/// Answer to survey item 1 or 2: a subset of plants 1..5, or "I do not know".
struct PlantSelection {
  bool dont_know = false;
  std::set<int> plants;

  friend bool operator==(const PlantSelection&, const PlantSelection&) = default;
};

struct SurveyResponse {
  std::optional<PlantSelection> relevant_plants;    // item 1
  std::optional<PlantSelection> irrelevant_plants;  // item 2
  std::map<int, int> likert;  // items 3..10: 1 = strongly disagree .. 5 = strongly agree, 0 = prefer not
  std::string age_band;
  std::string gender;

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

const std::vector<std::string>& age_bands();
const std::vector<std::string>& genders();

/// Throws ValidationError naming every missing or invalid item ("item1".."item10", "age", "gender").
void validate_survey(const SurveyResponse& response);

/// A submission that arrived before its scene's mandated delay had elapsed.
struct TimingFlag {
  std::string kind;  // early_start | early_feed | early_continue
  int trial = 0;
  std::int64_t elapsed_ms = 0;

  friend bool operator==(const TimingFlag&, const TimingFlag&) = default;
};

struct Session {
  std::string id;
  Condition condition = Condition::Control;
  Experiment experiment = Experiment::Exp1;
  std::uint64_t seed = 0;
  std::array<int, kNumPlants> plant_display_order{0, 1, 2, 3, 4};  // canonical index per slot
  int pack_size = kInitialPackSize;
  int trial_index = 1;  // next (or last, once all are played) trial number
  Phase phase = Phase::Instructions;
  std::vector<TrialRecord> trials;
  std::vector<AttentionRecord> attention;
  std::optional<SurveyResponse> survey;
  std::vector<TimingFlag> timing_flags;
  std::int64_t created_at_ms = 0;
  std::int64_t phase_entered_ms = 0;

  bool completed() const { return phase == Phase::Done; }
};

struct FeedbackEntry {
  int trial = 0;
  PlantVector choice;
  int pack_before = 0;
  int pack_after = 0;
  int delta = 0;
  std::optional<Counterfactual> cfe;  // CFE condition: nullopt means "close to optimal"
};

struct FeedbackBlock {
  int block = 0;  // 1..6
  bool show_cfe = false;
  std::vector<FeedbackEntry> entries;
  int continue_delay_s = 10;
};

struct ChoiceSummary {
  int trial = 0;
  PlantVector choice;
  int pack_before = 0;
  int pack_after = 0;
};

struct SceneDescriptor {
  SceneKind kind = SceneKind::Instructions;
  int trial = 0;
  int pack_size = 0;
  int delay_s = 0;  // start button (instructions), duration (progress), continue button (feedback)
  std::optional<SceneKind> next;  // progress scenes: what follows
  std::optional<ChoiceSummary> previous;
  std::array<int, kNumPlants> plant_display_order{};
  std::optional<int> attention_after_trial;
};

struct GameConfig {
  int experiment = 1;
  std::shared_ptr<const GrowthModel> model;
  CfeConfig cfe;
  Timings timings;
};

/// Session state machine. Holds only immutable shared state (the frozen model); all
/// per-session state lives in Session, which callers must serialize access to.
class Game {
 public:
  explicit Game(GameConfig config);

  const GameConfig& config() const { return config_; }
  const GrowthModel& model() const { return *config_.model; }

  Session create_session(std::string id, Condition condition, std::uint64_t seed,
                         std::int64_t now_ms = 0) const;

  /// Instructions -> Choice.
  void start(Session& s, std::int64_t now_ms = 0) const;

  TrialRecord submit_feeding(Session& s, const PlantVector& choice, std::int64_t decision_time_ms,
                             std::int64_t now_ms = 0) const;

  FeedbackBlock feedback_payload(const Session& s) const;

  /// Feedback -> Choice, or Survey after the last block.
  void continue_after_feedback(Session& s, std::int64_t now_ms = 0) const;

  AttentionRecord submit_attention(Session& s, int answer, std::int64_t now_ms = 0) const;

  void submit_survey(Session& s, const SurveyResponse& response, std::int64_t now_ms = 0) const;

  /// The scene a client should show at `now_ms`; a progress scene covers the first
  /// `progress_s` seconds after each feeding.
  SceneDescriptor scene_descriptor(const Session& s, std::int64_t now_ms) const;

 private:
  void enter(Session& s, Phase p, std::int64_t now_ms) const;
  void flag_if_early(Session& s, const char* kind, std::int64_t since_ms, int delay_s,
                     std::int64_t now_ms) const;
  void require_phase(const Session& s, Phase expected, const char* op) const;

  GameConfig config_;
};

/// Re-applies the trial deltas from 20; equals s.pack_size for any consistent log.
int replay_pack_size(const Session& s);

}  // namespace alienzoo
