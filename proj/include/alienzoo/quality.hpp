#pragma once

#include <set>
#include <string>
#include <vector>

#include "alienzoo/game.hpp"

namespace alienzoo {

inline constexpr std::int64_t kSpeederThresholdMs = 2000;
inline constexpr int kSpeederMinTrials = 4;
inline constexpr int kStagnantBlocksThreshold = 3;

struct QualityFlags {
  bool speeder = false;
  bool inattentive = false;
  bool straightliner_game = false;
  bool straightliner_survey = false;

  bool any() const { return speeder || inattentive || straightliner_game || straightliner_survey; }
  friend bool operator==(const QualityFlags&, const QualityFlags&) = default;
};

/// At least 4 trials decided in under 2 s.
bool flag_speeder(const Session& s);
/// Both in-game attention answers wrong, or the catch item not answered "prefer not to answer".
bool flag_inattentive(const Session& s);
/// Number of blocks 2..6 that repeat the previous block's two choices without a larger pack.
int stagnant_repeats(const Session& s);
bool flag_straightliner_game(const Session& s);
/// Every answered valence item (3-6, 8-10) positive (4/5), or every one negative (1/2).
bool flag_straightliner_survey(const Session& s);

/// All four flags. Requires a completed session.
QualityFlags quality_flags(const Session& s);

enum class ItemKind { Relevant, Irrelevant };

/// Plants (1-based) that drive growth in each experiment.
std::set<int> relevant_plants(Experiment e);

/// Plants whose membership in `selection` agrees with the ground truth for the item; 0..5.
/// "I do not know" counts as an empty selection.
int match_score(const PlantSelection& selection, ItemKind item, Experiment e);

struct TrialSummaryRow {
  Condition group = Condition::Control;
  int trial = 0;
  std::size_t n = 0;
  double mean_pack = 0.0;
  double sem_pack = 0.0;  // NaN when n < 2
  double mean_decision_ms = 0.0;
  double sem_decision_ms = 0.0;
  bool sem_defined = true;
};

/// Per (group, trial) means and standard errors over unflagged sessions, groups in
/// Control, CFE order; groups with no unflagged sessions are omitted.
std::vector<TrialSummaryRow> per_trial_summary(const std::vector<Session>& sessions);

}  // namespace alienzoo
