#include "alienzoo/quality.hpp"

#include <algorithm>
#include <cmath>

#include "alienzoo/errors.hpp"
#include "alienzoo/stats.hpp"

namespace alienzoo {

namespace {

void require_all_trials(const Session& s) {
  if (static_cast<int>(s.trials.size()) != kTrialsPerSession) {
    throw ValidationError("session " + s.id + " is incomplete (" +
                          std::to_string(s.trials.size()) + " of 12 trials)");
  }
}

const SurveyResponse& require_survey(const Session& s) {
  if (!s.survey) throw ValidationError("session " + s.id + " has no survey response");
  return *s.survey;
}

}  // namespace

bool flag_speeder(const Session& s) {
  require_all_trials(s);
  const auto fast = std::count_if(s.trials.begin(), s.trials.end(), [](const TrialRecord& t) {
    return t.decision_time_ms < kSpeederThresholdMs;
  });
  return fast >= kSpeederMinTrials;
}

bool flag_inattentive(const Session& s) {
  require_all_trials(s);
  const auto& survey = require_survey(s);
  const bool both_failed =
      s.attention.size() >= 2 &&
      std::none_of(s.attention.begin(), s.attention.end(), [](const auto& a) { return a.correct; });
  auto catch_it = survey.likert.find(kCatchItem);
  const bool catch_failed = catch_it == survey.likert.end() || catch_it->second != kPreferNotToAnswer;
  return both_failed || catch_failed;
}

int stagnant_repeats(const Session& s) {
  require_all_trials(s);
  int repeats = 0;
  for (int block = 2; block <= kTrialsPerSession / 2; ++block) {
    const auto& prev_first = s.trials[2 * block - 4];
    const auto& prev_second = s.trials[2 * block - 3];
    const auto& first = s.trials[2 * block - 2];
    const auto& second = s.trials[2 * block - 1];
    const bool same_choices =
        first.choice == prev_first.choice && second.choice == prev_second.choice;
    if (same_choices && second.pack_after <= prev_second.pack_after) ++repeats;
  }
  return repeats;
}

bool flag_straightliner_game(const Session& s) {
  return stagnant_repeats(s) >= kStagnantBlocksThreshold;
}

bool flag_straightliner_survey(const Session& s) {
  const auto& survey = require_survey(s);
  bool all_positive = true, all_negative = true;
  for (int item : {3, 4, 5, 6, 8, 9, 10}) {
    auto it = survey.likert.find(item);
    if (it == survey.likert.end() || it->second == kPreferNotToAnswer) continue;
    all_positive = all_positive && it->second >= 4;
    all_negative = all_negative && it->second <= 2;
  }
  return all_positive || all_negative;
}

QualityFlags quality_flags(const Session& s) {
  return {flag_speeder(s), flag_inattentive(s), flag_straightliner_game(s),
          flag_straightliner_survey(s)};
}

std::set<int> relevant_plants(Experiment e) {
  return e == Experiment::Exp1 ? std::set<int>{2, 4, 5} : std::set<int>{2, 4};
}

int match_score(const PlantSelection& selection, ItemKind item, Experiment e) {
  const auto relevant = relevant_plants(e);
  int score = 0;
  for (int plant = 1; plant <= kNumPlants; ++plant) {
    const bool selected = !selection.dont_know && selection.plants.count(plant) > 0;
    const bool truth = (item == ItemKind::Relevant) == (relevant.count(plant) > 0);
    score += selected == truth;
  }
  return score;
}

std::vector<TrialSummaryRow> per_trial_summary(const std::vector<Session>& sessions) {
  std::vector<const Session*> clean[2];
  for (const auto& s : sessions) {
    if (!quality_flags(s).any()) clean[s.condition == Condition::Cfe].push_back(&s);
  }
  if (clean[0].empty() && clean[1].empty()) {
    throw ValidationError("per-trial summary needs at least one unflagged session");
  }
  std::vector<TrialSummaryRow> rows;
  for (int g = 0; g < 2; ++g) {
    if (clean[g].empty()) continue;
    for (int trial = 1; trial <= kTrialsPerSession; ++trial) {
      std::vector<double> pack, dt;
      for (const auto* s : clean[g]) {
        pack.push_back(s->trials[trial - 1].pack_after);
        dt.push_back(static_cast<double>(s->trials[trial - 1].decision_time_ms));
      }
      const auto dp = describe(pack), dd = describe(dt);
      TrialSummaryRow row;
      row.group = g ? Condition::Cfe : Condition::Control;
      row.trial = trial;
      row.n = pack.size();
      row.mean_pack = dp.mean;
      row.sem_pack = dp.sem;
      row.mean_decision_ms = dd.mean;
      row.sem_decision_ms = dd.sem;
      row.sem_defined = !std::isnan(dp.sem);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace alienzoo
