#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alienzoo/lmm.hpp"
#include "alienzoo/quality.hpp"
#include "alienzoo/stats.hpp"

namespace alienzoo {

struct SessionQuality {
  std::string session_id;
  Condition condition = Condition::Control;
  int final_pack = 0;
  QualityFlags flags;
};

struct GroupComparison {
  std::string measure;  // final_pack, mean_decision_ms, relevant_match, irrelevant_match
  std::string test;     // mann_whitney | welch
  std::size_t n_control = 0;
  std::size_t n_cfe = 0;
  std::optional<TestResult> result;
  std::string note;  // why the test was skipped
};

struct AnalysisReport {
  std::vector<SessionQuality> quality;
  std::vector<TrialSummaryRow> per_trial;
  std::vector<GroupComparison> comparisons;
  std::optional<LmmFit> pack_lmm;  // pack size ~ group * trial + (1 | subject)
  std::string lmm_note;
};

/// Flags every session, then compares Control and CFE over unflagged sessions only.
AnalysisReport analyze_sessions(const std::vector<Session>& sessions);

/// quality_report.csv, per_trial_summary.csv, tests.csv, lmm.json.
void write_report(const AnalysisReport& report, const std::filesystem::path& dir);

}  // namespace alienzoo
