#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "alienzoo/game.hpp"

namespace alienzoo {

/// One row per (session, trial) for completed sessions, in the given order:
/// session_id, condition, experiment, trial, p1..p5, growth, delta, pack_size,
/// decision_time_ms, attention_pass_count, speeder, inattentive, straightliner_game,
/// straightliner_survey.
std::string export_long_csv(const std::vector<Session>& sessions);

/// One row per completed session: item1/item2 per-plant indicators and match scores,
/// Likert items 3..10 ("prefer_not_to_answer" verbatim), age band and gender.
std::string export_survey_csv(const std::vector<Session>& sessions);

/// Rebuilds finished sessions from the two exports (enough for every quality flag and
/// the analysis). Attention records keep only the pass count. Throws ParseError.
std::vector<Session> import_sessions(std::istream& long_csv, std::istream& survey_csv);

}  // namespace alienzoo
