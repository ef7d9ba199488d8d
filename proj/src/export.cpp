#include "alienzoo/export.hpp"

#include <map>
#include <sstream>

#include "alienzoo/csv.hpp"
#include "alienzoo/errors.hpp"
#include "alienzoo/quality.hpp"

namespace alienzoo {

namespace {

constexpr int kLikertItems[] = {3, 4, 5, 6, 7, 8, 9, 10};
constexpr const char* kPnaText = "prefer_not_to_answer";

std::string flag(bool b) { return b ? "1" : "0"; }

bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError("expected 0 or 1, got '" + s + "'");
}

void selection_cells(std::vector<std::string>& row, const std::optional<PlantSelection>& sel) {
  const bool dk = sel && sel->dont_know;
  row.push_back(flag(dk));
  for (int p = 1; p <= kNumPlants; ++p) row.push_back(flag(sel && !dk && sel->plants.count(p)));
}

}  // namespace

std::string export_long_csv(const std::vector<Session>& sessions) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"session_id", "condition", "experiment", "trial", "p1", "p2", "p3", "p4", "p5", "growth",
         "delta", "pack_size", "decision_time_ms", "attention_pass_count", "speeder",
         "inattentive", "straightliner_game", "straightliner_survey"});
  for (const auto& s : sessions) {
    if (!s.completed()) continue;
    const auto flags = quality_flags(s);
    int passes = 0;
    for (const auto& a : s.attention) passes += a.correct;
    for (const auto& t : s.trials) {
      std::vector<std::string> row{s.id, to_string(s.condition),
                                   std::to_string(static_cast<int>(s.experiment)),
                                   std::to_string(t.trial)};
      for (int v : t.choice.leaves()) row.push_back(std::to_string(v));
      row.insert(row.end(), {format_double(t.growth), std::to_string(t.delta),
                             std::to_string(t.pack_after), std::to_string(t.decision_time_ms),
                             std::to_string(passes), flag(flags.speeder), flag(flags.inattentive),
                             flag(flags.straightliner_game), flag(flags.straightliner_survey)});
      w.row(row);
    }
  }
  return out.str();
}

std::string export_survey_csv(const std::vector<Session>& sessions) {
  std::ostringstream out;
  CsvWriter w(out);
  std::vector<std::string> header{"session_id", "condition", "experiment", "item1_dont_know"};
  for (int p = 1; p <= kNumPlants; ++p) header.push_back("item1_p" + std::to_string(p));
  header.push_back("item2_dont_know");
  for (int p = 1; p <= kNumPlants; ++p) header.push_back("item2_p" + std::to_string(p));
  header.insert(header.end(), {"relevant_match", "irrelevant_match"});
  for (int item : kLikertItems) header.push_back("item" + std::to_string(item));
  header.insert(header.end(), {"age_band", "gender"});
  w.row(header);

  for (const auto& s : sessions) {
    if (!s.completed() || !s.survey) continue;
    const auto& r = *s.survey;
    std::vector<std::string> row{s.id, to_string(s.condition),
                                 std::to_string(static_cast<int>(s.experiment))};
    selection_cells(row, r.relevant_plants);
    selection_cells(row, r.irrelevant_plants);
    const PlantSelection none{true, {}};
    row.push_back(std::to_string(
        match_score(r.relevant_plants.value_or(none), ItemKind::Relevant, s.experiment)));
    row.push_back(std::to_string(
        match_score(r.irrelevant_plants.value_or(none), ItemKind::Irrelevant, s.experiment)));
    for (int item : kLikertItems) {
      auto it = r.likert.find(item);
      if (it == r.likert.end()) row.push_back("");
      else if (it->second == kPreferNotToAnswer) row.push_back(kPnaText);
      else row.push_back(std::to_string(it->second));
    }
    row.insert(row.end(), {r.age_band, r.gender});
    w.row(row);
  }
  return out.str();
}

std::vector<Session> import_sessions(std::istream& long_csv, std::istream& survey_csv) {
  const auto lt = read_csv_table(long_csv);
  const auto st = read_csv_table(survey_csv);
  std::vector<Session> out;
  std::map<std::string, std::size_t> index;

  const auto c_id = lt.column("session_id"), c_cond = lt.column("condition"),
             c_exp = lt.column("experiment"), c_trial = lt.column("trial"),
             c_growth = lt.column("growth"), c_delta = lt.column("delta"),
             c_pack = lt.column("pack_size"), c_dt = lt.column("decision_time_ms"),
             c_pass = lt.column("attention_pass_count");
  std::size_t c_p[kNumPlants];
  for (int p = 0; p < kNumPlants; ++p) c_p[p] = lt.column("p" + std::to_string(p + 1));

  try {
    for (const auto& row : lt.rows) {
      auto [it, fresh] = index.emplace(row[c_id], out.size());
      if (fresh) {
        Session s;
        s.id = row[c_id];
        s.condition = condition_from_string(row[c_cond]);
        s.experiment = experiment_from_int(static_cast<int>(parse_int(row[c_exp])));
        s.phase = Phase::Done;
        const auto passes = parse_int(row[c_pass]);
        s.attention = {{kAttentionAfterTrials[0], 0, passes >= 1},
                       {kAttentionAfterTrials[1], 0, passes >= 2}};
        out.push_back(std::move(s));
      }
      auto& s = out[it->second];
      TrialRecord t;
      t.trial = static_cast<int>(parse_int(row[c_trial]));
      if (t.trial != static_cast<int>(s.trials.size()) + 1) {
        throw ParseError("session " + s.id + ": trials out of order at trial " + row[c_trial]);
      }
      std::array<int, kNumPlants> v{};
      for (int p = 0; p < kNumPlants; ++p) v[p] = static_cast<int>(parse_int(row[c_p[p]]));
      t.choice = PlantVector(v);
      t.growth = parse_double(row[c_growth]);
      t.delta = static_cast<int>(parse_int(row[c_delta]));
      t.pack_before = s.trials.empty() ? kInitialPackSize : s.trials.back().pack_after;
      t.pack_after = static_cast<int>(parse_int(row[c_pack]));
      t.decision_time_ms = parse_int(row[c_dt]);
      s.pack_size = t.pack_after;
      s.trial_index = t.trial;
      s.trials.push_back(t);
    }

    const auto s_id = st.column("session_id");
    for (const auto& row : st.rows) {
      auto it = index.find(row[s_id]);
      if (it == index.end()) throw ParseError("survey row for unknown session " + row[s_id]);
      SurveyResponse r;
      for (int item = 1; item <= 2; ++item) {
        const auto prefix = "item" + std::to_string(item) + "_";
        PlantSelection sel;
        sel.dont_know = parse_flag(row[st.column(prefix + "dont_know")]);
        for (int p = 1; p <= kNumPlants; ++p)
          if (parse_flag(row[st.column(prefix + "p" + std::to_string(p))])) sel.plants.insert(p);
        (item == 1 ? r.relevant_plants : r.irrelevant_plants) = sel;
      }
      for (int item : kLikertItems) {
        const auto& cell = row[st.column("item" + std::to_string(item))];
        if (cell.empty()) continue;
        r.likert[item] = cell == kPnaText ? kPreferNotToAnswer : static_cast<int>(parse_int(cell));
      }
      r.age_band = row[st.column("age_band")];
      r.gender = row[st.column("gender")];
      out[it->second].survey = r;
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("bad export row: ") + e.what());
  }
  for (const auto& s : out) {
    if (static_cast<int>(s.trials.size()) != kTrialsPerSession) {
      throw ParseError("session " + s.id + " has " + std::to_string(s.trials.size()) + " trials");
    }
    if (!s.survey) throw ParseError("session " + s.id + " has no survey row");
  }
  return out;
}

}  // namespace alienzoo
