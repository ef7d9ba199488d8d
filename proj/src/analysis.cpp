#include "alienzoo/analysis.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "alienzoo/csv.hpp"
#include "alienzoo/errors.hpp"

namespace alienzoo {

namespace {

using Extractor = double (*)(const Session&);

double final_pack(const Session& s) { return s.pack_size; }

double mean_decision(const Session& s) {
  double sum = 0;
  for (const auto& t : s.trials) sum += static_cast<double>(t.decision_time_ms);
  return sum / static_cast<double>(s.trials.size());
}

double relevant_score(const Session& s) {
  return match_score(s.survey->relevant_plants.value_or(PlantSelection{true, {}}),
                     ItemKind::Relevant, s.experiment);
}

double irrelevant_score(const Session& s) {
  return match_score(s.survey->irrelevant_plants.value_or(PlantSelection{true, {}}),
                     ItemKind::Irrelevant, s.experiment);
}

std::string cell(double v) { return std::isnan(v) ? "NA" : format_double(v); }

}  // namespace

AnalysisReport analyze_sessions(const std::vector<Session>& sessions) {
  AnalysisReport report;
  std::vector<const Session*> clean[2];
  for (const auto& s : sessions) {
    const auto flags = quality_flags(s);
    report.quality.push_back({s.id, s.condition, s.pack_size, flags});
    if (!flags.any()) clean[s.condition == Condition::Cfe].push_back(&s);
  }

  if (!clean[0].empty() || !clean[1].empty()) report.per_trial = per_trial_summary(sessions);

  const std::pair<const char*, Extractor> measures[] = {{"final_pack", final_pack},
                                                        {"mean_decision_ms", mean_decision},
                                                        {"relevant_match", relevant_score},
                                                        {"irrelevant_match", irrelevant_score}};
  for (const auto& [name, extract] : measures) {
    std::vector<double> values[2];
    for (int g = 0; g < 2; ++g)
      for (const auto* s : clean[g]) values[g].push_back(extract(*s));
    for (const char* test : {"mann_whitney", "welch"}) {
      GroupComparison c{name, test, values[0].size(), values[1].size(), std::nullopt, ""};
      try {
        c.result = std::string(test) == "welch" ? welch_t(values[1], values[0])
                                                : mann_whitney_u(values[1], values[0]);
      } catch (const ValidationError& e) {
        c.note = e.what();
      }
      report.comparisons.push_back(std::move(c));
    }
  }

  std::vector<LongRow> rows;
  for (int g = 0; g < 2; ++g) {
    for (const auto* s : clean[g]) {
      for (const auto& t : s->trials) {
        rows.push_back({s->id, to_string(s->condition), t.trial, static_cast<double>(t.pack_after)});
      }
    }
  }
  try {
    if (clean[0].size() < 2 || clean[1].size() < 2) {
      throw ValidationError("mixed model needs at least 2 unflagged sessions per group");
    }
    report.pack_lmm = fit_lmm_random_intercept(rows);
  } catch (const ValidationError& e) {
    report.lmm_note = e.what();
  }
  return report;
}

void write_report(const AnalysisReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("quality_report.csv");
    CsvWriter w(out);
    w.row({"session_id", "condition", "final_pack_size", "speeder", "inattentive",
           "straightliner_game", "straightliner_survey", "excluded"});
    for (const auto& q : report.quality) {
      auto b = [](bool v) { return std::string(v ? "1" : "0"); };
      w.row({q.session_id, to_string(q.condition), std::to_string(q.final_pack), b(q.flags.speeder),
             b(q.flags.inattentive), b(q.flags.straightliner_game), b(q.flags.straightliner_survey),
             b(q.flags.any())});
    }
  }
  {
    auto out = open("per_trial_summary.csv");
    CsvWriter w(out);
    w.row({"group", "trial", "n", "mean_pack_size", "sem_pack_size", "mean_decision_ms",
           "sem_decision_ms"});
    for (const auto& r : report.per_trial) {
      w.row({to_string(r.group), std::to_string(r.trial), std::to_string(r.n), cell(r.mean_pack),
             cell(r.sem_pack), cell(r.mean_decision_ms), cell(r.sem_decision_ms)});
    }
  }
  {
    auto out = open("tests.csv");
    CsvWriter w(out);
    w.row({"measure", "test", "n_control", "n_cfe", "statistic_kind", "statistic", "df",
           "p_value", "effect_kind", "effect_size", "method", "note"});
    for (const auto& c : report.comparisons) {
      std::vector<std::string> row{c.measure, c.test, std::to_string(c.n_control),
                                   std::to_string(c.n_cfe)};
      if (c.result) {
        const auto& r = *c.result;
        row.insert(row.end(), {to_string(r.statistic_kind), cell(r.statistic),
                               r.method == TestMethod::Welch ? cell(r.df) : "NA", cell(r.p_value),
                               to_string(r.effect_kind), cell(r.effect_size), to_string(r.method),
                               ""});
      } else {
        row.insert(row.end(), {"NA", "NA", "NA", "NA", "NA", "NA", "NA", c.note});
      }
      w.row(row);
    }
  }
  {
    auto out = open("lmm.json");
    nlohmann::json j;
    j["model"] = "pack_size ~ group * factor(trial) + (1 | session)";
    if (report.pack_lmm) {
      const auto& f = *report.pack_lmm;
      j["fixed_effects"] = f.fixed_effects;
      j["sigma2_subject"] = f.sigma2_subject;
      j["sigma2_residual"] = f.sigma2_residual;
      j["variance_ratio"] = f.variance_ratio;
      j["reml_loglik"] = f.reml_loglik;
      j["converged"] = f.converged;
      j["iterations"] = f.iterations;
    } else {
      j["error"] = report.lmm_note;
    }
    out << j.dump(2) << "\n";
  }
}

}  // namespace alienzoo
