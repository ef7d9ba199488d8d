#include "alienzoo/game_json.hpp"

#include "alienzoo/errors.hpp"

namespace alienzoo {

using nlohmann::json;

void to_json(json& j, const PlantVector& p) { j = p.leaves(); }

void from_json(const json& j, PlantVector& p) {
  if (!j.is_array() || j.size() != kNumPlants) {
    throw ValidationError("leaves must be an array of 5 integers", {"leaves"});
  }
  std::array<int, kNumPlants> leaves{};
  for (int i = 0; i < kNumPlants; ++i) {
    if (!j[i].is_number_integer()) {
      throw ValidationError("leaves must be an array of 5 integers", {"leaves"});
    }
    leaves[i] = j[i].get<int>();
  }
  p = PlantVector(leaves);
}

void to_json(json& j, const Counterfactual& c) {
  j = {{"suggestion", c.suggestion},
       {"predicted_growth", c.predicted_growth},
       {"distance", c.distance},
       {"factual", c.factual}};
}

void from_json(const json& j, Counterfactual& c) {
  c.suggestion = j.at("suggestion").get<PlantVector>();
  c.predicted_growth = j.at("predicted_growth").get<double>();
  c.distance = j.at("distance").get<int>();
  c.factual = j.at("factual").get<PlantVector>();
}

void to_json(json& j, const TrialRecord& t) {
  j = {{"trial", t.trial},
       {"choice", t.choice},
       {"growth", t.growth},
       {"delta", t.delta},
       {"pack_before", t.pack_before},
       {"pack_after", t.pack_after},
       {"decision_time_ms", t.decision_time_ms},
       {"submitted_at_ms", t.submitted_at_ms}};
  if (t.cfe_shown) j["cfe_shown"] = *t.cfe_shown;
}

void from_json(const json& j, TrialRecord& t) {
  t.trial = j.at("trial").get<int>();
  t.choice = j.at("choice").get<PlantVector>();
  t.growth = j.at("growth").get<double>();
  t.delta = j.at("delta").get<int>();
  t.pack_before = j.at("pack_before").get<int>();
  t.pack_after = j.at("pack_after").get<int>();
  t.decision_time_ms = j.at("decision_time_ms").get<std::int64_t>();
  t.submitted_at_ms = j.at("submitted_at_ms").get<std::int64_t>();
  if (j.contains("cfe_shown")) t.cfe_shown = j["cfe_shown"].get<Counterfactual>();
}

void to_json(json& j, const AttentionRecord& a) {
  j = {{"after_trial", a.after_trial}, {"answer", a.answer}, {"correct", a.correct}};
}

void from_json(const json& j, AttentionRecord& a) {
  a.after_trial = j.at("after_trial").get<int>();
  a.answer = j.at("answer").get<int>();
  a.correct = j.at("correct").get<bool>();
}

void to_json(json& j, const TimingFlag& f) {
  j = {{"kind", f.kind}, {"trial", f.trial}, {"elapsed_ms", f.elapsed_ms}};
}

void from_json(const json& j, TimingFlag& f) {
  f.kind = j.at("kind").get<std::string>();
  f.trial = j.at("trial").get<int>();
  f.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
}

namespace {

json selection_to_json(const PlantSelection& s) {
  if (s.dont_know) return "dont_know";
  return json(s.plants);
}

PlantSelection selection_from_json(const json& j, const char* item) {
  PlantSelection s;
  if (j.is_string() && j.get<std::string>() == "dont_know") {
    s.dont_know = true;
    return s;
  }
  if (!j.is_array()) {
    throw ValidationError(std::string(item) + " must be a list of plant numbers or \"dont_know\"",
                          {item});
  }
  for (const auto& p : j) {
    if (!p.is_number_integer()) {
      throw ValidationError(std::string(item) + " must contain plant numbers 1..5", {item});
    }
    s.plants.insert(p.get<int>());
  }
  return s;
}

}  // namespace

void to_json(json& j, const SurveyResponse& r) {
  j = json::object();
  if (r.relevant_plants) j["relevant_plants"] = selection_to_json(*r.relevant_plants);
  if (r.irrelevant_plants) j["irrelevant_plants"] = selection_to_json(*r.irrelevant_plants);
  json likert = json::object();
  for (const auto& [item, value] : r.likert) {
    likert[std::to_string(item)] =
        value == kPreferNotToAnswer ? json("prefer_not_to_answer") : json(value);
  }
  j["likert"] = std::move(likert);
  j["age_band"] = r.age_band;
  j["gender"] = r.gender;
}

SurveyResponse survey_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("survey body must be a JSON object");
  SurveyResponse r;
  if (j.contains("relevant_plants")) {
    r.relevant_plants = selection_from_json(j["relevant_plants"], "item1");
  }
  if (j.contains("irrelevant_plants")) {
    r.irrelevant_plants = selection_from_json(j["irrelevant_plants"], "item2");
  }
  if (j.contains("likert")) {
    const auto& l = j["likert"];
    if (!l.is_object()) throw ValidationError("likert must be an object", {"likert"});
    for (const auto& [key, value] : l.items()) {
      int item = 0;
      try {
        item = std::stoi(key);
      } catch (const std::exception&) {
        throw ValidationError("unknown survey item '" + key + "'", {key});
      }
      const std::string id = "item" + key;
      if (value.is_string() && value.get<std::string>() == "prefer_not_to_answer") {
        r.likert[item] = kPreferNotToAnswer;
      } else if (value.is_number_integer() && value.get<int>() >= 1 && value.get<int>() <= 5) {
        r.likert[item] = value.get<int>();
      } else {
        throw ValidationError(id + " must be 1..5 or \"prefer_not_to_answer\"", {id});
      }
    }
  }
  if (j.contains("age_band") && j["age_band"].is_string()) r.age_band = j["age_band"];
  if (j.contains("gender") && j["gender"].is_string()) r.gender = j["gender"];
  return r;
}

void to_json(json& j, const Session& s) {
  j = {{"id", s.id},
       {"condition", to_string(s.condition)},
       {"experiment", static_cast<int>(s.experiment)},
       {"seed", s.seed},
       {"plant_display_order", s.plant_display_order},
       {"pack_size", s.pack_size},
       {"trial_index", s.trial_index},
       {"phase", to_string(s.phase)},
       {"trials", s.trials},
       {"attention", s.attention},
       {"timing_flags", s.timing_flags},
       {"created_at_ms", s.created_at_ms},
       {"phase_entered_ms", s.phase_entered_ms}};
  if (s.survey) j["survey"] = *s.survey;
}

void from_json(const json& j, Session& s) {
  s.id = j.at("id").get<std::string>();
  s.condition = condition_from_string(j.at("condition").get<std::string>());
  s.experiment = experiment_from_int(j.at("experiment").get<int>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.plant_display_order = j.at("plant_display_order").get<std::array<int, kNumPlants>>();
  s.pack_size = j.at("pack_size").get<int>();
  s.trial_index = j.at("trial_index").get<int>();
  s.phase = phase_from_string(j.at("phase").get<std::string>());
  s.trials = j.at("trials").get<std::vector<TrialRecord>>();
  s.attention = j.at("attention").get<std::vector<AttentionRecord>>();
  s.timing_flags = j.at("timing_flags").get<std::vector<TimingFlag>>();
  s.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
  s.phase_entered_ms = j.at("phase_entered_ms").get<std::int64_t>();
  if (j.contains("survey")) s.survey = survey_from_json(j["survey"]);
}

json feedback_to_json(const FeedbackBlock& block) {
  json entries = json::array();
  for (const auto& e : block.entries) {
    json je = {{"trial", e.trial},
               {"choice", e.choice},
               {"pack_before", e.pack_before},
               {"pack_after", e.pack_after},
               {"delta", e.delta}};
    if (block.show_cfe) {
      if (e.cfe) {
        je["suggestion"] = e.cfe->suggestion;
        je["predicted_growth"] = e.cfe->predicted_growth;
        je["distance"] = e.cfe->distance;
      } else {
        je["near_optimal"] = true;
        je["message"] = "You were close to an optimal solution in this round.";
      }
    }
    entries.push_back(std::move(je));
  }
  return {{"block", block.block},
          {"entries", std::move(entries)},
          {"continue_delay_s", block.continue_delay_s}};
}

json scene_to_json(const SceneDescriptor& d) {
  json j = {{"kind", to_string(d.kind)},
            {"trial", d.trial},
            {"pack_size", d.pack_size},
            {"plant_display_order", d.plant_display_order}};
  switch (d.kind) {
    case SceneKind::Instructions: j["start_delay_s"] = d.delay_s; break;
    case SceneKind::Progress: j["duration_s"] = d.delay_s; break;
    case SceneKind::Feedback: j["continue_delay_s"] = d.delay_s; break;
    default: break;
  }
  if (d.next) j["next"] = to_string(*d.next);
  if (d.previous) {
    j["previous"] = {{"trial", d.previous->trial},
                     {"choice", d.previous->choice},
                     {"pack_before", d.previous->pack_before},
                     {"pack_after", d.previous->pack_after}};
  }
  if (d.attention_after_trial) j["attention_after_trial"] = *d.attention_after_trial;
  return j;
}

}  // namespace alienzoo
