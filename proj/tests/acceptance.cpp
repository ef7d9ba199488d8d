// Acceptance suite: one PASS/FAIL line per primary criterion; exit status 1 if any fail.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "alienzoo/bots.hpp"
#include "alienzoo/cfe.hpp"
#include "alienzoo/data_gen.hpp"
#include "alienzoo/event_log.hpp"
#include "alienzoo/game_json.hpp"
#include "alienzoo/lmm.hpp"
#include "alienzoo/quality.hpp"
#include "alienzoo/service.hpp"
#include "alienzoo/stats.hpp"
#include "fixtures.hpp"

#include <httplib.h>

#include "alienzoo/http_api.hpp"

using namespace alienzoo;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kGridBudgetS = 10.0;
constexpr double kTrainBudgetS = 120.0;
constexpr double kMinR2 = 0.85;
constexpr double kMaxMse = 0.06;
constexpr int kCfeInputs = 500;
constexpr double kCfeBudgetS = 60.0;
constexpr double kTrendBudgetS = 60.0;
constexpr double kTrendAlpha = 0.05;
constexpr double kGreedyCeiling = 10.0;
constexpr std::uint64_t kAcceptanceSeed = 20220101;
constexpr double kExactPTol = 1e-12;
constexpr double kOlsTol = 1e-6;
constexpr double kVarianceBand = 0.30;
constexpr int kCohort = 20;
constexpr int kHammerSessions = 50;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Outcome grid_fidelity() {
  const auto t0 = Clock::now();
  const auto grid = generate_grid(Experiment::Exp1, 100);
  std::set<int> unique;
  for (const auto& s : grid.samples()) {
    std::array<int, kNumPlants> v{};
    for (int i = 0; i < kNumPlants; ++i) v[i] = static_cast<int>(s.point[i]);
    unique.insert(PlantVector(v).grid_index());
  }
  const double t = seconds_since(t0);
  return {grid.size() == 1'680'700 && unique.size() == 16'807 && t < kGridBudgetS,
          "samples=" + std::to_string(grid.size()) + " unique=" + std::to_string(unique.size()) +
              " time=" + fmt(t) + "s"};
}

Outcome model_quality() {
  Outcome o;
  for (Experiment e : {Experiment::Exp1, Experiment::Exp2}) {
    const auto t0 = Clock::now();
    const auto& m = alienzoo::testing::trained_model(e);
    const double t = seconds_since(t0);
    const bool ok = m.test_metrics.r_squared_defined && m.test_metrics.r_squared >= kMinR2 &&
                    m.test_metrics.mse <= kMaxMse && t < kTrainBudgetS;
    o.pass = o.pass && ok;
    o.detail += std::string(to_string(e)) + "(depth " + std::to_string(m.model.max_depth()) + "): R2=" +
                fmt(m.test_metrics.r_squared) + " MSE=" + fmt(m.test_metrics.mse) +
                " time=" + fmt(t) + "s; ";
  }
  return o;
}

Outcome cfe_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  int agree = 0, total = 0, below = 0;
  const CfeConfig config;
  for (Experiment e : {Experiment::Exp1, Experiment::Exp2}) {
    const auto& model = alienzoo::testing::trained_model(e).model;
    std::mt19937_64 rng(kAcceptanceSeed + static_cast<int>(e));
    std::uniform_int_distribution<int> leaves(0, kMaxLeaves);
    for (int i = 0; i < kCfeInputs; ++i) {
      std::array<int, kNumPlants> v{};
      for (auto& x : v) x = leaves(rng);
      const PlantVector x(v);
      const auto fast = compute_cfe(model, x, config);
      const auto slow = brute_force_cfe(model, x, config);
      ++total;
      if (fast.has_value() == slow.has_value() && (!fast || fast->distance == slow->distance)) ++agree;
      if (fast && model.predict(fast->suggestion) < target_set(model, x, config).threshold) ++below;
    }
  }
  const double t = seconds_since(t0);
  o.pass = agree == total && below == 0 && t < kCfeBudgetS;
  o.detail = "agree=" + std::to_string(agree) + "/" + std::to_string(total) +
             " below_threshold=" + std::to_string(below) + " time=" + fmt(t) + "s";
  return o;
}

Outcome no_cfe_at_optimum() {
  Outcome o;
  int near_optimal = 0, violations = 0;
  const CfeConfig config;
  for (Experiment e : {Experiment::Exp1, Experiment::Exp2}) {
    const auto& model = alienzoo::testing::trained_model(e).model;
    double best = -1;
    for (const auto& leaf : enumerate_leaves(model)) best = std::max(best, leaf.value);
    for (int idx = 0; idx < kGridPoints; ++idx) {
      const auto x = PlantVector::from_grid_index(idx);
      if (model.predict(x) >= best - config.epsilon) {
        ++near_optimal;
        if (compute_cfe(model, x, config)) ++violations;
      }
    }
  }
  o.pass = near_optimal > 0 && violations == 0;
  o.detail = "near-optimal points=" + std::to_string(near_optimal) +
             " with a counterfactual=" + std::to_string(violations) + " (2 x 16807 scanned)";
  return o;
}

Outcome pack_dynamics() {
  Outcome o;
  const bool mapping =
      growth_to_delta(0.1) == -10 && growth_to_delta(1.0) == 0 && growth_to_delta(1.9) == 10;
  int sessions = 0, mismatches = 0, below_floor = 0;
  for (Experiment e : {Experiment::Exp1, Experiment::Exp2}) {
    const auto game = alienzoo::testing::make_game(e);
    for (BotKind k : {BotKind::Random, BotKind::Greedy, BotKind::StraightLiner, BotKind::Speeder,
                      BotKind::CfeFollower}) {
      const auto cond = k == BotKind::CfeFollower ? Condition::Cfe : Condition::Control;
      for (const auto& s : run_cohort(make_policy(k), kCohort, game, cond, kAcceptanceSeed)) {
        ++sessions;
        if (replay_pack_size(s) != s.pack_size) ++mismatches;
        for (const auto& t : s.trials) below_floor += t.pack_after < kMinPackSize;
      }
    }
  }
  o.pass = mapping && mismatches == 0 && below_floor == 0;
  o.detail = std::string("delta(0.1,1.0,1.9)=") + std::to_string(growth_to_delta(0.1)) + "," +
             std::to_string(growth_to_delta(1.0)) + "," + std::to_string(growth_to_delta(1.9)) +
             " replayed=" + std::to_string(sessions) + " mismatches=" + std::to_string(mismatches) +
             " below_floor=" + std::to_string(below_floor);
  return o;
}

bool has_cfe_key(const json& j) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k == "suggestion" || k == "predicted_growth" || k == "distance" || k == "near_optimal" ||
          k == "message" || k == "condition" || has_cfe_key(v)) {
        return true;
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (has_cfe_key(v)) return true;
  }
  return false;
}

Outcome protocol_conformance() {
  Outcome o;
  const auto game = alienzoo::testing::make_game(Experiment::Exp1);
  std::vector<int> feedback_after, attention_after;
  int leaked = 0;
  for (Condition cond : {Condition::Control, Condition::Cfe}) {
    std::int64_t now = 0;
    auto s = game.create_session("scripted", cond, 1, now);
    now += 25'000;
    game.start(s, now);
    std::mt19937_64 rng(kAcceptanceSeed);
    std::uniform_int_distribution<int> leaves(0, kMaxLeaves);
    while (s.phase != Phase::Survey) {
      now += 25'000;
      if (cond == Condition::Control) leaked += has_cfe_key(scene_to_json(game.scene_descriptor(s, now)));
      if (s.phase == Phase::Choice) {
        std::array<int, kNumPlants> v{};
        for (auto& x : v) x = leaves(rng);
        game.submit_feeding(s, PlantVector(v), 4000, now);
        if (cond == Condition::Control) {
          if (s.phase == Phase::Feedback) feedback_after.push_back(s.trials.back().trial);
          if (s.phase == Phase::Attention) attention_after.push_back(s.trials.back().trial);
        }
      } else if (s.phase == Phase::Feedback) {
        if (cond == Condition::Control) leaked += has_cfe_key(feedback_to_json(game.feedback_payload(s)));
        game.continue_after_feedback(s, now);
      } else if (s.phase == Phase::Attention) {
        game.submit_attention(s, s.pack_size, now);
      }
    }
  }
  const std::vector<int> want_feedback{2, 4, 6, 8, 10, 12}, want_attention{3, 7};
  o.pass = feedback_after == want_feedback && attention_after == want_attention && leaked == 0;
  std::string fb, at;
  for (int t : feedback_after) fb += std::to_string(t) + " ";
  for (int t : attention_after) at += std::to_string(t) + " ";
  o.detail = "feedback after {" + fb + "} attention after {" + at +
             "} control payloads with cfe keys=" + std::to_string(leaked);
  return o;
}

Outcome quality_filters() {
  Outcome o;
  const auto game = alienzoo::testing::make_game(Experiment::Exp1);
  auto rate = [&](const BotPolicy& p, Condition c, auto pred) {
    int hit = 0;
    for (const auto& s : run_cohort(p, kCohort, game, c, kAcceptanceSeed)) hit += pred(s);
    return hit;
  };
  const int speeders = rate(make_policy(BotKind::Speeder), Condition::Control,
                            [](const Session& s) { return flag_speeder(s); });
  auto careless = make_policy(BotKind::Random);
  careless.attentive = false;
  const int inattentive = rate(careless, Condition::Control,
                               [](const Session& s) { return flag_inattentive(s); });
  auto floor = make_policy(BotKind::StraightLiner);
  floor.fixed_choice = PlantVector({0, 0, 0, 0, 0});
  const int liners = rate(floor, Condition::Control, [](const Session& s) {
    return s.pack_size == kMinPackSize && flag_straightliner_game(s);
  });
  const int followers = rate(make_policy(BotKind::CfeFollower), Condition::Cfe,
                             [](const Session& s) { return quality_flags(s).any(); });
  o.pass = speeders == kCohort && inattentive == kCohort && liners == kCohort && followers == 0;
  const auto n = "/" + std::to_string(kCohort);
  o.detail = "speeder=" + std::to_string(speeders) + n + " double-attention-fail=" +
             std::to_string(inattentive) + n + " floor-straight-liner=" + std::to_string(liners) +
             n + " cfe-follower flagged=" + std::to_string(followers) + n;
  return o;
}

Outcome trend_replication() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto game = alienzoo::testing::make_game(Experiment::Exp1);
  const auto follow = run_cohort(make_policy(BotKind::CfeFollower), kCohort, game, Condition::Cfe,
                                 kAcceptanceSeed);
  const auto greedy = run_cohort(make_policy(BotKind::Greedy), kCohort, game, Condition::Control,
                                 kAcceptanceSeed);
  std::vector<double> a, b;
  for (const auto& s : follow) a.push_back(s.pack_size);
  for (const auto& s : greedy) b.push_back(s.pack_size);
  const auto mw = mann_whitney_u(a, b);
  const double mean_a = describe(a).mean, mean_b = describe(b).mean;
  const double t = seconds_since(t0);
  o.pass = mw.p_value < kTrendAlpha && mean_a > mean_b && mean_b < kGreedyCeiling && t < kTrendBudgetS;
  o.detail = "cfe-follower mean=" + fmt(mean_a) + " greedy mean=" + fmt(mean_b) + " U=" +
             fmt(mw.statistic) + " p=" + fmt(mw.p_value) + " (" + to_string(mw.method) +
             ") time=" + fmt(t) + "s";
  return o;
}

std::vector<LongRow> simulate_lmm(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<LongRow> rows;
  for (int s = 0; s < 40; ++s) {
    const std::string group = s % 2 ? "cfe" : "control";
    const double b = z(rng);
    for (int t = 1; t <= 12; ++t) {
      const double mean = 10.0 + (s % 2 ? 2.0 + 0.8 * t : 0.0) + 0.5 * t;
      rows.push_back({"s" + std::to_string(s), group, t, mean + b + z(rng)});
    }
  }
  return rows;
}

Outcome statistics_correctness() {
  Outcome o;
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto mw = mann_whitney_u(a, b);
  const bool mw_ok = mw.method == TestMethod::Exact && std::abs(mw.p_value - 0.1) < kExactPTol;
  const std::vector<double> w{2.5, 3.1, 4.7, 1.9, 3.3};
  const auto wt = welch_t(w, w);
  const bool welch_ok = std::abs(wt.p_value - 1.0) < kExactPTol && std::abs(wt.effect_size) < kExactPTol;

  const auto rows = simulate_lmm(kAcceptanceSeed);
  const auto fit0 = fit_lmm_at_ratio(rows, 0.0);
  const auto d = build_lmm_design(rows);
  const Eigen::VectorXd ols = d.x.colPivHouseholderQr().solve(d.y);
  double max_diff = 0;
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(fit0.fixed_effects.at(d.terms[i]) - ols(i)));
  }
  // Monte-Carlo mean over 10 simulated studies of 40 subjects x 12 trials.
  double s2u = 0, s2e = 0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    const auto fit = fit_lmm_random_intercept(simulate_lmm(kAcceptanceSeed + 1 + r));
    s2u += fit.sigma2_subject / reps;
    s2e += fit.sigma2_residual / reps;
  }
  const bool lmm_ok = max_diff < kOlsTol && std::abs(s2u - 1.0) <= kVarianceBand &&
                      std::abs(s2e - 1.0) <= kVarianceBand;
  o.pass = mw_ok && welch_ok && lmm_ok;
  o.detail = "MWU p=" + fmt(mw.p_value) + " Welch(identical) p=" + fmt(wt.p_value) + " d=" +
             fmt(wt.effect_size) + " |LMM(0)-OLS|max=" + fmt(max_diff) + " sigma2_subject=" +
             fmt(s2u) + " sigma2_residual=" + fmt(s2e);
  return o;
}

Outcome service_integrity() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("alienzoo-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  StudyConfig cfg;
  cfg.experiment = 1;
  cfg.master_seed = kAcceptanceSeed;
  cfg.data_dir = dir;
  cfg.snapshot_every = 0;
  GameConfig gc;
  gc.experiment = 1;
  gc.model = alienzoo::testing::shared_model(Experiment::Exp1);
  // Every clock reading moves 25 s, so no request is ever early.
  auto ticks = std::make_shared<std::atomic<std::int64_t>>(1'700'000'000'000);
  StudyService svc(cfg, gc, [ticks] { return ticks->fetch_add(25'000); });

  httplib::Server server;
  server.new_task_queue = [] { return new httplib::ThreadPool(16); };
  register_routes(server, svc, "acceptance-token");
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::atomic<long> accepted{0}, rejected{0}, unexpected{0}, codes_issued{0};
  std::mutex ids_mu;
  std::vector<std::pair<std::string, int>> accepted_feeds;  // session, count
  std::set<std::string> codes;

  auto driver = [&](int k) {
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(60, 0);
    std::mt19937_64 rng(kAcceptanceSeed + k);
    std::uniform_int_distribution<int> leaf(0, kMaxLeaves);
    auto post = [&](const std::string& path, const json& body) {
      return cli.Post(path, body.dump(), "application/json");
    };
    auto count = [&](const httplib::Result& r, bool mutating) {
      if (!r) {
        std::cerr << "transport error: " << httplib::to_string(r.error()) << "\n";
        ++unexpected;
        return false;
      }
      if (r->status == 200 || r->status == 201) {
        if (mutating) ++accepted;
        return true;
      }
      if (r->status == 404 || r->status == 409 || r->status == 422) ++rejected;
      else ++unexpected;
      return false;
    };
    auto created = post("/api/session", {{"consent", true}});
    if (!count(created, true)) return;
    const std::string id = json::parse(created->body).at("session_id");
    const std::string base = "/api/session/" + id;
    int feeds = 0;
    for (int guard = 0; guard < 200; ++guard) {
      // interleaved invalid traffic
      count(post(base + "/feed", {{"leaves", {9, 9, 9, 9, 9}}, {"decision_time_ms", 1}}), true);
      count(cli.Get("/api/session/ffffffffffffffff/scene"), false);
      count(cli.Post(base + "/attention", "{oops", "application/json"), true);

      auto scene_res = cli.Get(base + "/scene");
      if (!count(scene_res, false)) break;
      const std::string kind = json::parse(scene_res->body).at("kind");
      if (kind == "instructions") {
        count(post(base + "/start", json::object()), true);
      } else if (kind == "choice") {
        // two concurrent feedings on the same session
        json body = {{"leaves", {leaf(rng), leaf(rng), leaf(rng), leaf(rng), leaf(rng)}},
                     {"decision_time_ms", 3000}};
        std::atomic<int> ok{0};
        std::thread twin([&] {
          httplib::Client c2("127.0.0.1", port);
          c2.set_read_timeout(60, 0);
          ok += count(c2.Post(base + "/feed", body.dump(), "application/json"), true);
        });
        ok += count(post(base + "/feed", body), true);
        twin.join();
        feeds += ok;
      } else if (kind == "feedback") {
        count(cli.Get(base + "/feedback"), false);
        count(post(base + "/continue", json::object()), true);
      } else if (kind == "attention") {
        count(post(base + "/attention", {{"answer", json::parse(scene_res->body).at("pack_size")}}), true);
      } else if (kind == "survey") {
        count(post(base + "/survey", json::object()), true);  // incomplete: 422
        json survey;
        to_json(survey, alienzoo::testing::clean_survey());
        count(post(base + "/survey", survey), true);
      } else if (kind == "payout") {
        std::vector<std::string> got;
        std::mutex got_mu;
        auto fetch = [&] {
          httplib::Client c2("127.0.0.1", port);
          c2.set_read_timeout(60, 0);
          auto r = c2.Get(base + "/payment-code");
          if (count(r, true)) {
            std::lock_guard lock(got_mu);
            got.push_back(json::parse(r->body).at("code"));
          }
        };
        std::thread t1(fetch), t2(fetch);
        t1.join();
        t2.join();
        std::lock_guard lock(ids_mu);
        codes_issued += static_cast<long>(got.size());
        for (auto& c : got) codes.insert(c);
        accepted_feeds.emplace_back(id, feeds);
        if (got.size() != 1) ++unexpected;
        break;
      } else {
        std::this_thread::yield();  // progress scene
      }
    }
  };

  std::vector<std::thread> threads;
  for (int k = 0; k < kHammerSessions; ++k) threads.emplace_back(driver, k);
  for (auto& t : threads) t.join();
  server.stop();
  listener.join();

  const auto events = read_event_log(svc.event_log_path());
  int feed_mismatch = 0, incomplete = 0;
  for (const auto& [id, n] : accepted_feeds) {
    const auto s = svc.session(id);
    if (static_cast<int>(s.trials.size()) != n) ++feed_mismatch;
    if (!s.completed()) ++incomplete;
  }
  const auto replayed = replay(svc.game(), events);
  const bool identical = replayed.to_json().dump() == svc.state_json().dump();
  int per_session_identical = 0;
  for (const auto& s : svc.sessions()) {
    per_session_identical += json(replayed.sessions.at(s.id)).dump() == json(s).dump();
  }
  o.pass = static_cast<long>(events.size()) == accepted.load() && unexpected == 0 &&
           accepted_feeds.size() == static_cast<std::size_t>(kHammerSessions) && feed_mismatch == 0 &&
           incomplete == 0 && identical && per_session_identical == kHammerSessions &&
           codes_issued == kHammerSessions && codes.size() == static_cast<std::size_t>(kHammerSessions);
  o.detail = "sessions done=" + std::to_string(accepted_feeds.size()) + " accepted=" +
             std::to_string(accepted.load()) + " logged events=" + std::to_string(events.size()) +
             " rejected=" + std::to_string(rejected.load()) + " unexpected=" +
             std::to_string(unexpected.load()) + " trial/accept mismatches=" +
             std::to_string(feed_mismatch) + " replay identical=" + (identical ? "yes" : "no") +
             " (" + std::to_string(per_session_identical) + " sessions) codes issued=" +
             std::to_string(codes_issued.load()) + " distinct=" + std::to_string(codes.size());
  std::filesystem::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"grid fidelity", grid_fidelity},
      {"model quality", model_quality},
      {"cfe oracle equivalence", cfe_oracle},
      {"no cfe at optimum", no_cfe_at_optimum},
      {"pack dynamics", pack_dynamics},
      {"protocol conformance", protocol_conformance},
      {"quality filters", quality_filters},
      {"trend replication", trend_replication},
      {"statistics correctness", statistics_correctness},
      {"service integrity", service_integrity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
