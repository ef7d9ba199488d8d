// alienzoo: data generation, model training, counterfactual lookup, the study service,
// bot simulation and offline analysis.
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "alienzoo/analysis.hpp"
#include "alienzoo/bots.hpp"
#include "alienzoo/cfe.hpp"
#include "alienzoo/data_gen.hpp"
#include "alienzoo/errors.hpp"
#include "alienzoo/export.hpp"
#include "alienzoo/game_json.hpp"
#include "alienzoo/http_api.hpp"
#include "alienzoo/service.hpp"
#include "alienzoo/tree_model.hpp"

// keep below the Eigen includes
#include <httplib.h>

using namespace alienzoo;
using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  return in;
}

Dataset load_dataset(const std::string& path, int experiment) {
  auto in = open_in(path);
  return read_csv(in, experiment_from_int(experiment), Provenance::Grid);
}

json metrics_json(const ModelMetrics& m) {
  return {{"mse", m.mse}, {"r_squared", m.r_squared_defined ? json(m.r_squared) : json(nullptr)}};
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alien Zoo study platform"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write the labelled plant grid as CSV");
  int gen_experiment = 1, replicates = 100;
  bool balance = false;
  std::uint64_t gen_seed = 20220101;
  std::string gen_out;
  gen->add_option("--experiment,-e", gen_experiment, "1 or 2")->check(CLI::IsMember({1, 2}));
  gen->add_option("--replicates", replicates, "copies of each grid point")->check(CLI::PositiveNumber);
  gen->add_flag("--balance", balance, "SMOTE-balance the growth bins");
  gen->add_option("--seed", gen_seed, "SMOTE seed");
  gen->add_option("--out,-o", gen_out, "output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Fit the growth model");
  std::string train_data, train_out;
  int train_experiment = 1, depth = 0, min_leaf = 5;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 20220101;
  train->add_option("--data", train_data, "labelled CSV (usually balanced)")->required();
  train->add_option("--experiment,-e", train_experiment)->check(CLI::IsMember({1, 2}));
  train->add_option("--max-depth", depth, "default 7 (exp1) or 5 (exp2)");
  train->add_option("--min-samples-leaf", min_leaf)->check(CLI::PositiveNumber);
  train->add_option("--test-fraction", test_fraction)->check(CLI::Range(0.0, 0.9));
  train->add_option("--seed", split_seed, "split seed");
  train->add_option("--out,-o", train_out, "model document")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "R^2 and MSE of a model on a CSV");
  std::string eval_model, eval_data;
  eval->add_option("--model,-m", eval_model)->required();
  eval->add_option("--data", eval_data)->required();

  // cfe
  auto* cfe = app.add_subcommand("cfe", "Counterfactual for one plant vector");
  std::string cfe_model, cfe_point, cfe_mode = "max_target";
  CfeConfig cfe_config;
  cfe->add_option("--model,-m", cfe_model)->required();
  cfe->add_option("point", cfe_point, "leaves per plant, e.g. 0,5,0,1,0")->required();
  cfe->add_option("--mode", cfe_mode)->check(CLI::IsMember({"max_target", "strict_improve"}));
  cfe->add_option("--epsilon", cfe_config.epsilon);
  cfe->add_option("--delta", cfe_config.delta_improve);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the study service");
  std::string serve_config;
  serve->add_option("--config,-c", serve_config)->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Play bot sessions and export them");
  std::string sim_policy, sim_config, sim_out, sim_condition, sim_fixed;
  int sim_n = 20;
  std::uint64_t sim_seed = 1;
  bool sim_inattentive = false;
  sim->add_option("--policy", sim_policy)
      ->required()
      ->check(CLI::IsMember({"random", "cfe-follower", "greedy", "straight-liner", "speeder"}));
  sim->add_option("--n", sim_n)->check(CLI::PositiveNumber);
  sim->add_option("--config,-c", sim_config)->required();
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out,-o", sim_out)->required();
  sim->add_option("--condition", sim_condition, "control or cfe (default: cfe for cfe-follower)")
      ->check(CLI::IsMember({"control", "cfe"}));
  sim->add_option("--fixed-choice", sim_fixed, "straight-liner vector, e.g. 0,0,0,0,0");
  sim->add_flag("--inattentive", sim_inattentive, "answer every attention check wrongly");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Quality flags, summaries, tests and mixed model");
  std::vector<std::string> ana_export, ana_survey;
  std::string ana_out;
  ana->add_option("--export", ana_export, "long-format CSV (repeatable)")->required();
  ana->add_option("--survey", ana_survey, "survey CSV (repeatable, same order)")->required();
  ana->add_option("--out,-o", ana_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto data = generate_grid(experiment_from_int(gen_experiment), replicates);
      if (balance) data = smote_balance(data, SmoteOptions{10, 5, gen_seed});
      auto out = open_out(gen_out);
      write_csv(out, data);
      std::cout << data.size() << " samples written to " << gen_out << "\n";
    } else if (*train) {
      const auto data = load_dataset(train_data, train_experiment);
      auto [train_set, test_set] = train_test_split(data, test_fraction, split_seed);
      TreeOptions opts;
      opts.max_depth = depth > 0 ? depth : (train_experiment == 1 ? 7 : 5);
      opts.min_samples_leaf = min_leaf;
      auto model = fit_tree(train_set, opts);
      const auto metrics = evaluate(model, test_set);
      model.set_metrics(metrics);
      save_model(model, train_out);
      std::cout << json({{"model", train_out},
                         {"max_depth", opts.max_depth},
                         {"train_samples", train_set.size()},
                         {"test_samples", test_set.size()},
                         {"test", metrics_json(metrics)}})
                       .dump(2)
                << "\n";
    } else if (*eval) {
      const auto model = load_model(eval_model);
      const auto data = load_dataset(eval_data, static_cast<int>(model.experiment()));
      std::cout << metrics_json(evaluate(model, data)).dump(2) << "\n";
    } else if (*cfe) {
      const auto model = load_model(cfe_model);
      cfe_config.mode = cfe_mode == "max_target" ? CfeMode::MaxTarget : CfeMode::StrictImprove;
      const auto x = PlantVector::parse(cfe_point);
      const auto c = compute_cfe(model, x, cfe_config);
      if (!c) {
        std::cout << "none (near-optimal)\n";
      } else {
        std::cout << json({{"factual", x},
                           {"suggestion", c->suggestion},
                           {"predicted_growth", c->predicted_growth},
                           {"distance", c->distance}})
                         .dump(2)
                  << "\n";
      }
    } else if (*serve) {
      auto config = load_study_config(serve_config);
      apply_env_overrides(config);
      StudyService service(config, game_config(config));
      httplib::Server server;
      server.new_task_queue = [] { return new httplib::ThreadPool(16); };
      register_routes(server, service, config.admin_token);
      if (config.admin_token.empty()) {
        std::cerr << "warning: ALIENZOO_ADMIN_TOKEN unset; admin routes disabled\n";
      }
      const auto [host, port] = parse_bind(config.bind);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) throw Error("cannot listen on " + config.bind);
      service.write_snapshot();
    } else if (*sim) {
      const auto config = load_study_config(sim_config);
      const Game game(game_config(config));
      auto policy = make_policy(bot_kind_from_string(sim_policy));
      policy.attentive = !sim_inattentive;
      if (!sim_fixed.empty()) policy.fixed_choice = PlantVector::parse(sim_fixed);
      const auto condition = !sim_condition.empty() ? condition_from_string(sim_condition)
                             : policy.kind == BotKind::CfeFollower ? Condition::Cfe
                                                                   : Condition::Control;
      const auto sessions = run_cohort(policy, sim_n, game, condition, sim_seed);
      std::filesystem::create_directories(sim_out);
      const std::filesystem::path dir(sim_out);
      open_out((dir / "long.csv").string()) << export_long_csv(sessions);
      open_out((dir / "survey.csv").string()) << export_survey_csv(sessions);
      auto jl = open_out((dir / "sessions.jsonl").string());
      for (const auto& s : sessions) jl << json(s).dump() << "\n";
      double total = 0;
      for (const auto& s : sessions) total += s.pack_size;
      std::cout << sessions.size() << " " << sim_policy << " sessions (" << to_string(condition)
                << "), mean final pack " << total / sessions.size() << ", written to " << sim_out
                << "\n";
    } else if (*ana) {
      if (ana_export.size() != ana_survey.size()) {
        throw ConfigError("--export and --survey must be given the same number of times");
      }
      std::vector<Session> sessions;
      for (std::size_t i = 0; i < ana_export.size(); ++i) {
        auto lin = open_in(ana_export[i]);
        auto sin = open_in(ana_survey[i]);
        auto part = import_sessions(lin, sin);
        sessions.insert(sessions.end(), part.begin(), part.end());
      }
      const auto report = analyze_sessions(sessions);
      write_report(report, ana_out);
      std::size_t excluded = 0;
      for (const auto& q : report.quality) excluded += q.flags.any();
      std::cout << sessions.size() << " sessions, " << excluded << " excluded; report in "
                << ana_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
