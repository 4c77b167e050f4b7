// Command-line front end: import, synth, featurize, train, identify,
// evaluate and adduser over one workspace directory.
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "motionid/container.hpp"
#include "motionid/evaluator.hpp"
#include "motionid/gbdt.hpp"
#include "motionid/hierarchy.hpp"
#include "motionid/logistic.hpp"
#include "motionid/parallel.hpp"
#include "motionid/pipeline.hpp"
#include "motionid/synthgen.hpp"
#include "motionid/text_io.hpp"
#include "workspace.hpp"

namespace {

using namespace motionid;
using namespace motionid::cli;

struct Common {
  std::string workspace;
  std::uint64_t seed = 0;
  std::size_t parallel = 0;
};

void add_common(CLI::App* app, Common& common, bool with_seed = true) {
  app->add_option("--workspace", common.workspace, "Workspace directory")->envname("MOTIONID_WORKSPACE");
  if (with_seed) app->add_option("--seed", common.seed, "Random seed");
  app->add_option("--parallel", common.parallel, "Worker threads (0 = all cores)");
}

LayerMode parse_mode(const std::string& name) {
  if (name == "layer1") return LayerMode::layer1;
  if (name == "layers12") return LayerMode::layers12;
  if (name == "full") return LayerMode::full;
  throw Error("cli", "unknown mode '" + name + "' (layer1, layers12, full)");
}

SplitRatios parse_ratios(const std::string& text) {
  const auto parts = text::split(text, ',');
  if (parts.size() != 4) throw Error("cli", "--ratios needs four comma-separated values");
  SplitRatios r{text::parse_double(parts[0]), text::parse_double(parts[1]), text::parse_double(parts[2]),
                text::parse_double(parts[3])};
  const double sum = r.train + r.cluster + r.validate + r.test;
  if (r.train < 0 || r.cluster < 0 || r.validate < 0 || r.test < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw Error("cli", "--ratios must be non-negative and sum to 1");
  }
  return r;
}

// --- import --------------------------------------------------------------

struct ImportArgs {
  Common common;
  std::vector<std::string> inputs;
};

void cmd_import(const ImportArgs& args) {
  const Workspace ws(args.common.workspace);
  std::vector<std::pair<Replay, std::string>> parsed;
  std::size_t dropped = 0, skipped = 0;
  for (const auto& input : args.inputs) {
    for (const auto& file : replay_files(input)) {
      parsed.emplace_back(load_any_replay(file, &dropped, &skipped), file.filename().string());
    }
  }
  if (parsed.empty()) throw Error("cli", "no replay files found");
  // Everything parsed and validated before the first write.
  ManifestEntries manifest = {{"command", "import"}, {"replays", std::to_string(parsed.size())},
                              {"dropped_events", std::to_string(dropped)},
                              {"skipped_sections", std::to_string(skipped)}};
  for (const auto& [replay, source] : parsed) {
    const fs::path dir = ws.replays() / file_safe(replay.metadata.user_id);
    fs::create_directories(dir);
    save_replay_file(replay, (dir / (file_safe(replay.replay_id()) + ".midr")).string());
    manifest.emplace_back("source." + source, replay.metadata.user_id + "/" + file_safe(replay.replay_id()));
  }
  write_manifest(ws.manifest("import"), manifest);
  std::cout << "imported " << parsed.size() << " replays (" << dropped << " events dropped, " << skipped
            << " sections skipped)\n";
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  Common common;
  CorpusSpec spec;
  double fixed_height = 0.0;
};

void cmd_synth(SynthArgs args) {
  const Workspace ws(args.common.workspace);
  CorpusSpec& spec = args.spec;
  spec.seed = args.common.seed;
  if (args.fixed_height > 0.0) spec.priors.fixed_height = args.fixed_height;
  spec.priors.validate();
  std::vector<UserProfile> profiles(spec.users);
  parallel_for(spec.users, resolve_parallelism(args.common.parallel), [&](std::size_t u) {
    profiles[u] = generate_user(spec.seed, u, spec.priors);
    const fs::path dir = ws.replays() / file_safe(profiles[u].user_id);
    fs::create_directories(dir);
    for (const Replay& replay : generate_user_replays(profiles[u], spec)) {
      save_replay_file(replay, (dir / (file_safe(replay.replay_id()) + ".midr")).string());
    }
  });
  std::ostringstream table;
  write_profile_manifest(profiles, table);
  write_atomic(ws.root() / "profiles.csv", table.str());
  write_manifest(ws.manifest("synth"),
                 {{"command", "synth"},
                  {"users", std::to_string(spec.users)},
                  {"sessions_per_user", std::to_string(spec.sessions_per_user)},
                  {"replays_per_session", std::to_string(spec.replays_per_session)},
                  {"notes_per_replay", std::to_string(spec.notes_per_replay)},
                  {"fps", text::format_exact(spec.fps)},
                  {"noise_scale", text::format_exact(spec.noise_scale)},
                  {"fixed_height", spec.priors.fixed_height ? text::format_exact(*spec.priors.fixed_height) : "none"},
                  {"equalize_style", spec.priors.equalize_style ? "1" : "0"},
                  {"style_spread", text::format_exact(spec.priors.style_spread)},
                  {"seed", std::to_string(spec.seed)}});
  std::cout << "generated " << spec.users << " users x " << spec.sessions_per_user * spec.replays_per_session
            << " replays\n";
}

// --- featurize -----------------------------------------------------------

struct FeaturizeArgs {
  Common common;
  std::string variant = "full232";
  std::string ratios = "0.7,0.1,0.1,0.1";
  DatasetOptions options;
};

void cmd_featurize(FeaturizeArgs args) {
  const Workspace ws(args.common.workspace);
  DatasetOptions& o = args.options;
  o.variant = parse_variant(args.variant);
  o.ratios = parse_ratios(args.ratios);
  o.seed = args.common.seed;
  o.parallelism = args.common.parallel;
  o.window.validate();
  const auto dirs = user_directories(ws);
  Dataset dataset = build_dataset(dirs.size(), [&](std::size_t u) { return load_user_replays(dirs[u]); }, o);
  scale_dataset(dataset);
  save_dataset(ws, dataset);
  std::size_t train = 0, test = 0, unusable = 0;
  for (const UserData& user : dataset.users) {
    train += user.train.size();
    test += user.test.size();
    if (!user.usable) ++unusable;
  }
  ManifestEntries manifest = {{"command", "featurize"}, {"users", std::to_string(dataset.users.size())}};
  for (auto& entry : dataset_entries(o)) manifest.push_back(entry);
  manifest.emplace_back("train_samples", std::to_string(train));
  manifest.emplace_back("test_samples", std::to_string(test));
  manifest.emplace_back("users_without_training_samples", std::to_string(unusable));
  write_manifest(ws.manifest("featurize"), manifest);
  std::cout << "featurized " << dataset.users.size() << " users: " << train << " training and " << test
            << " test samples (" << variant_name(o.variant) << ")\n";
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  Common common;
  HierarchyConfig hierarchy;
  GbdtConfig gbdt;
  std::string classifier = "gbdt";
};

ClassifierTrainer make_trainer(const std::string& classifier, const GbdtConfig& gbdt) {
  if (classifier == "gbdt") return gbdt_trainer(gbdt);
  if (classifier == "logistic") return logistic_trainer();
  throw Error("cli", "unknown classifier '" + classifier + "' (gbdt, logistic)");
}

ManifestEntries train_entries(const TrainArgs& args) {
  ManifestEntries entries = {{"command", "train"},
                             {"classifier", args.classifier},
                             {"groups", std::to_string(args.hierarchy.groups_per_layer)},
                             {"max_component_size", std::to_string(args.hierarchy.max_component_size)},
                             {"similar_users", std::to_string(args.hierarchy.similar_users)},
                             {"seed", std::to_string(args.hierarchy.seed)}};
  if (args.classifier == "gbdt") {
    for (auto& e : gbdt_entries(args.gbdt)) entries.push_back(e);
  }
  return entries;
}

std::string config_key(const ManifestEntries& entries) {
  std::string key;
  for (const auto& [k, v] : entries) key += k + "=" + v + ";";
  return key;
}

void cmd_train(TrainArgs args) {
  const Workspace ws(args.common.workspace);
  args.hierarchy.seed = args.common.seed;
  args.hierarchy.parallelism = args.common.parallel;
  args.gbdt.validate();
  const Dataset dataset = load_dataset(ws);
  const TrainingSet training = make_training_set(dataset);
  const auto clustering = clustering_presentations(dataset);
  const ManifestEntries entries = train_entries(args);
  const auto trainer = checkpointed(make_trainer(args.classifier, args.gbdt), config_key(entries), ws.train_cache());
  const HierarchicalModel model = train_hierarchy(training, clustering, args.hierarchy, trainer);
  save_hierarchy(model, ws.model().string());
  ManifestEntries manifest = entries;
  manifest.emplace_back("users", std::to_string(model.user_count()));
  manifest.emplace_back("components", std::to_string(model.components.size()));
  write_manifest(ws.manifest("train"), manifest);
  std::cout << "trained " << 2 * args.hierarchy.groups_per_layer << " group models and "
            << model.components.size() << " component models for " << model.user_count() << " users\n";
}

// --- identify ------------------------------------------------------------

struct IdentifyArgs {
  Common common;
  std::string input;
  std::string mode = "full";
  std::size_t top = 5;
};

Matrix input_samples(const Workspace& ws, const std::string& input) {
  const auto options = dataset_options(read_manifest(ws.manifest("featurize")));
  std::vector<FeatureVector> samples;
  const fs::path path(input);
  if (path.extension() == ".csv") {
    std::istringstream in(read_text(path));
    Variant variant;
    samples = read_feature_file(in, &variant);
    if (variant != options.variant) throw Error("cli", "feature file variant differs from the workspace");
    // Feature files in the workspace are already scaled; external ones are raw.
    if (fs::equivalent(path.parent_path(), ws.features())) return to_matrix(samples);
  } else {
    const Replay replay = load_any_replay(path);
    const SessionReplay source{&replay, "input"};
    samples = featurize_all(std::span(&source, 1), options.variant, options.window);
  }
  if (samples.empty()) throw Error("cli", "input yields no featurizable samples");
  std::istringstream scaler_in(read_text(ws.root() / "scaler.txt"));
  const Scaler scaler = read_scaler(scaler_in);
  Matrix m = to_matrix(samples);
  transform_in_place(scaler, m);
  return m;
}

void cmd_identify(const IdentifyArgs& args) {
  const Workspace ws(args.common.workspace);
  const HierarchicalModel model = load_hierarchy(ws.model().string());
  const Matrix samples = input_samples(ws, args.input);
  const Identification id = identify(model, samples, parse_mode(args.mode));
  std::cout << "identity " << model.users[id.final_identity] << " (" << samples.rows() << " samples";
  if (id.refined_by) std::cout << ", refined by component " << *id.refined_by;
  std::cout << ")\n";
  for (std::size_t i = 0; i < std::min(args.top, id.ranking.size()); ++i) {
    const UserIndex u = id.ranking[i];
    std::cout << i + 1 << ' ' << model.users[u] << ' ' << text::format_exact(id.aggregate[u]) << '\n';
  }
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::string mode = "full";
  EvalOptions options;
};

void cmd_evaluate(EvaluateArgs args) {
  const Workspace ws(args.common.workspace);
  const HierarchicalModel model = load_hierarchy(ws.model().string());
  const Dataset dataset = load_dataset(ws);
  const auto tests = make_test_sets(dataset);
  std::set<std::string> test_sessions;
  bool fallback = false;
  for (const UserData& user : dataset.users) {
    if (!user.usable) continue;
    fallback = fallback || user.splits.same_session_fallback;
    const auto& sessions = user.splits.same_session_fallback ? user.splits[Split::train] : user.splits[Split::test];
    test_sessions.insert(sessions.begin(), sessions.end());
  }
  const auto users = make_training_set(dataset).user_ids;
  if (users != model.users) throw Error("cli", "model users differ from the featurized users; retrain");
  args.options.test_sessions = &test_sessions;
  const HierarchyIdentifier identifier(model, parse_mode(args.mode));
  EvalReport report = evaluate(identifier, tests, args.options);
  impact_factors(report, user_attributes(dataset));
  try {
    report.importance_by_type = importance_by_type(model, feature_kinds(dataset.variant));
  } catch (const EvalError& e) {
    std::cerr << "evaluate: importance skipped: " << e.what() << '\n';
  }
  std::ostringstream text_report, outcomes;
  write_report(report, text_report);
  write_user_outcomes(report, model.users, outcomes);
  write_atomic(ws.reports() / "evaluation.txt", text_report.str());
  write_atomic(ws.reports() / "user_outcomes.csv", outcomes.str());
  write_manifest(ws.manifest("evaluate"), {{"command", "evaluate"},
                                           {"mode", args.mode},
                                           {"samples_per_user", std::to_string(args.options.samples_per_user)},
                                           {"same_session_fallback_users", fallback ? "some" : "none"}});
  std::cout << text_report.str();
}

// --- adduser -------------------------------------------------------------

struct AddUserArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string user_id;
};

void cmd_adduser(const AddUserArgs& args) {
  const Workspace ws(args.common.workspace);
  const auto train_manifest = read_manifest(ws.manifest("train"));
  DatasetOptions options = dataset_options(read_manifest(ws.manifest("featurize")));
  std::vector<Replay> replays;
  for (const auto& input : args.inputs) {
    for (const auto& file : replay_files(input)) replays.push_back(load_any_replay(file));
  }
  if (replays.empty()) throw Error("cli", "no replay files for the new user");
  if (!args.user_id.empty()) {
    for (Replay& r : replays) r.metadata.user_id = args.user_id;
  }
  Dataset dataset = load_dataset(ws);
  UserData user = build_user(std::move(replays), options);
  if (!user.usable) throw Error("cli", "new user has no featurizable training samples");
  for (auto* list : {&user.train, &user.cluster, &user.validate, &user.test}) {
    for (FeatureVector& v : *list) transform_in_place(dataset.scaler, v.values);
  }

  HierarchicalModel model = load_hierarchy(ws.model().string());
  TrainingSet training = make_training_set(dataset);
  if (training.user_ids != model.users) throw Error("cli", "model users differ from the featurized users; retrain");
  const std::string classifier = manifest_value(train_manifest, "classifier");
  const GbdtConfig gbdt = classifier == "gbdt" ? gbdt_config(train_manifest) : GbdtConfig{};
  ManifestEntries key_entries;
  for (const auto& [k, v] : train_manifest) {
    if (k != "users" && k != "components") key_entries.emplace_back(k, v);
  }
  const auto trainer = checkpointed(make_trainer(classifier, gbdt), config_key(key_entries), ws.train_cache());
  const auto retrained = add_user(model, training, user.user_id, to_matrix(user.train), trainer);
  save_hierarchy(model, ws.model().string());
  dataset.users.push_back(std::move(user));
  save_dataset(ws, dataset);
  ManifestEntries manifest;
  for (const auto& [k, v] : train_manifest) {
    if (k != "users") manifest.emplace_back(k, v);
  }
  manifest.emplace_back("users", std::to_string(model.user_count()));
  manifest.emplace_back("layer3_stale", model.layer3_stale ? "1" : "0");
  write_manifest(ws.manifest("train"), manifest);
  std::cout << "added " << model.users.back() << "; retrained";
  for (const auto& r : retrained) std::cout << ' ' << model_file_name(r.layer_index, r.group);
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motionid: identify users from head and hand motion replays"};
  app.require_subcommand(1);

  ImportArgs import_args;
  auto* import_cmd = app.add_subcommand("import", "Ingest BSOR or MIDR1 replays into the workspace");
  add_common(import_cmd, import_args.common, false);
  import_cmd->add_option("inputs", import_args.inputs, "Replay files or directories")->required();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic replay corpus");
  add_common(synth_cmd, synth_args.common);
  synth_cmd->add_option("--users", synth_args.spec.users);
  synth_cmd->add_option("--sessions", synth_args.spec.sessions_per_user);
  synth_cmd->add_option("--replays-per-session", synth_args.spec.replays_per_session);
  synth_cmd->add_option("--notes", synth_args.spec.notes_per_replay);
  synth_cmd->add_option("--fps", synth_args.spec.fps);
  synth_cmd->add_option("--noise", synth_args.spec.noise_scale);
  synth_cmd->add_option("--fixed-height", synth_args.fixed_height, "Give every user this height (m)");
  synth_cmd->add_flag("--equalize-style", synth_args.spec.priors.equalize_style, "Same motion style for all users");
  synth_cmd->add_option("--style-spread", synth_args.spec.priors.style_spread);

  FeaturizeArgs featurize_args;
  auto* featurize_cmd = app.add_subcommand("featurize", "Sessionize, split, sample, featurize and scale");
  add_common(featurize_cmd, featurize_args.common);
  featurize_cmd->add_option("--variant", featurize_args.variant, "euler90|quat105|context22|light127|full232");
  featurize_cmd->add_option("--samples-per-user", featurize_args.options.train_samples_per_user);
  featurize_cmd->add_option("--ratios", featurize_args.ratios, "train,cluster,validate,test");
  featurize_cmd->add_option("--pre", featurize_args.options.window.pre_span);
  featurize_cmd->add_option("--post", featurize_args.options.window.post_span);
  featurize_cmd->add_option("--min-frames", featurize_args.options.window.min_frames);
  featurize_cmd->add_option("--eval-samples-per-session", featurize_args.options.eval_samples_per_session);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the hierarchical model");
  add_common(train_cmd, train_args.common);
  train_cmd->add_option("--groups", train_args.hierarchy.groups_per_layer);
  train_cmd->add_option("--max-component-size", train_args.hierarchy.max_component_size);
  train_cmd->add_option("--similar-users", train_args.hierarchy.similar_users);
  train_cmd->add_option("--classifier", train_args.classifier, "gbdt|logistic");
  train_cmd->add_option("--rounds", train_args.gbdt.n_estimators);
  train_cmd->add_option("--learning-rate", train_args.gbdt.learning_rate);
  train_cmd->add_option("--leaves", train_args.gbdt.num_leaves);
  train_cmd->add_option("--max-bin", train_args.gbdt.max_bin);
  train_cmd->add_option("--min-data-in-leaf", train_args.gbdt.min_data_in_leaf);
  train_cmd->add_option("--min-child-weight", train_args.gbdt.min_child_weight);
  train_cmd->add_option("--min-split-gain", train_args.gbdt.min_split_gain);
  train_cmd->add_option("--reg-alpha", train_args.gbdt.reg_alpha);
  train_cmd->add_option("--reg-lambda", train_args.gbdt.reg_lambda);
  train_cmd->add_option("--colsample", train_args.gbdt.colsample_bytree);
  train_cmd->add_option("--max-depth", train_args.gbdt.max_depth);
  train_cmd->add_flag("--goss", train_args.gbdt.goss_enabled);

  IdentifyArgs identify_args;
  auto* identify_cmd = app.add_subcommand("identify", "Rank users for a replay or feature file");
  add_common(identify_cmd, identify_args.common, false);
  identify_cmd->add_option("input", identify_args.input, "Replay (.midr/.bsor) or feature file (.csv)")->required();
  identify_cmd->add_option("--mode", identify_args.mode, "layer1|layers12|full");
  identify_cmd->add_option("--top", identify_args.top);

  EvaluateArgs evaluate_args;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Accuracy report on the test split");
  add_common(evaluate_cmd, evaluate_args.common, false);
  evaluate_cmd->add_option("--mode", evaluate_args.mode, "layer1|layers12|full");
  evaluate_cmd->add_option("--samples-per-user", evaluate_args.options.samples_per_user);
  evaluate_cmd->add_option("--curve", evaluate_args.options.curve_counts, "Sample counts for the accuracy curve")
      ->delimiter(',');

  AddUserArgs adduser_args;
  auto* adduser_cmd = app.add_subcommand("adduser", "Add one user, retraining one model per layer");
  add_common(adduser_cmd, adduser_args.common, false);
  adduser_cmd->add_option("inputs", adduser_args.inputs, "The new user's replay files or directories")->required();
  adduser_cmd->add_option("--user-id", adduser_args.user_id, "Override the user id stored in the replays");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*import_cmd) cmd_import(import_args);
    else if (*synth_cmd) cmd_synth(synth_args);
    else if (*featurize_cmd) cmd_featurize(featurize_args);
    else if (*train_cmd) cmd_train(train_args);
    else if (*identify_cmd) cmd_identify(identify_args);
    else if (*evaluate_cmd) cmd_evaluate(evaluate_args);
    else if (*adduser_cmd) cmd_adduser(adduser_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
