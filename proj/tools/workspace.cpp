#include "workspace.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "motionid/bsor.hpp"
#include "motionid/container.hpp"
#include "motionid/digest.hpp"
#include "motionid/text_io.hpp"

namespace motionid::cli {

namespace {

Error cli_error(const std::string& message) { return Error("cli", message); }

std::string join_ratios(const SplitRatios& r) {
  return text::format_exact(r.train) + "," + text::format_exact(r.cluster) + "," +
         text::format_exact(r.validate) + "," + text::format_exact(r.test);
}

std::string csv_safe(std::string value) {
  std::replace(value.begin(), value.end(), ',', ';');
  return value;
}

}  // namespace

Workspace::Workspace(const std::string& path) {
  if (path.empty()) throw cli_error("no workspace given (use --workspace or MOTIONID_WORKSPACE)");
  root_ = fs::path(path);
  if (!fs::is_directory(root_)) throw cli_error("workspace " + path + " does not exist");
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path temp = path.string() + ".partial";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw cli_error("cannot write " + temp.string());
    out << content;
    if (!out.flush()) throw cli_error("write failed for " + temp.string());
  }
  fs::rename(temp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cli_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_manifest(const fs::path& path, const ManifestEntries& entries) {
  std::ostringstream out;
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  write_atomic(path, out.str());
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw cli_error("missing " + path.filename().string() + "; run the earlier step first");
  std::istringstream in(read_text(path));
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    values[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return values;
}

const std::string& manifest_value(const std::map<std::string, std::string>& manifest, const std::string& key) {
  const auto it = manifest.find(key);
  if (it == manifest.end()) throw cli_error("manifest lacks '" + key + "'");
  return it->second;
}

std::vector<fs::path> replay_files(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else if (fs::is_directory(path)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".midr" || ext == ".bsor") files.push_back(entry.path());
    }
  } else {
    throw cli_error("no such input " + path.string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Replay load_any_replay(const fs::path& path, std::size_t* dropped, std::size_t* skipped) {
  const std::string bytes = read_text(path);
  const std::span<const std::uint8_t> view(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
  Replay replay;
  if (bytes.rfind("MIDR1", 0) == 0) {
    replay = decode_container(view);
  } else {
    BsorImport imported = import_bsor(view);
    if (dropped) *dropped += imported.dropped_events;
    if (skipped) *skipped += imported.skipped_sections;
    replay = std::move(imported.replay);
  }
  if (replay.replay_id().empty()) replay.metadata.extra["replay_id"] = path.stem().string();
  if (replay.metadata.user_id.empty()) throw cli_error(path.string() + " has no user id");
  return replay;
}

std::string file_safe(std::string name) {
  for (char& c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return name;
}

std::vector<fs::path> user_directories(const Workspace& ws) {
  std::vector<fs::path> dirs;
  if (fs::is_directory(ws.replays())) {
    for (const auto& entry : fs::directory_iterator(ws.replays())) {
      if (entry.is_directory()) dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw cli_error("no replays in workspace; run import or synth first");
  return dirs;
}

std::vector<Replay> load_user_replays(const fs::path& directory) {
  std::vector<Replay> replays;
  for (const auto& file : replay_files(directory)) replays.push_back(load_any_replay(file));
  return replays;
}

void save_dataset(const Workspace& ws, const Dataset& dataset) {
  auto save = [&](const char* name, auto member) {
    std::vector<FeatureVector> all;
    for (const UserData& user : dataset.users) {
      const auto& list = user.*member;
      all.insert(all.end(), list.begin(), list.end());
    }
    std::ostringstream out;
    write_feature_file(all, dataset.variant, out);
    write_atomic(ws.features() / (std::string(name) + ".csv"), out.str());
  };
  save("train", &UserData::train);
  save("cluster", &UserData::cluster);
  save("validate", &UserData::validate);
  save("test", &UserData::test);

  std::ostringstream scaler;
  write_scaler(dataset.scaler, scaler);
  write_atomic(ws.root() / "scaler.txt", scaler.str());

  std::vector<SplitRecord> records;
  std::ostringstream users;
  users << "user_id,headset,platform,country,handedness,height,replay_count,usable,same_session_fallback\n";
  for (const UserData& user : dataset.users) {
    for (const Session& s : user.sessions) records.push_back({user.user_id, s.session_id, user.splits.split_of(s.session_id)});
    const UserAttributes& a = user.attributes;
    users << user.user_id << ',' << csv_safe(a.headset) << ',' << csv_safe(a.platform) << ','
          << csv_safe(a.country) << ',' << csv_safe(a.handedness) << ','
          << (a.height ? text::format_exact(*a.height) : "") << ','
          << (a.replay_count ? std::to_string(*a.replay_count) : "") << ',' << (user.usable ? 1 : 0) << ','
          << (user.splits.same_session_fallback ? 1 : 0) << '\n';
  }
  std::ostringstream splits;
  write_split_manifest(records, splits);
  write_atomic(ws.root() / "splits.csv", splits.str());
  write_atomic(ws.root() / "users.csv", users.str());
}

Dataset load_dataset(const Workspace& ws) {
  Dataset dataset;
  std::map<std::string, std::size_t> index;
  {
    std::istringstream in(read_text(ws.root() / "users.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      const auto f = text::split(line, ',');
      if (f.size() != 9) throw cli_error("malformed users.csv line: " + line);
      UserData user;
      user.user_id = std::string(f[0]);
      user.splits.user_id = user.user_id;
      user.attributes.headset = std::string(f[1]);
      user.attributes.platform = std::string(f[2]);
      user.attributes.country = std::string(f[3]);
      user.attributes.handedness = std::string(f[4]);
      if (!f[5].empty()) user.attributes.height = text::parse_double(f[5]);
      if (!f[6].empty()) user.attributes.replay_count = text::parse_uint(f[6]);
      user.usable = f[7] == "1";
      user.splits.same_session_fallback = f[8] == "1";
      index[user.user_id] = dataset.users.size();
      dataset.users.push_back(std::move(user));
    }
  }
  {
    std::istringstream in(read_text(ws.root() / "splits.csv"));
    for (const SplitRecord& r : read_split_manifest(in)) {
      const auto it = index.find(r.user_id);
      if (it == index.end()) throw cli_error("splits.csv names unknown user " + r.user_id);
      UserData& user = dataset.users[it->second];
      user.splits[r.split].push_back(r.session_id);
      user.sessions.push_back({r.session_id, r.user_id, {}, 0.0, 0.0});
    }
  }
  auto load = [&](const char* name, auto member) {
    std::istringstream in(read_text(ws.features() / (std::string(name) + ".csv")));
    for (FeatureVector& v : read_feature_file(in, &dataset.variant)) {
      const auto it = index.find(v.user_id);
      if (it == index.end()) throw cli_error(std::string(name) + ".csv names unknown user " + v.user_id);
      (dataset.users[it->second].*member).push_back(std::move(v));
    }
  };
  load("train", &UserData::train);
  load("cluster", &UserData::cluster);
  load("validate", &UserData::validate);
  load("test", &UserData::test);
  {
    std::istringstream in(read_text(ws.root() / "scaler.txt"));
    dataset.scaler = read_scaler(in);
  }
  dataset.scaled = true;
  return dataset;
}

ManifestEntries dataset_entries(const DatasetOptions& o) {
  return {
      {"variant", variant_name(o.variant)},
      {"window.pre_span", text::format_exact(o.window.pre_span)},
      {"window.post_span", text::format_exact(o.window.post_span)},
      {"window.min_frames", std::to_string(o.window.min_frames)},
      {"ratios", join_ratios(o.ratios)},
      {"samples_per_user", std::to_string(o.train_samples_per_user)},
      {"eval_samples_per_session", std::to_string(o.eval_samples_per_session)},
      {"seed", std::to_string(o.seed)},
  };
}

DatasetOptions dataset_options(const std::map<std::string, std::string>& m) {
  DatasetOptions o;
  o.variant = parse_variant(manifest_value(m, "variant"));
  o.window.pre_span = text::parse_double(manifest_value(m, "window.pre_span"));
  o.window.post_span = text::parse_double(manifest_value(m, "window.post_span"));
  o.window.min_frames = text::parse_uint(manifest_value(m, "window.min_frames"));
  const auto ratios = text::split(manifest_value(m, "ratios"), ',');
  if (ratios.size() != 4) throw cli_error("malformed ratios in manifest");
  o.ratios = {text::parse_double(ratios[0]), text::parse_double(ratios[1]), text::parse_double(ratios[2]),
              text::parse_double(ratios[3])};
  o.train_samples_per_user = text::parse_uint(manifest_value(m, "samples_per_user"));
  o.eval_samples_per_session = text::parse_uint(manifest_value(m, "eval_samples_per_session"));
  o.seed = text::parse_uint(manifest_value(m, "seed"));
  return o;
}

ManifestEntries gbdt_entries(const GbdtConfig& c) {
  using text::format_exact;
  return {
      {"gbdt.learning_rate", format_exact(c.learning_rate)},
      {"gbdt.n_estimators", std::to_string(c.n_estimators)},
      {"gbdt.num_leaves", std::to_string(c.num_leaves)},
      {"gbdt.max_bin", std::to_string(c.max_bin)},
      {"gbdt.min_data_in_leaf", std::to_string(c.min_data_in_leaf)},
      {"gbdt.min_child_weight", format_exact(c.min_child_weight)},
      {"gbdt.min_split_gain", format_exact(c.min_split_gain)},
      {"gbdt.reg_alpha", format_exact(c.reg_alpha)},
      {"gbdt.reg_lambda", format_exact(c.reg_lambda)},
      {"gbdt.colsample_bytree", format_exact(c.colsample_bytree)},
      {"gbdt.max_depth", std::to_string(c.max_depth)},
      {"gbdt.goss", c.goss_enabled ? "1" : "0"},
      {"gbdt.goss_top_rate", format_exact(c.goss_top_rate)},
      {"gbdt.goss_other_rate", format_exact(c.goss_other_rate)},
  };
}

GbdtConfig gbdt_config(const std::map<std::string, std::string>& m) {
  GbdtConfig c;
  auto d = [&](const char* key) { return text::parse_double(manifest_value(m, key)); };
  auto i = [&](const char* key) { return static_cast<int>(text::parse_int(manifest_value(m, key))); };
  c.learning_rate = d("gbdt.learning_rate");
  c.n_estimators = i("gbdt.n_estimators");
  c.num_leaves = i("gbdt.num_leaves");
  c.max_bin = i("gbdt.max_bin");
  c.min_data_in_leaf = i("gbdt.min_data_in_leaf");
  c.min_child_weight = d("gbdt.min_child_weight");
  c.min_split_gain = d("gbdt.min_split_gain");
  c.reg_alpha = d("gbdt.reg_alpha");
  c.reg_lambda = d("gbdt.reg_lambda");
  c.colsample_bytree = d("gbdt.colsample_bytree");
  c.max_depth = i("gbdt.max_depth");
  c.goss_enabled = i("gbdt.goss") != 0;
  c.goss_top_rate = d("gbdt.goss_top_rate");
  c.goss_other_rate = d("gbdt.goss_other_rate");
  return c;
}

ClassifierTrainer checkpointed(ClassifierTrainer trainer, const std::string& config_key, const fs::path& cache) {
  auto log_mutex = std::make_shared<std::mutex>();
  return [trainer = std::move(trainer), config_key, cache, log_mutex](
             const Matrix& rows, std::span<const ClassLabel> labels, std::uint64_t seed) {
    std::string key_material = config_key + "|seed=" + std::to_string(seed) + "|";
    key_material.append(reinterpret_cast<const char*>(labels.data()), labels.size_bytes());
    key_material.append(reinterpret_cast<const char*>(rows.data().data()), rows.data().size_bytes());
    const std::string key = sha256_hex(key_material);
    const fs::path file = cache / (key + ".model");
    auto log = [&](const char* what) {
      std::lock_guard lock(*log_mutex);
      std::ofstream out(cache / "progress.log", std::ios::app);
      out << what << ' ' << key << " seed=" << seed << " rows=" << rows.rows() << '\n';
    };
    if (fs::exists(file)) {
      std::istringstream in(read_text(file));
      auto model = load_classifier(in);
      log("reused");
      return model;
    }
    auto model = trainer(rows, labels, seed);
    std::ostringstream out;
    model->save(out);
    write_atomic(file, out.str());
    log("trained");
    return model;
  };
}

}  // namespace motionid::cli
