#include "motionid/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "motionid/digest.hpp"
#include "motionid/parallel.hpp"
#include "motionid/rng.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kLayer2Tag = 0x4C32;
constexpr const char* kManifestName = "manifest.txt";
constexpr const char* kManifestVersion = "MIDH1";

std::uint64_t model_seed(std::uint64_t seed, int layer_index, std::size_t group) {
  return derive_seed(seed, static_cast<std::uint64_t>(layer_index) * 1000003ull + group);
}

std::shared_ptr<const Classifier> train_group(const TrainingSet& training,
                                              const std::vector<UserIndex>& members, int layer_index,
                                              std::size_t group, std::uint64_t seed,
                                              const ClassifierTrainer& trainer) {
  try {
    auto [rows, labels] = training.stack(members);
    return trainer(rows, labels, model_seed(seed, layer_index, group));
  } catch (const std::exception& e) {
    throw HierarchyError("training layer " + std::to_string(layer_index) + " group " +
                         std::to_string(group) + " failed: " + e.what());
  }
}

struct TrainJob {
  int layer_index;
  std::size_t group;
  const std::vector<UserIndex>* members;
  std::shared_ptr<const Classifier>* slot;
};

void run_jobs(const std::vector<TrainJob>& jobs, const TrainingSet& training, std::uint64_t seed,
              std::size_t parallelism, const ClassifierTrainer& trainer) {
  parallel_for(jobs.size(), resolve_parallelism(parallelism), [&](std::size_t i) {
    const TrainJob& job = jobs[i];
    *job.slot = train_group(training, *job.members, job.layer_index, job.group, seed, trainer);
  });
}

void check_user_id(const std::string& id) {
  if (id.empty()) throw HierarchyError("empty user id");
  for (char c : id) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw HierarchyError("user id '" + id + "' contains whitespace");
    }
  }
}

}  // namespace

void ConfusionGraph::add_edge(UserIndex a, UserIndex b) {
  if (a == b) throw HierarchyError("self-loop in confusion graph");
  if (a >= nodes_ || b >= nodes_) throw HierarchyError("edge endpoint out of range");
  edges_.emplace_back(a, b);
}

UserGroups connected_components(const ConfusionGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::vector<UserIndex>> adjacency(n);
  for (const auto& [a, b] : graph.edges()) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  UserGroups components;
  for (UserIndex start = 0; start < n; ++start) {
    if (seen[start] || adjacency[start].empty()) continue;
    std::vector<UserIndex> component;
    std::queue<UserIndex> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const UserIndex u = frontier.front();
      frontier.pop();
      component.push_back(u);
      for (UserIndex v : adjacency[u]) {
        if (!seen[v]) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

std::size_t TrainingSet::feature_count() const {
  for (const Matrix& m : samples) {
    if (!m.empty()) return m.cols();
  }
  return 0;
}

std::pair<Matrix, std::vector<ClassLabel>> TrainingSet::stack(std::span<const UserIndex> users) const {
  const std::size_t features = feature_count();
  std::size_t total = 0;
  for (UserIndex u : users) {
    if (u >= samples.size()) throw HierarchyError("user index out of range");
    if (samples[u].empty()) throw HierarchyError("user " + user_ids[u] + " has no training samples");
    if (samples[u].cols() != features) throw HierarchyError("user " + user_ids[u] + " has mismatched dimension");
    total += samples[u].rows();
  }
  Matrix rows(total, features);
  std::vector<ClassLabel> labels;
  labels.reserve(total);
  std::size_t at = 0;
  for (UserIndex u : users) {
    const auto& m = samples[u];
    std::copy(m.data().begin(), m.data().end(), rows.data().begin() + static_cast<std::ptrdiff_t>(at * features));
    at += m.rows();
    labels.insert(labels.end(), m.rows(), static_cast<ClassLabel>(u));
  }
  return {std::move(rows), std::move(labels)};
}

std::optional<std::size_t> HierarchicalModel::component_of(UserIndex user) const {
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (std::binary_search(components[c].begin(), components[c].end(), user)) return c;
  }
  return std::nullopt;
}

std::optional<UserIndex> HierarchicalModel::find_user(const std::string& user_id) const {
  const auto it = std::find(users.begin(), users.end(), user_id);
  if (it == users.end()) return std::nullopt;
  return static_cast<UserIndex>(it - users.begin());
}

UserGroups partition_users(std::size_t user_count, std::size_t n_groups, std::uint64_t seed,
                           int layer_index) {
  if (n_groups < 1) throw HierarchyError("n_groups must be at least 1");
  if (n_groups > user_count) {
    throw HierarchyError(std::to_string(n_groups) + " groups for " + std::to_string(user_count) + " users");
  }
  if (layer_index != 1 && layer_index != 2) throw HierarchyError("layer index must be 1 or 2");

  std::vector<UserIndex> order(user_count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  UserGroups groups(n_groups);
  for (std::size_t i = 0; i < order.size(); ++i) groups[i % n_groups].push_back(order[i]);

  if (layer_index == 2) {
    // Consecutive members of a layer-1 group land in different layer-2 groups.
    Rng mix(derive_seed(seed, kLayer2Tag));
    for (auto& g : groups) mix.shuffle(g);
    mix.shuffle(groups);
    UserGroups second(n_groups);
    std::size_t at = 0;
    for (const auto& g : groups) {
      for (UserIndex u : g) second[at++ % n_groups].push_back(u);
    }
    groups = std::move(second);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

Matrix layer_predict(const LayerPartition& layer, std::size_t user_count, const Matrix& samples) {
  Matrix out(samples.rows(), user_count, 0.0);
  if (layer.models.size() != layer.groups.size()) throw HierarchyError("layer has untrained groups");
  for (std::size_t g = 0; g < layer.groups.size(); ++g) {
    const auto& model = layer.models[g];
    if (!model) throw HierarchyError("group " + std::to_string(g) + " is untrained");
    const Matrix proba = model->predict_proba(samples);
    const auto& classes = model->classes();
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const auto user = static_cast<std::size_t>(classes[k]);
      if (user >= user_count) throw HierarchyError("model class outside the user set");
      for (std::size_t r = 0; r < samples.rows(); ++r) out(r, user) = proba(r, k);
    }
  }
  return out;
}

std::vector<double> fuse_layers(std::span<const double> layer1, std::span<const double> layer2,
                                double epsilon) {
  if (layer1.size() != layer2.size()) throw HierarchyError("fused maps cover different users");
  std::vector<double> fused(layer1.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    fused[i] = std::log(layer1[i] + epsilon) + std::log(layer2[i] + epsilon);
  }
  return fused;
}

UserIndex argmax_user(std::span<const double> scores, std::span<const std::string> user_ids) {
  if (scores.empty() || scores.size() != user_ids.size()) throw HierarchyError("score map does not match users");
  UserIndex best = 0;
  for (UserIndex u = 1; u < scores.size(); ++u) {
    if (scores[u] > scores[best] || (scores[u] == scores[best] && user_ids[u] < user_ids[best])) best = u;
  }
  return best;
}

std::vector<UserIndex> rank_users(std::span<const double> scores, std::span<const std::string> user_ids) {
  if (scores.size() != user_ids.size()) throw HierarchyError("score map does not match users");
  std::vector<UserIndex> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return user_ids[a] < user_ids[b];
  });
  return order;
}

Matrix sample_log_scores(const HierarchicalModel& model, const Matrix& samples, LayerMode mode) {
  const std::size_t users = model.user_count();
  const double eps = model.config.epsilon;
  Matrix scores = layer_predict(model.layers[0], users, samples);
  if (mode == LayerMode::layer1) {
    for (double& v : scores.data()) v = std::log(v + eps);
    return scores;
  }
  const Matrix second = layer_predict(model.layers[1], users, samples);
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    const auto fused = fuse_layers(scores.row(r), second.row(r), eps);
    std::copy(fused.begin(), fused.end(), scores.row(r).begin());
  }
  return scores;
}

Identification decide(const HierarchicalModel& model, std::vector<double> aggregate,
                      const Matrix& samples, LayerMode mode) {
  Identification result;
  result.initial = argmax_user(aggregate, model.users);
  result.final_identity = result.initial;
  if (mode == LayerMode::full) {
    const auto component = model.component_of(result.initial);
    if (component && *component < model.component_models.size() && model.component_models[*component]) {
      const auto& refiner = *model.component_models[*component];
      const Matrix proba = refiner.predict_proba(samples);
      const auto& classes = refiner.classes();
      std::vector<double> summed(classes.size(), 0.0);
      for (std::size_t r = 0; r < proba.rows(); ++r) {
        for (std::size_t k = 0; k < classes.size(); ++k) summed[k] += std::log(proba(r, k) + model.config.epsilon);
      }
      std::size_t best = 0;
      for (std::size_t k = 1; k < classes.size(); ++k) {
        const auto& id_k = model.users[static_cast<std::size_t>(classes[k])];
        const auto& id_best = model.users[static_cast<std::size_t>(classes[best])];
        if (summed[k] > summed[best] || (summed[k] == summed[best] && id_k < id_best)) best = k;
      }
      result.final_identity = static_cast<UserIndex>(classes[best]);
      result.refined_by = component;
    }
  }
  result.ranking.push_back(result.final_identity);
  for (UserIndex u : rank_users(aggregate, model.users)) {
    if (u != result.final_identity) result.ranking.push_back(u);
  }
  result.aggregate = std::move(aggregate);
  return result;
}

Identification identify(const HierarchicalModel& model, const Matrix& samples, LayerMode mode) {
  if (samples.empty()) throw HierarchyError("no samples to identify");
  const Matrix scores = sample_log_scores(model, samples, mode);
  std::vector<double> aggregate(model.user_count(), 0.0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t u = 0; u < aggregate.size(); ++u) aggregate[u] += scores(r, u);
  }
  return decide(model, std::move(aggregate), samples, mode);
}

ConfusionGraph build_confusion_graph(const HierarchicalModel& model,
                                     std::span<const Presentation> clustering) {
  ConfusionGraph graph(model.user_count());
  if (clustering.empty()) {
    std::fprintf(stderr, "hierarchy: WARNING empty clustering set; no layer-3 models\n");
    return graph;
  }
  for (const Presentation& p : clustering) {
    if (p.samples.empty()) continue;
    const Identification id = identify(model, p.samples, LayerMode::layers12);
    if (id.initial == p.user) continue;
    std::size_t added = 0;
    for (UserIndex u : rank_users(id.aggregate, model.users)) {
      if (added == model.config.similar_users) break;
      if (u == p.user) continue;
      graph.add_edge(p.user, u);
      ++added;
    }
  }
  return graph;
}

UserGroups split_oversized(const UserGroups& components, std::size_t max_size, std::uint64_t seed) {
  if (max_size < 2) throw HierarchyError("max_component_size must be at least 2");
  UserGroups result;
  Rng rng(seed);
  std::vector<std::vector<UserIndex>> pending(components.rbegin(), components.rend());
  while (!pending.empty()) {
    auto part = std::move(pending.back());
    pending.pop_back();
    if (part.size() <= max_size) {
      std::sort(part.begin(), part.end());
      result.push_back(std::move(part));
      continue;
    }
    rng.shuffle(part);
    const auto half = static_cast<std::ptrdiff_t>(part.size() / 2);
    pending.emplace_back(part.begin() + half, part.end());
    pending.emplace_back(part.begin(), part.begin() + half);
  }
  std::sort(result.begin(), result.end());
  return result;
}

HierarchicalModel train_layers(const TrainingSet& training, const HierarchyConfig& config,
                               const ClassifierTrainer& trainer) {
  if (training.user_count() == 0) throw HierarchyError("no users to train");
  for (const auto& id : training.user_ids) check_user_id(id);
  HierarchicalModel model;
  model.users = training.user_ids;
  model.config = config;
  std::vector<TrainJob> jobs;
  for (int layer = 1; layer <= 2; ++layer) {
    LayerPartition& partition = model.layers[static_cast<std::size_t>(layer - 1)];
    partition.layer_index = layer;
    partition.groups = partition_users(training.user_count(), config.groups_per_layer, config.seed, layer);
    partition.models.resize(partition.groups.size());
  }
  for (int layer = 1; layer <= 2; ++layer) {
    LayerPartition& partition = model.layers[static_cast<std::size_t>(layer - 1)];
    for (std::size_t g = 0; g < partition.groups.size(); ++g) {
      jobs.push_back({layer, g, &partition.groups[g], &partition.models[g]});
    }
  }
  run_jobs(jobs, training, config.seed, config.parallelism, trainer);
  return model;
}

void rebuild_layer3(HierarchicalModel& model, const TrainingSet& training,
                    std::span<const Presentation> clustering, const ClassifierTrainer& trainer) {
  const ConfusionGraph graph = build_confusion_graph(model, clustering);
  model.components = split_oversized(connected_components(graph), model.config.max_component_size,
                                     derive_seed(model.config.seed, 3));
  model.component_models.assign(model.components.size(), nullptr);
  std::vector<TrainJob> jobs;
  for (std::size_t c = 0; c < model.components.size(); ++c) {
    jobs.push_back({3, c, &model.components[c], &model.component_models[c]});
  }
  run_jobs(jobs, training, model.config.seed, model.config.parallelism, trainer);
  model.layer3_stale = false;
}

HierarchicalModel train_hierarchy(const TrainingSet& training, std::span<const Presentation> clustering,
                                  const HierarchyConfig& config, const ClassifierTrainer& trainer) {
  HierarchicalModel model = train_layers(training, config, trainer);
  rebuild_layer3(model, training, clustering, trainer);
  return model;
}

std::vector<RetrainedModel> add_user(HierarchicalModel& model, TrainingSet& training,
                                     const std::string& user_id, const Matrix& samples,
                                     const ClassifierTrainer& trainer) {
  check_user_id(user_id);
  if (model.find_user(user_id)) throw HierarchyError("duplicate user id " + user_id);
  if (training.user_count() != model.user_count()) throw HierarchyError("training set does not match model users");
  if (samples.empty()) throw HierarchyError("new user has no samples");
  if (training.feature_count() != 0 && samples.cols() != training.feature_count()) {
    throw HierarchyError("new user's samples have mismatched dimension");
  }
  const UserIndex index = model.user_count();
  model.users.push_back(user_id);
  training.user_ids.push_back(user_id);
  training.samples.push_back(samples);

  std::vector<RetrainedModel> retrained;
  std::vector<TrainJob> jobs;
  for (auto& layer : model.layers) {
    std::size_t smallest = 0;
    for (std::size_t g = 1; g < layer.groups.size(); ++g) {
      if (layer.groups[g].size() < layer.groups[smallest].size()) smallest = g;
    }
    layer.groups[smallest].push_back(index);
    retrained.push_back({layer.layer_index, smallest});
  }
  std::array<std::shared_ptr<const Classifier>, 2> fresh;
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& r = retrained[l];
    jobs.push_back({r.layer_index, r.group, &model.layers[l].groups[r.group], &fresh[l]});
  }
  run_jobs(jobs, training, model.config.seed, model.config.parallelism, trainer);
  for (std::size_t l = 0; l < 2; ++l) model.layers[l].models[retrained[l].group] = fresh[l];
  model.layer3_stale = true;
  return retrained;
}

std::string model_file_name(int layer_index, std::size_t group) {
  char buffer[48];
  if (layer_index == 3) {
    std::snprintf(buffer, sizeof buffer, "layer3_component%04zu.model", group);
  } else {
    std::snprintf(buffer, sizeof buffer, "layer%d_group%03zu.model", layer_index, group);
  }
  return buffer;
}

namespace {

std::string serialize(const Classifier& model) {
  std::ostringstream out;
  model.save(out);
  return out.str();
}

// Writes only when the content differs, so untouched files keep their bytes
// and timestamps.
void write_if_changed(const fs::path& path, const std::string& content) {
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::string existing((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (existing == content) return;
  }
  const fs::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw HierarchyError("cannot write " + temp.string());
    out << content;
    if (!out) throw HierarchyError("write failed for " + temp.string());
  }
  fs::rename(temp, path);
}

void write_members(std::ostream& out, const std::vector<UserIndex>& members) {
  out << ' ' << members.size();
  for (UserIndex u : members) out << ' ' << u;
}

}  // namespace

void save_hierarchy(const HierarchicalModel& model, const std::string& directory) {
  const fs::path dir(directory);
  fs::create_directories(dir);
  std::ostringstream manifest;
  manifest << kManifestVersion << '\n';
  manifest << "config groups_per_layer=" << model.config.groups_per_layer << " seed=" << model.config.seed
           << " max_component_size=" << model.config.max_component_size
           << " similar_users=" << model.config.similar_users
           << " epsilon=" << text::format_exact(model.config.epsilon) << '\n';
  manifest << "users " << model.users.size() << '\n';
  for (std::size_t u = 0; u < model.users.size(); ++u) {
    check_user_id(model.users[u]);
    manifest << "user " << u << ' ' << model.users[u] << '\n';
  }
  auto emit = [&](int layer_index, std::size_t group, const std::vector<UserIndex>& members,
                  const std::shared_ptr<const Classifier>& classifier) {
    if (!classifier) throw HierarchyError("cannot save an untrained model");
    const std::string name = model_file_name(layer_index, group);
    const std::string content = serialize(*classifier);
    write_if_changed(dir / name, content);
    manifest << "model " << layer_index << ' ' << group << ' ' << name << ' ' << sha256_hex(content);
    write_members(manifest, members);
    manifest << '\n';
  };
  for (const auto& layer : model.layers) {
    manifest << "layer " << layer.layer_index << ' ' << layer.groups.size() << '\n';
    for (std::size_t g = 0; g < layer.groups.size(); ++g) emit(layer.layer_index, g, layer.groups[g], layer.models[g]);
  }
  manifest << "components " << model.components.size() << " stale " << (model.layer3_stale ? 1 : 0) << '\n';
  for (std::size_t c = 0; c < model.components.size(); ++c) {
    emit(3, c, model.components[c], model.component_models[c]);
  }
  // Layer-3 files left over from an earlier, larger component set.
  for (std::size_t c = model.components.size();; ++c) {
    const fs::path stale = dir / model_file_name(3, c);
    if (!fs::exists(stale)) break;
    fs::remove(stale);
  }
  write_if_changed(dir / kManifestName, manifest.str());
}

namespace {

std::vector<std::string_view> tokens_of(const std::string& line) {
  std::vector<std::string_view> out;
  for (auto t : text::split(line, ' ')) {
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

HierarchicalModel load_hierarchy(const std::string& directory) {
  const fs::path dir(directory);
  std::ifstream in(dir / kManifestName);
  if (!in) throw HierarchyError("no model manifest in " + directory);
  auto next = [&in]() {
    std::string line;
    if (!std::getline(in, line)) throw HierarchyError("truncated model manifest");
    return line;
  };
  if (text::trim(next()) != kManifestVersion) throw HierarchyError("unsupported manifest version");
  HierarchicalModel model;
  {
    const std::string line = next();
    const auto t = tokens_of(line);
    if (t.empty() || t[0] != "config") throw HierarchyError("missing config line");
    for (std::size_t i = 1; i < t.size(); ++i) {
      const auto eq = t[i].find('=');
      const auto key = t[i].substr(0, eq);
      const auto value = t[i].substr(eq + 1);
      if (key == "groups_per_layer") model.config.groups_per_layer = text::parse_uint(value);
      else if (key == "seed") model.config.seed = text::parse_uint(value);
      else if (key == "max_component_size") model.config.max_component_size = text::parse_uint(value);
      else if (key == "similar_users") model.config.similar_users = text::parse_uint(value);
      else if (key == "epsilon") model.config.epsilon = text::parse_double(value);
      else throw HierarchyError("unknown config key " + std::string(key));
    }
  }
  std::size_t user_count = 0;
  {
    const std::string line = next();
    const auto t = tokens_of(line);
    if (t.size() != 2 || t[0] != "users") throw HierarchyError("missing users line");
    user_count = text::parse_uint(t[1]);
  }
  for (std::size_t u = 0; u < user_count; ++u) {
    const std::string line = next();
    const auto t = tokens_of(line);
    if (t.size() != 3 || t[0] != "user" || text::parse_uint(t[1]) != u) throw HierarchyError("malformed user line");
    model.users.emplace_back(t[2]);
  }
  auto read_model = [&](int layer_index, std::size_t group, std::vector<UserIndex>& members)
      -> std::shared_ptr<const Classifier> {
    const std::string line = next();
    const auto t = tokens_of(line);
    if (t.size() < 6 || t[0] != "model" || text::parse_int(t[1]) != layer_index ||
        text::parse_uint(t[2]) != group) {
      throw HierarchyError("malformed model line");
    }
    const std::string name(t[3]);
    const std::string expected(t[4]);
    const auto count = text::parse_uint(t[5]);
    if (t.size() != 6 + count) throw HierarchyError("member count mismatch for " + name);
    for (std::size_t i = 0; i < count; ++i) {
      const auto u = text::parse_uint(t[6 + i]);
      if (u >= user_count) throw HierarchyError("member index out of range in " + name);
      members.push_back(u);
    }
    std::ifstream file(dir / name, std::ios::binary);
    if (!file) throw HierarchyError("missing model file " + name);
    const std::string content((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    if (sha256_hex(content) != expected) throw HierarchyError("hash mismatch for " + name);
    std::istringstream stream(content);
    auto classifier = load_classifier(stream);
    std::vector<UserIndex> classes;
    for (ClassLabel c : classifier->classes()) classes.push_back(static_cast<UserIndex>(c));
    std::vector<UserIndex> sorted = members;
    std::sort(sorted.begin(), sorted.end());
    if (classes != sorted) throw HierarchyError("class set of " + name + " differs from its members");
    return classifier;
  };
  for (int layer = 1; layer <= 2; ++layer) {
    LayerPartition& partition = model.layers[static_cast<std::size_t>(layer - 1)];
    partition.layer_index = layer;
    const std::string line = next();
    const auto t = tokens_of(line);
    if (t.size() != 3 || t[0] != "layer" || text::parse_int(t[1]) != layer) throw HierarchyError("malformed layer line");
    const auto groups = text::parse_uint(t[2]);
    partition.groups.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) partition.models.push_back(read_model(layer, g, partition.groups[g]));
  }
  {
    const std::string line = next();
    const auto t = tokens_of(line);
    if (t.size() != 4 || t[0] != "components" || t[2] != "stale") throw HierarchyError("malformed components line");
    const auto count = text::parse_uint(t[1]);
    model.layer3_stale = text::parse_uint(t[3]) != 0;
    model.components.resize(count);
    for (std::size_t c = 0; c < count; ++c) model.component_models.push_back(read_model(3, c, model.components[c]));
  }
  return model;
}

}  // namespace motionid
