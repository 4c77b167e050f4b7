#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "motionid/gbdt.hpp"
#include "motionid/pipeline.hpp"

namespace motionid::cli {

namespace fs = std::filesystem;

// Ordered "key = value" echo of a command's configuration.
using ManifestEntries = std::vector<std::pair<std::string, std::string>>;

class Workspace {
 public:
  // Throws unless the directory already exists.
  explicit Workspace(const std::string& path);

  const fs::path& root() const { return root_; }
  fs::path replays() const { return root_ / "replays"; }
  fs::path features() const { return root_ / "features"; }
  fs::path model() const { return root_ / "model"; }
  fs::path reports() const { return root_ / "reports"; }
  fs::path train_cache() const { return root_ / "train_cache"; }
  fs::path manifest(const std::string& command) const { return root_ / (command + ".manifest"); }

 private:
  fs::path root_;
};

// Writes through a temporary file and a rename, so readers never see a
// half-written file.
void write_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

void write_manifest(const fs::path& path, const ManifestEntries& entries);
std::map<std::string, std::string> read_manifest(const fs::path& path);
const std::string& manifest_value(const std::map<std::string, std::string>& manifest,
                                  const std::string& key);

// Replay files below `path` (or `path` itself), sorted.
std::vector<fs::path> replay_files(const fs::path& path);
// MIDR1 or BSOR by content; a missing replay_id is filled from the file stem.
Replay load_any_replay(const fs::path& path, std::size_t* dropped = nullptr,
                       std::size_t* skipped = nullptr);
std::string file_safe(std::string name);

// Users in directory order and the loader for one of them.
std::vector<fs::path> user_directories(const Workspace& ws);
std::vector<Replay> load_user_replays(const fs::path& directory);

// Feature files, scaler, split manifest and user table.
void save_dataset(const Workspace& ws, const Dataset& dataset);
Dataset load_dataset(const Workspace& ws);

DatasetOptions dataset_options(const std::map<std::string, std::string>& manifest);
ManifestEntries dataset_entries(const DatasetOptions& options);

ManifestEntries gbdt_entries(const GbdtConfig& config);
GbdtConfig gbdt_config(const std::map<std::string, std::string>& manifest);

// Trainer that keeps every fitted model in a content-addressed cache, so an
// interrupted run resumes where it stopped.
ClassifierTrainer checkpointed(ClassifierTrainer trainer, const std::string& config_key,
                               const fs::path& cache);

}  // namespace motionid::cli
