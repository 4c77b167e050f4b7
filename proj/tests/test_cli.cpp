#include <sys/wait.h>

#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "motionid/digest.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string output;
};

Run motionid_cli(const std::string& args, const fs::path& scratch) {
  const fs::path log = scratch / "cli.log";
  const std::string command = std::string(MOTIONID_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  std::ifstream in(log);
  std::stringstream text;
  text << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, text.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

std::map<std::string, std::string> hashes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = motionid::sha256_file(e.path().string());
  }
  return out;
}

}  // namespace

TEST_CASE("a missing workspace fails without writing anything") {
  testing::TempDir scratch("cli_missing");
  const fs::path ws = scratch.path() / "absent";
  for (const char* command : {"synth", "featurize", "train", "evaluate"}) {
    const Run r = motionid_cli(std::string(command) + " --workspace " + ws.string(), scratch.path());
    CHECK(r.status != 0);
    CHECK(r.output.find("does not exist") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(ws));
  CHECK(motionid_cli("", scratch.path()).status != 0);
  CHECK(motionid_cli("train --rounds x --workspace " + scratch.path().string(), scratch.path()).status != 0);
}

TEST_CASE("end to end on a small cohort") {
  testing::TempDir scratch("cli_flow");
  const fs::path ws = scratch.path() / "ws";
  fs::create_directories(ws);
  const std::string at = " --workspace " + ws.string();

  Run r = motionid_cli("synth --users 8 --sessions 6 --notes 40 --seed 2" + at, scratch.path());
  REQUIRE(r.status == 0);
  CHECK(fs::exists(ws / "replays" / "u00007"));

  r = motionid_cli("featurize --samples-per-user 30 --seed 2 --ratios 0.5,0.2,0.1,0.2" + at, scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const std::string manifest = slurp(ws / "featurize.manifest");
  CHECK(manifest.find("ratios = 0.5,0.2,0.1,0.2\n") != std::string::npos);
  CHECK(slurp(ws / "features" / "train.csv").rfind("full232,232,240\n", 0) == 0);

  r = motionid_cli("featurize --ratios 0.5,0.5,0.5,0.5" + at, scratch.path());
  CHECK(r.status != 0);
  CHECK(slurp(ws / "featurize.manifest") == manifest);

  r = motionid_cli("train --groups 2 --rounds 8 --min-child-weight 0.5 --seed 2" + at, scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const auto first = hashes(ws / "model");
  CHECK(first.count("layer1_group001.model"));
  CHECK(first.count("layer2_group001.model"));
  CHECK(slurp(ws / "train.manifest").find("gbdt.n_estimators = 8\n") != std::string::npos);

  // Resuming reuses every checkpoint and rewrites nothing.
  r = motionid_cli("train --groups 2 --rounds 8 --min-child-weight 0.5 --seed 2" + at, scratch.path());
  REQUIRE(r.status == 0);
  CHECK(hashes(ws / "model") == first);
  CHECK(slurp(ws / "train_cache" / "progress.log").find("reused") != std::string::npos);

  r = motionid_cli("evaluate --samples-per-user 10 --curve 1,5,10" + at, scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const std::string report = slurp(ws / "reports" / "evaluation.txt");
  CHECK(report.find("per_user_accuracy = ") != std::string::npos);
  CHECK(report.find("accuracy_at_5_samples = ") != std::string::npos);
  CHECK(report.find("importance.motion = ") != std::string::npos);
  CHECK(slurp(ws / "reports" / "user_outcomes.csv").rfind("user_id,correct,rank,samples,samples_correct\n", 0) == 0);

  const fs::path replay = ws / "replays" / "u00003" / "u00003_s000_r000.midr";
  r = motionid_cli("identify " + replay.string() + " --top 3 --mode layers12" + at, scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(r.output.find("\n1 ") != std::string::npos);
  CHECK(r.output.find("\n4 ") == std::string::npos);

  // A new user from another cohort, under a fresh id.
  const fs::path other = scratch.path() / "other";
  fs::create_directories(other);
  REQUIRE(motionid_cli("synth --users 1 --sessions 6 --notes 40 --seed 77 --workspace " + other.string(), scratch.path()).status == 0);
  r = motionid_cli("adduser " + (other / "replays" / "u00000").string() + " --user-id newcomer" + at, scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const auto after = hashes(ws / "model");
  std::size_t changed = 0;
  for (const auto& [name, hash] : after) {
    if (name != "manifest.txt") changed += first.at(name) != hash;
  }
  CHECK(changed == 2);
  CHECK(slurp(ws / "users.csv").find("\nnewcomer,") != std::string::npos);
  CHECK(slurp(ws / "train.manifest").find("layer3_stale = 1") != std::string::npos);
  r = motionid_cli("adduser " + (other / "replays" / "u00000").string() + " --user-id newcomer" + at, scratch.path());
  CHECK(r.status != 0);
  CHECK(hashes(ws / "model") == after);

  r = motionid_cli("evaluate --samples-per-user 10" + at, scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(slurp(ws / "reports" / "user_outcomes.csv").find("\nnewcomer,") != std::string::npos);
}

TEST_CASE("import validates everything before writing") {
  testing::TempDir scratch("cli_import");
  const fs::path source = scratch.path() / "source", ws = scratch.path() / "ws";
  fs::create_directories(source);
  fs::create_directories(ws);
  REQUIRE(motionid_cli("synth --users 2 --sessions 2 --notes 10 --seed 5 --workspace " + source.string(), scratch.path()).status == 0);

  {
    std::ofstream junk(source / "replays" / "zz_broken.midr", std::ios::binary);
    junk << "MIDR1 but not really";
  }
  Run r = motionid_cli("import " + (source / "replays").string() + " --workspace " + ws.string(), scratch.path());
  CHECK(r.status != 0);
  CHECK_FALSE(fs::exists(ws / "replays"));

  fs::remove(source / "replays" / "zz_broken.midr");
  r = motionid_cli("import " + (source / "replays").string() + " --workspace " + ws.string(), scratch.path());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(r.output.find("imported 4 replays") != std::string::npos);
  for (const auto& e : fs::recursive_directory_iterator(source / "replays")) {
    if (!e.is_regular_file()) continue;
    const fs::path copy = ws / "replays" / e.path().parent_path().filename() / e.path().filename();
    REQUIRE(fs::exists(copy));
    CHECK(motionid::sha256_file(copy.string()) == motionid::sha256_file(e.path().string()));
  }
}
