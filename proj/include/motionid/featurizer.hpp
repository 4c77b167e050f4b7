#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motionid/error.hpp"
#include "motionid/replay.hpp"

namespace motionid {

enum class Variant : std::uint8_t { euler90, quat105, context22, light127, full232 };

const char* variant_name(Variant variant);
Variant parse_variant(std::string_view name);
std::size_t dimension(Variant variant);

inline constexpr std::size_t kQuatMotionDim = 105;
inline constexpr std::size_t kEulerMotionDim = 90;
inline constexpr std::size_t kContextDim = NoteEvent::kContextValues;

// Full hybrid uses [t - pre_span, t] and [t, t + post_span]; the light and
// motion-only variants use the one-second window [t - pre_span/2, t + post_span/2].
// All boundaries are closed.
struct WindowSpec {
  double pre_span = 1.0;
  double post_span = 1.0;
  std::size_t min_frames = 10;

  void validate() const;
};

struct FeatureVector {
  std::string user_id;
  std::string session_id;
  double event_time = 0.0;
  Variant variant = Variant::full232;
  std::vector<double> values;

  bool operator==(const FeatureVector&) const = default;
};

class FeatureError : public Error {
 public:
  explicit FeatureError(const std::string& message) : Error("featurizer", message) {}
};

// Frames with time in the closed interval [begin, end].
std::span<const Frame> frames_between(std::span<const Frame> frames, double begin, double end);

// Object-major (head, left, right), then component (pos xyz, rot ijkw), then
// statistic (min, max, mean, median, population stdev). nullopt when the
// window holds fewer than min_frames frames.
std::optional<std::vector<double>> summarize_motion(std::span<const Frame> window,
                                                    std::size_t min_frames);
// Same layout with orientation as extrinsic X-Y-Z Euler angles (radians).
std::optional<std::vector<double>> summarize_motion_euler(std::span<const Frame> window,
                                                          std::size_t min_frames);

// Extrinsic X-Y-Z angles (roll about x, then pitch about y, then yaw about z).
std::array<double, 3> euler_xyz(const Pose& pose);

// The 22 context values in NoteEvent field order; nullopt for a missed note.
std::optional<std::array<double, kContextDim>> context_features(const NoteEvent& event);

// Any variant. nullopt when the sample must be dropped.
std::optional<std::vector<double>> featurize(const Replay& replay, const NoteEvent& event,
                                             Variant variant, const WindowSpec& window = {});
std::optional<std::vector<double>> featurize_light(const Replay& replay, const NoteEvent& event,
                                                   const WindowSpec& window = {});
std::optional<std::vector<double>> featurize_full(const Replay& replay, const NoteEvent& event,
                                                  const WindowSpec& window = {});

// Cheap pre-check matching featurize's drop rules.
bool featurizable(const Replay& replay, const NoteEvent& event, Variant variant,
                  const WindowSpec& window = {});

// A replay tagged with the session it belongs to.
struct SessionReplay {
  const Replay* replay = nullptr;
  std::string session_id;
};

// Uniform sample without replacement over every featurizable event of the
// given replays. Returns all of them when fewer than per_user exist, and an
// empty list when none do. Output is in (replay, event) order.
std::vector<FeatureVector> sample_training_events(std::span<const SessionReplay> replays,
                                                  Variant variant, const WindowSpec& window,
                                                  std::size_t per_user, std::uint64_t seed);

// All featurizable events of the given replays in (replay, event) order.
std::vector<FeatureVector> featurize_all(std::span<const SessionReplay> replays, Variant variant,
                                         const WindowSpec& window);

// Per-index role, used by the explainability report.
enum class FeatureKind : std::uint8_t { context = 0, motion = 1, static_proxy = 2 };
const char* feature_kind_name(FeatureKind kind);

std::vector<std::string> feature_names(Variant variant);
// Head pos_y location statistics (min, max, mean, median) of every motion
// window: the headset height proxy.
std::vector<std::size_t> default_static_proxy(Variant variant);
// Context/motion labels, with the given indices relabeled static_proxy.
std::vector<FeatureKind> feature_kinds(Variant variant,
                                       std::span<const std::size_t> static_proxy);
std::vector<FeatureKind> feature_kinds(Variant variant);

// Feature matrix file: "variant,dim,count" header line with those values,
// then "user_id,session_id,event_time,v1,...,vdim" records at 17 significant
// digits.
void write_feature_file(std::span<const FeatureVector> samples, Variant variant, std::ostream& out);
std::vector<FeatureVector> read_feature_file(std::istream& in, Variant* variant = nullptr);

}  // namespace motionid
