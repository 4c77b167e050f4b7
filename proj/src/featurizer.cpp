#include "motionid/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "motionid/rng.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace {

constexpr std::array<const char*, 5> kVariantNames = {"euler90", "quat105", "context22", "light127",
                                                      "full232"};
constexpr std::array<const char*, 3> kObjectNames = {"head", "left_hand", "right_hand"};
constexpr std::array<const char*, 7> kQuatComponents = {"pos_x", "pos_y", "pos_z", "rot_i",
                                                        "rot_j", "rot_k", "rot_w"};
constexpr std::array<const char*, 6> kEulerComponents = {"pos_x", "pos_y", "pos_z",
                                                         "rot_x", "rot_y", "rot_z"};
constexpr std::array<const char*, 5> kStatNames = {"min", "max", "mean", "median", "stdev"};
constexpr std::array<const char*, kContextDim> kContextNames = {
    "event_time",   "line_index",   "line_layer",   "color",         "cut_direction",
    "correct_saber", "cut_angle_deviation", "saber_speed", "saber_dir_x", "saber_dir_y",
    "saber_dir_z",  "cut_point_x",  "cut_point_y",  "cut_point_z",   "cut_normal_x",
    "cut_normal_y", "cut_normal_z", "distance_to_center", "time_deviation",
    "before_cut_rating", "after_cut_rating", "accuracy_score"};

constexpr std::size_t kStats = 5;

// Appends min, max, mean, median and population stdev of `values`.
void append_statistics(std::vector<double>& values, std::vector<double>& out) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double squares = 0.0;
  for (double v : values) squares += (v - mean) * (v - mean);
  const double stdev = std::sqrt(squares / n);
  const double min = *lo, max = *hi;

  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  double median = *mid;
  if (values.size() % 2 == 0) median = 0.5 * (median + *std::max_element(values.begin(), mid));

  out.insert(out.end(), {min, max, mean, median, stdev});
}

template <std::size_t Components, typename Extract>
std::vector<double> summarize(std::span<const Frame> window, Extract extract) {
  std::vector<double> out;
  out.reserve(kTrackedObjects.size() * Components * kStats);
  std::vector<std::array<double, Components>> rows(window.size());
  std::vector<double> column(window.size());
  for (TrackedObject object : kTrackedObjects) {
    for (std::size_t f = 0; f < window.size(); ++f) rows[f] = extract(window[f].pose(object));
    for (std::size_t c = 0; c < Components; ++c) {
      for (std::size_t f = 0; f < window.size(); ++f) column[f] = rows[f][c];
      append_statistics(column, out);
    }
  }
  return out;
}

struct Windows {
  std::span<const Frame> first;
  std::span<const Frame> second;  // empty unless the variant uses two windows
};

Windows windows_for(const Replay& replay, const NoteEvent& event, Variant variant,
                    const WindowSpec& window) {
  const double t = event.event_time;
  if (variant == Variant::full232) {
    return {frames_between(replay.frames, t - window.pre_span, t),
            frames_between(replay.frames, t, t + window.post_span)};
  }
  return {frames_between(replay.frames, t - 0.5 * window.pre_span, t + 0.5 * window.post_span), {}};
}

}  // namespace

const char* variant_name(Variant variant) { return kVariantNames[static_cast<std::size_t>(variant)]; }

Variant parse_variant(std::string_view name) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (name == kVariantNames[i]) return static_cast<Variant>(i);
  }
  throw FeatureError("unknown variant '" + std::string(name) + "'");
}

std::size_t dimension(Variant variant) {
  switch (variant) {
    case Variant::euler90: return kEulerMotionDim;
    case Variant::quat105: return kQuatMotionDim;
    case Variant::context22: return kContextDim;
    case Variant::light127: return kContextDim + kQuatMotionDim;
    default: return kContextDim + 2 * kQuatMotionDim;
  }
}

void WindowSpec::validate() const {
  if (!(pre_span > 0.0) || !(post_span > 0.0)) throw FeatureError("window spans must be positive");
  if (min_frames < 2) throw FeatureError("min_frames must be at least 2");
}

std::span<const Frame> frames_between(std::span<const Frame> frames, double begin, double end) {
  const auto first = std::lower_bound(frames.begin(), frames.end(), begin,
                                      [](const Frame& f, double t) { return f.time < t; });
  const auto last = std::upper_bound(first, frames.end(), end,
                                     [](double t, const Frame& f) { return t < f.time; });
  return {first, last};
}

std::array<double, 3> euler_xyz(const Pose& pose) {
  const double x = pose.rot_i, y = pose.rot_j, z = pose.rot_k, w = pose.rot_w;
  const double r00 = 1.0 - 2.0 * (y * y + z * z);
  const double r10 = 2.0 * (x * y + z * w);
  const double r20 = 2.0 * (x * z - y * w);
  const double r21 = 2.0 * (y * z + x * w);
  const double r22 = 1.0 - 2.0 * (x * x + y * y);
  return {std::atan2(r21, r22), std::asin(std::clamp(-r20, -1.0, 1.0)), std::atan2(r10, r00)};
}

std::optional<std::vector<double>> summarize_motion(std::span<const Frame> window,
                                                    std::size_t min_frames) {
  if (window.size() < std::max<std::size_t>(min_frames, 1)) return std::nullopt;
  return summarize<Pose::kComponents>(window, [](const Pose& p) { return p.components(); });
}

std::optional<std::vector<double>> summarize_motion_euler(std::span<const Frame> window,
                                                          std::size_t min_frames) {
  if (window.size() < std::max<std::size_t>(min_frames, 1)) return std::nullopt;
  return summarize<6>(window, [](const Pose& p) {
    const auto angles = euler_xyz(p);
    return std::array<double, 6>{p.pos_x, p.pos_y, p.pos_z, angles[0], angles[1], angles[2]};
  });
}

std::optional<std::array<double, kContextDim>> context_features(const NoteEvent& event) {
  if (!event.has_cut()) return std::nullopt;
  std::array<double, kContextDim> out{};
  out[0] = event.event_time;
  out[1] = event.line_index;
  out[2] = event.line_layer;
  out[3] = static_cast<double>(event.color);
  out[4] = event.cut_direction;
  out[5] = event.correct_saber ? 1.0 : 0.0;
  const auto kinematics = event.kinematics();
  std::copy(kinematics.begin(), kinematics.end(), out.begin() + 6);
  return out;
}

bool featurizable(const Replay& replay, const NoteEvent& event, Variant variant,
                  const WindowSpec& window) {
  if (!event.has_cut()) return false;
  if (variant == Variant::context22) return true;
  const auto w = windows_for(replay, event, variant, window);
  if (w.first.size() < window.min_frames) return false;
  return variant != Variant::full232 || w.second.size() >= window.min_frames;
}

std::optional<std::vector<double>> featurize(const Replay& replay, const NoteEvent& event,
                                             Variant variant, const WindowSpec& window) {
  const auto context = context_features(event);
  if (!context) return std::nullopt;
  if (variant == Variant::context22) return std::vector<double>(context->begin(), context->end());

  const auto w = windows_for(replay, event, variant, window);
  if (variant == Variant::euler90) return summarize_motion_euler(w.first, window.min_frames);
  auto motion = summarize_motion(w.first, window.min_frames);
  if (!motion) return std::nullopt;
  if (variant == Variant::quat105) return motion;

  std::vector<double> out(context->begin(), context->end());
  out.reserve(dimension(variant));
  out.insert(out.end(), motion->begin(), motion->end());
  if (variant == Variant::full232) {
    const auto post = summarize_motion(w.second, window.min_frames);
    if (!post) return std::nullopt;
    out.insert(out.end(), post->begin(), post->end());
  }
  return out;
}

std::optional<std::vector<double>> featurize_light(const Replay& replay, const NoteEvent& event,
                                                   const WindowSpec& window) {
  return featurize(replay, event, Variant::light127, window);
}

std::optional<std::vector<double>> featurize_full(const Replay& replay, const NoteEvent& event,
                                                  const WindowSpec& window) {
  return featurize(replay, event, Variant::full232, window);
}

std::vector<FeatureVector> featurize_all(std::span<const SessionReplay> replays, Variant variant,
                                         const WindowSpec& window) {
  std::vector<FeatureVector> out;
  for (const SessionReplay& source : replays) {
    for (const NoteEvent& event : source.replay->events) {
      auto values = featurize(*source.replay, event, variant, window);
      if (!values) continue;
      out.push_back({source.replay->metadata.user_id, source.session_id, event.event_time, variant,
                     std::move(*values)});
    }
  }
  return out;
}

std::vector<FeatureVector> sample_training_events(std::span<const SessionReplay> replays,
                                                  Variant variant, const WindowSpec& window,
                                                  std::size_t per_user, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t r = 0; r < replays.size(); ++r) {
    const Replay& replay = *replays[r].replay;
    for (std::size_t e = 0; e < replay.events.size(); ++e) {
      if (featurizable(replay, replay.events[e], variant, window)) candidates.emplace_back(r, e);
    }
  }
  if (candidates.size() > per_user) {
    Rng rng(seed);
    // Partial Fisher-Yates: the first per_user slots are a uniform sample.
    for (std::size_t i = 0; i < per_user; ++i) {
      std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
    }
    candidates.resize(per_user);
    std::sort(candidates.begin(), candidates.end());
  }

  std::vector<FeatureVector> out;
  out.reserve(candidates.size());
  for (const auto& [r, e] : candidates) {
    const Replay& replay = *replays[r].replay;
    auto values = featurize(replay, replay.events[e], variant, window);
    out.push_back({replay.metadata.user_id, replays[r].session_id, replay.events[e].event_time,
                   variant, std::move(*values)});
  }
  return out;
}

const char* feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::context: return "context";
    case FeatureKind::motion: return "motion";
    default: return "static_proxy";
  }
}

std::vector<std::string> feature_names(Variant variant) {
  std::vector<std::string> names;
  const bool has_context = variant == Variant::context22 || variant == Variant::light127 ||
                           variant == Variant::full232;
  if (has_context) {
    for (const char* name : kContextNames) names.push_back(std::string("ctx.") + name);
  }
  auto add_window = [&](const std::string& prefix, bool euler) {
    for (const char* object : kObjectNames) {
      const std::size_t components = euler ? kEulerComponents.size() : kQuatComponents.size();
      for (std::size_t c = 0; c < components; ++c) {
        const char* component = euler ? kEulerComponents[c] : kQuatComponents[c];
        for (const char* stat : kStatNames) {
          names.push_back(prefix + "." + object + "." + component + "." + stat);
        }
      }
    }
  };
  switch (variant) {
    case Variant::euler90: add_window("win", true); break;
    case Variant::quat105:
    case Variant::light127: add_window("win", false); break;
    case Variant::full232:
      add_window("pre", false);
      add_window("post", false);
      break;
    default: break;
  }
  return names;
}

std::vector<std::size_t> default_static_proxy(Variant variant) {
  std::vector<std::size_t> indices;
  const auto names = feature_names(variant);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& name = names[i];
    if (name.find(".head.pos_y.") == std::string::npos) continue;
    if (name.ends_with(".stdev")) continue;
    indices.push_back(i);
  }
  return indices;
}

std::vector<FeatureKind> feature_kinds(Variant variant, std::span<const std::size_t> static_proxy) {
  const auto names = feature_names(variant);
  std::vector<FeatureKind> kinds(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    kinds[i] = names[i].starts_with("ctx.") ? FeatureKind::context : FeatureKind::motion;
  }
  for (std::size_t index : static_proxy) {
    if (index >= kinds.size()) throw FeatureError("static-proxy index out of range");
    kinds[index] = FeatureKind::static_proxy;
  }
  return kinds;
}

std::vector<FeatureKind> feature_kinds(Variant variant) {
  const auto proxy = default_static_proxy(variant);
  return feature_kinds(variant, proxy);
}

void write_feature_file(std::span<const FeatureVector> samples, Variant variant, std::ostream& out) {
  const std::size_t dim = dimension(variant);
  out << variant_name(variant) << ',' << dim << ',' << samples.size() << '\n';
  for (const FeatureVector& sample : samples) {
    if (sample.values.size() != dim) throw FeatureError("sample dimension does not match variant");
    if (sample.user_id.find(',') != std::string::npos ||
        sample.session_id.find(',') != std::string::npos) {
      throw FeatureError("identifiers may not contain commas");
    }
    out << sample.user_id << ',' << sample.session_id << ',' << text::format_17(sample.event_time);
    for (double v : sample.values) out << ',' << text::format_17(v);
    out << '\n';
  }
}

std::vector<FeatureVector> read_feature_file(std::istream& in, Variant* variant_out) {
  std::string line;
  if (!std::getline(in, line)) throw FeatureError("feature file is empty");
  const auto header = text::split(text::trim(line), ',');
  if (header.size() != 3) throw FeatureError("malformed feature file header");
  const Variant variant = parse_variant(header[0]);
  const auto dim = text::parse_uint(header[1]);
  const auto count = text::parse_uint(header[2]);
  if (dim != dimension(variant)) throw FeatureError("header dimension does not match variant");

  std::vector<FeatureVector> samples;
  samples.reserve(count);
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != dim + 3) throw FeatureError("record has wrong field count");
    FeatureVector sample;
    sample.user_id = std::string(fields[0]);
    sample.session_id = std::string(fields[1]);
    sample.event_time = text::parse_double(fields[2]);
    sample.variant = variant;
    sample.values.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) sample.values.push_back(text::parse_double(fields[3 + i]));
    samples.push_back(std::move(sample));
  }
  if (samples.size() != count) throw FeatureError("record count does not match header");
  if (variant_out) *variant_out = variant;
  return samples;
}

}  // namespace motionid
