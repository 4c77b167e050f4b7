#include "motionid/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "motionid/rng.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace {

struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;  // position in the selected-feature list
  std::uint16_t bin = 0;
  double left_grad = 0.0, left_hess = 0.0;
  std::uint32_t left_count = 0;

  bool valid() const { return feature >= 0; }
};

struct LeafState {
  std::size_t begin = 0, end = 0;  // range in the row buffer
  double grad = 0.0, hess = 0.0;
  std::uint32_t count = 0;
  int depth = 0;
  std::size_t hist_slot = 0;
  std::int32_t node = -1;  // index in the working node list
  SplitCandidate best;
};

double threshold_l1(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

double leaf_score(double g, double h, const GbdtConfig& c) {
  const double t = threshold_l1(g, c.reg_alpha);
  return t * t / (h + c.reg_lambda);
}

double leaf_output(double g, double h, const GbdtConfig& c) {
  return -threshold_l1(g, c.reg_alpha) / (h + c.reg_lambda) * c.learning_rate;
}

// Grows one regression tree on histogram bins, leaf-wise by best gain.
class TreeBuilder {
 public:
  TreeBuilder(const GbdtConfig& config, const std::vector<std::uint8_t>& bins,
              std::size_t feature_count, const std::vector<BinEdges>& edges)
      : config_(config), bins_(bins), features_(feature_count), edges_(edges) {}

  Tree grow(std::vector<std::uint32_t>& rows, const std::vector<double>& grad,
            const std::vector<double>& hess, const std::vector<std::uint32_t>& selected) {
    selected_ = &selected;
    grad_ = &grad;
    hess_ = &hess;
    offsets_.assign(selected.size() + 1, 0);
    for (std::size_t i = 0; i < selected.size(); ++i) {
      offsets_[i + 1] = offsets_[i] + edges_[selected[i]].bin_count();
    }
    const std::size_t slot_size = offsets_.back();
    const auto max_leaves = static_cast<std::size_t>(config_.num_leaves);
    if (hist_pool_.size() < max_leaves) hist_pool_.resize(max_leaves);
    for (auto& h : hist_pool_) h.resize(slot_size);
    scratch_.resize(rows.size());

    nodes_.clear();
    std::vector<LeafState> leaves;
    LeafState root;
    root.begin = 0;
    root.end = rows.size();
    for (std::uint32_t r : rows) {
      root.grad += grad[r];
      root.hess += hess[r];
    }
    root.count = static_cast<std::uint32_t>(rows.size());
    root.hist_slot = 0;
    root.node = add_leaf_node();
    build_histogram(rows, root);
    root.best = find_split(root);
    leaves.push_back(root);
    std::size_t next_slot = 1;

    while (leaves.size() < max_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].best.valid()) continue;
        if (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
      }
      if (pick == leaves.size()) break;

      LeafState parent = leaves[pick];
      const SplitCandidate split = parent.best;
      const std::uint32_t feature = selected[static_cast<std::size_t>(split.feature)];

      // Stable partition of the parent's rows.
      std::size_t left_end = parent.begin;
      std::size_t right_n = 0;
      for (std::size_t i = parent.begin; i < parent.end; ++i) {
        const std::uint32_t r = rows[i];
        if (bins_[static_cast<std::size_t>(r) * features_ + feature] <= split.bin) {
          rows[left_end++] = r;
        } else {
          scratch_[right_n++] = r;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(right_n),
                rows.begin() + static_cast<std::ptrdiff_t>(left_end));

      LeafState left, right;
      left.begin = parent.begin;
      left.end = left_end;
      left.grad = split.left_grad;
      left.hess = split.left_hess;
      left.count = split.left_count;
      right.begin = left_end;
      right.end = parent.end;
      right.grad = parent.grad - split.left_grad;
      right.hess = parent.hess - split.left_hess;
      right.count = parent.count - split.left_count;
      left.depth = right.depth = parent.depth + 1;

      // Scan the smaller child; the larger one is parent minus smaller and
      // reuses the parent's histogram slot.
      LeafState& small = left.count <= right.count ? left : right;
      LeafState& large = left.count <= right.count ? right : left;
      small.hist_slot = next_slot++;
      large.hist_slot = parent.hist_slot;
      build_histogram(rows, small);
      auto& large_hist = hist_pool_[large.hist_slot];
      const auto& small_hist = hist_pool_[small.hist_slot];
      for (std::size_t i = 0; i < slot_size; ++i) {
        large_hist[i].grad -= small_hist[i].grad;
        large_hist[i].hess -= small_hist[i].hess;
        large_hist[i].count -= small_hist[i].count;
      }

      TreeNode& node = nodes_[static_cast<std::size_t>(parent.node)];
      node.feature = static_cast<std::int32_t>(feature);
      node.bin = split.bin;
      node.threshold = edges_[feature].edges[split.bin];
      node.gain = split.gain;
      left.node = add_leaf_node();
      right.node = add_leaf_node();
      nodes_[static_cast<std::size_t>(parent.node)].left = left.node;
      nodes_[static_cast<std::size_t>(parent.node)].right = right.node;

      left.best = find_split(left);
      right.best = find_split(right);
      leaves[pick] = left;
      leaves.push_back(right);
    }

    for (const LeafState& leaf : leaves) {
      nodes_[static_cast<std::size_t>(leaf.node)].value = leaf_output(leaf.grad, leaf.hess, config_);
    }
    return to_preorder();
  }

 private:
  std::int32_t add_leaf_node() {
    nodes_.emplace_back();
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  void build_histogram(const std::vector<std::uint32_t>& rows, const LeafState& leaf) {
    auto& hist = hist_pool_[leaf.hist_slot];
    std::fill(hist.begin(), hist.end(), HistBin{});
    const auto& selected = *selected_;
    const std::size_t n_sel = selected.size();
    const std::uint32_t* feat = selected.data();
    const std::size_t* offsets = offsets_.data();
    HistBin* h = hist.data();
    for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
      const std::uint32_t r = rows[i];
      const std::uint8_t* row_bins = bins_.data() + static_cast<std::size_t>(r) * features_;
      const double g = (*grad_)[r];
      const double hs = (*hess_)[r];
      for (std::size_t f = 0; f < n_sel; ++f) {
        HistBin& bin = h[offsets[f] + row_bins[feat[f]]];
        bin.grad += g;
        bin.hess += hs;
        ++bin.count;
      }
    }
  }

  SplitCandidate find_split(const LeafState& leaf) const {
    SplitCandidate best;
    if (config_.max_depth > 0 && leaf.depth >= config_.max_depth) return best;
    const auto min_count = static_cast<std::uint32_t>(config_.min_data_in_leaf);
    if (leaf.count < 2 * min_count) return best;
    const double parent_score = leaf_score(leaf.grad, leaf.hess, config_);
    const auto& hist = hist_pool_[leaf.hist_slot];
    const auto& selected = *selected_;
    for (std::size_t f = 0; f < selected.size(); ++f) {
      const std::size_t bins = offsets_[f + 1] - offsets_[f];
      double gl = 0.0, hl = 0.0;
      std::uint32_t nl = 0;
      for (std::size_t b = 0; b + 1 < bins; ++b) {
        const HistBin& bin = hist[offsets_[f] + b];
        gl += bin.grad;
        hl += bin.hess;
        nl += bin.count;
        if (nl < min_count) continue;
        const std::uint32_t nr = leaf.count - nl;
        if (nr < min_count) break;
        const double hr = leaf.hess - hl;
        if (hl < config_.min_child_weight || hr < config_.min_child_weight) continue;
        const double gain =
            leaf_score(gl, hl, config_) + leaf_score(leaf.grad - gl, hr, config_) - parent_score;
        if (gain > best.gain && gain >= config_.min_split_gain) {
          best.gain = gain;
          best.feature = static_cast<std::int32_t>(f);
          best.bin = static_cast<std::uint16_t>(b);
          best.left_grad = gl;
          best.left_hess = hl;
          best.left_count = nl;
        }
      }
    }
    return best;
  }

  Tree to_preorder() const {
    Tree tree;
    tree.nodes.reserve(nodes_.size());
    append_preorder(0, tree);
    return tree;
  }

  std::int32_t append_preorder(std::int32_t index, Tree& tree) const {
    const TreeNode& source = nodes_[static_cast<std::size_t>(index)];
    const auto position = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(source);
    if (!source.is_leaf()) {
      const std::int32_t left = append_preorder(source.left, tree);
      const std::int32_t right = append_preorder(source.right, tree);
      tree.nodes[static_cast<std::size_t>(position)].left = left;
      tree.nodes[static_cast<std::size_t>(position)].right = right;
    } else {
      tree.nodes[static_cast<std::size_t>(position)].left = -1;
      tree.nodes[static_cast<std::size_t>(position)].right = -1;
    }
    return position;
  }

  const GbdtConfig& config_;
  const std::vector<std::uint8_t>& bins_;
  std::size_t features_;
  const std::vector<BinEdges>& edges_;

  const std::vector<std::uint32_t>* selected_ = nullptr;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<HistBin>> hist_pool_;
  std::vector<std::uint32_t> scratch_;
  std::vector<TreeNode> nodes_;
};

double mean_log_loss(const std::vector<double>& prob, const std::vector<std::size_t>& label,
                     std::size_t classes) {
  double loss = 0.0;
  for (std::size_t i = 0; i < label.size(); ++i) {
    loss -= std::log(std::max(prob[i * classes + label[i]], 1e-300));
  }
  return loss / static_cast<double>(label.size());
}

void compute_probabilities(const std::vector<double>& scores, std::vector<double>& prob,
                           std::size_t classes) {
  prob = scores;
  for (std::size_t i = 0; i < prob.size(); i += classes) {
    softmax_in_place(std::span<double>(prob.data() + i, classes));
  }
}

}  // namespace

void GbdtConfig::validate() const {
  auto rate = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw ModelError(std::string(name) + " must be in (0, 1]");
  };
  rate(learning_rate, "learning_rate");
  rate(colsample_bytree, "colsample_bytree");
  rate(goss_top_rate, "goss_top_rate");
  rate(goss_other_rate, "goss_other_rate");
  if (goss_top_rate + goss_other_rate > 1.0) throw ModelError("goss rates must sum to at most 1");
  if (num_leaves < 2) throw ModelError("num_leaves must be at least 2");
  if (max_bin < 2 || max_bin > 255) throw ModelError("max_bin must be in [2, 255]");
  if (n_estimators < 0) throw ModelError("n_estimators must be non-negative");
  if (min_data_in_leaf < 1) throw ModelError("min_data_in_leaf must be positive");
  if (min_child_weight < 0.0 || min_split_gain < 0.0 || reg_alpha < 0.0 || reg_lambda < 0.0) {
    throw ModelError("regularization parameters must be non-negative");
  }
}

std::uint8_t BinEdges::bin(double value) const {
  return static_cast<std::uint8_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::vector<BinEdges> compute_bin_edges(const Matrix& rows, int max_bin) {
  std::vector<BinEdges> result(rows.cols());
  std::vector<double> column(rows.rows());
  const auto bins = static_cast<std::size_t>(max_bin);
  for (std::size_t f = 0; f < rows.cols(); ++f) {
    for (std::size_t r = 0; r < rows.rows(); ++r) column[r] = rows(r, f);
    std::sort(column.begin(), column.end());
    std::vector<double> distinct;
    std::unique_copy(column.begin(), column.end(), std::back_inserter(distinct));
    auto& edges = result[f].edges;
    if (distinct.size() <= bins) {
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        edges.push_back(distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0);
      }
      continue;
    }
    // Quantile cut points, each placed midway to the next distinct value.
    const std::size_t n = column.size();
    for (std::size_t q = 1; q < bins; ++q) {
      const double at = column[q * n / bins - 1];
      const auto next = std::upper_bound(distinct.begin(), distinct.end(), at);
      if (next == distinct.end()) break;
      const double edge = at + (*next - at) / 2.0;
      if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
  }
  return result;
}

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& node = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes[i].value;
}

double Tree::predict_binned(const std::uint8_t* bins) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& node = nodes[i];
    i = static_cast<std::size_t>(bins[node.feature] <= node.bin ? node.left : node.right);
  }
  return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

void softmax_in_place(std::span<double> scores) {
  const double max = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

GbdtModel fit_gbdt(const Matrix& rows, std::span<const ClassLabel> labels, const GbdtConfig& config) {
  config.validate();
  if (rows.rows() != labels.size()) throw ModelError("row and label counts differ");
  if (rows.rows() == 0) throw ModelError("no training rows");
  for (double v : rows.data()) {
    if (std::isnan(v)) throw ModelError("NaN feature value");
  }

  GbdtModel model;
  model.config_ = config;
  model.classes_ = distinct_classes(labels);
  model.bins_ = compute_bin_edges(rows, config.max_bin);
  const std::size_t n = rows.rows();
  const std::size_t features = rows.cols();
  const std::size_t classes = model.classes_.size();
  model.trees_.assign(classes, {});

  if (classes == 1) {
    std::fprintf(stderr, "boosted_trees: WARNING single-class input; model always predicts %d\n",
                 model.classes_.front());
    model.training_loss_.push_back(0.0);
    return model;
  }
  if (n < static_cast<std::size_t>(config.min_data_in_leaf)) {
    throw ModelError("fewer rows than min_data_in_leaf");
  }

  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = static_cast<std::size_t>(
        std::lower_bound(model.classes_.begin(), model.classes_.end(), labels[i]) -
        model.classes_.begin());
  }

  std::vector<std::uint8_t> binned(n * features);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < features; ++f) binned[r * features + f] = model.bins_[f].bin(rows(r, f));
  }

  Rng rng(derive_seed(config.seed, 0x6764627431ull));
  TreeBuilder builder(config, binned, features, model.bins_);
  std::vector<double> scores(n * classes, 0.0), prob;
  std::vector<double> grad(n), hess(n), weighted_grad(n), weighted_hess(n);
  std::vector<std::uint32_t> all_rows(n), sample_rows, order(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  std::vector<std::uint32_t> feature_pool(features);
  const auto feature_draw = std::max<std::size_t>(
      1, static_cast<std::size_t>(config.colsample_bytree * static_cast<double>(features) + 0.5));
  const auto top_n = static_cast<std::size_t>(config.goss_top_rate * static_cast<double>(n));
  const auto other_n = static_cast<std::size_t>(config.goss_other_rate * static_cast<double>(n));
  const double goss_weight = (1.0 - config.goss_top_rate) / config.goss_other_rate;

  compute_probabilities(scores, prob, classes);
  model.training_loss_.push_back(mean_log_loss(prob, label, classes));

  for (int round = 0; round < config.n_estimators; ++round) {
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob[i * classes + k];
        grad[i] = p - (label[i] == k ? 1.0 : 0.0);
        hess[i] = std::max(p * (1.0 - p), 1e-16);
      }

      if (config.goss_enabled && top_n + other_n < n) {
        std::iota(order.begin(), order.end(), 0u);
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_n),
                         order.end(), [&](std::uint32_t a, std::uint32_t b) {
                           const double ga = std::abs(grad[a]), gb = std::abs(grad[b]);
                           return ga != gb ? ga > gb : a < b;
                         });
        sample_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_n));
        for (std::uint32_t r : sample_rows) {
          weighted_grad[r] = grad[r];
          weighted_hess[r] = hess[r];
        }
        // Uniform sample of the small-gradient remainder, reweighted.
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(top_n), order.end());
        const std::size_t rest = n - top_n;
        for (std::size_t i = 0; i < other_n; ++i) {
          const std::size_t j = top_n + i + rng.below(rest - i);
          std::swap(order[top_n + i], order[j]);
          const std::uint32_t r = order[top_n + i];
          weighted_grad[r] = grad[r] * goss_weight;
          weighted_hess[r] = hess[r] * goss_weight;
          sample_rows.push_back(r);
        }
        std::sort(sample_rows.begin(), sample_rows.end());
      } else {
        sample_rows = all_rows;
        weighted_grad = grad;
        weighted_hess = hess;
      }

      std::iota(feature_pool.begin(), feature_pool.end(), 0u);
      for (std::size_t i = 0; i < feature_draw; ++i) {
        std::swap(feature_pool[i], feature_pool[i + rng.below(features - i)]);
      }
      std::vector<std::uint32_t> selected(feature_pool.begin(),
                                          feature_pool.begin() + static_cast<std::ptrdiff_t>(feature_draw));
      std::sort(selected.begin(), selected.end());

      Tree tree = builder.grow(sample_rows, weighted_grad, weighted_hess, selected);
      for (std::size_t i = 0; i < n; ++i) {
        scores[i * classes + k] += tree.predict_binned(binned.data() + i * features);
      }
      model.trees_[k].push_back(std::move(tree));
    }
    compute_probabilities(scores, prob, classes);
    model.training_loss_.push_back(mean_log_loss(prob, label, classes));
  }
  return model;
}

Matrix GbdtModel::predict_raw(const Matrix& rows) const {
  if (rows.cols() != feature_count()) {
    throw ModelError("dimension mismatch: " + std::to_string(rows.cols()) + " columns, model has " +
                     std::to_string(feature_count()));
  }
  const std::size_t classes = classes_.size();
  Matrix out(rows.rows(), classes, 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t k = 0; k < classes; ++k) {
      double sum = 0.0;
      for (const Tree& tree : trees_[k]) sum += tree.predict(row);
      out(r, k) = sum;
    }
  }
  return out;
}

Matrix GbdtModel::predict_proba(const Matrix& rows) const {
  if (classes_.empty()) throw ModelError("model is not trained");
  Matrix out = predict_raw(rows);
  for (std::size_t r = 0; r < out.rows(); ++r) softmax_in_place(out.row(r));
  return out;
}

void GbdtModel::save(std::ostream& out) const {
  using text::format_exact;
  const GbdtConfig& c = config_;
  out << "GBDT1\n";
  out << "config learning_rate=" << format_exact(c.learning_rate) << " n_estimators=" << c.n_estimators
      << " num_leaves=" << c.num_leaves << " max_bin=" << c.max_bin
      << " min_data_in_leaf=" << c.min_data_in_leaf
      << " min_child_weight=" << format_exact(c.min_child_weight)
      << " min_split_gain=" << format_exact(c.min_split_gain)
      << " reg_alpha=" << format_exact(c.reg_alpha) << " reg_lambda=" << format_exact(c.reg_lambda)
      << " colsample_bytree=" << format_exact(c.colsample_bytree) << " max_depth=" << c.max_depth
      << " goss_enabled=" << (c.goss_enabled ? 1 : 0)
      << " goss_top_rate=" << format_exact(c.goss_top_rate)
      << " goss_other_rate=" << format_exact(c.goss_other_rate) << " seed=" << c.seed << '\n';
  out << "features " << bins_.size() << '\n';
  out << "classes " << classes_.size();
  for (ClassLabel label : classes_) out << ' ' << label;
  out << '\n';
  for (std::size_t f = 0; f < bins_.size(); ++f) {
    out << "bins " << f << ' ' << bins_[f].edges.size();
    for (double e : bins_[f].edges) out << ' ' << format_exact(e);
    out << '\n';
  }
  for (std::size_t k = 0; k < trees_.size(); ++k) {
    out << "class " << k << ' ' << trees_[k].size() << '\n';
    for (const Tree& tree : trees_[k]) {
      out << "tree " << tree.nodes.size() << '\n';
      for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) {
          out << "L " << format_exact(node.value) << '\n';
        } else {
          out << "N " << node.feature << ' ' << node.bin << ' ' << format_exact(node.threshold) << ' '
              << format_exact(node.gain) << '\n';
        }
      }
    }
  }
  out << "end\n";
}

namespace {

std::vector<std::string_view> fields_of(const std::string& line) {
  std::vector<std::string_view> out;
  for (auto token : text::split(line, ' ')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

// Rebuilds child links of a preorder node list.
std::int32_t link_preorder(Tree& tree, std::size_t& cursor) {
  if (cursor >= tree.nodes.size()) throw ModelError("malformed tree");
  const auto index = static_cast<std::int32_t>(cursor++);
  TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
  if (!node.is_leaf()) {
    const std::int32_t left = link_preorder(tree, cursor);
    const std::int32_t right = link_preorder(tree, cursor);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
  }
  return index;
}

}  // namespace

GbdtModel GbdtModel::load(std::istream& in) {
  auto next = [&in]() {
    std::string line;
    if (!std::getline(in, line)) throw ModelError("truncated model file");
    return line;
  };
  if (text::trim(next()) != "GBDT1") throw ModelError("not a GBDT1 model");
  GbdtModel model;
  GbdtConfig& c = model.config_;
  {
    const std::string line = next();
    const auto tokens = fields_of(line);
    if (tokens.empty() || tokens[0] != "config") throw ModelError("missing config line");
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      const auto key = tokens[i].substr(0, eq);
      const auto value = tokens[i].substr(eq + 1);
      if (key == "learning_rate") c.learning_rate = text::parse_double(value);
      else if (key == "n_estimators") c.n_estimators = static_cast<int>(text::parse_int(value));
      else if (key == "num_leaves") c.num_leaves = static_cast<int>(text::parse_int(value));
      else if (key == "max_bin") c.max_bin = static_cast<int>(text::parse_int(value));
      else if (key == "min_data_in_leaf") c.min_data_in_leaf = static_cast<int>(text::parse_int(value));
      else if (key == "min_child_weight") c.min_child_weight = text::parse_double(value);
      else if (key == "min_split_gain") c.min_split_gain = text::parse_double(value);
      else if (key == "reg_alpha") c.reg_alpha = text::parse_double(value);
      else if (key == "reg_lambda") c.reg_lambda = text::parse_double(value);
      else if (key == "colsample_bytree") c.colsample_bytree = text::parse_double(value);
      else if (key == "max_depth") c.max_depth = static_cast<int>(text::parse_int(value));
      else if (key == "goss_enabled") c.goss_enabled = text::parse_int(value) != 0;
      else if (key == "goss_top_rate") c.goss_top_rate = text::parse_double(value);
      else if (key == "goss_other_rate") c.goss_other_rate = text::parse_double(value);
      else if (key == "seed") c.seed = text::parse_uint(value);
      else throw ModelError("unknown config key " + std::string(key));
    }
  }
  std::size_t features = 0;
  {
    const std::string line = next();
    const auto tokens = fields_of(line);
    if (tokens.size() != 2 || tokens[0] != "features") throw ModelError("missing features line");
    features = text::parse_uint(tokens[1]);
  }
  {
    const std::string line = next();
    const auto tokens = fields_of(line);
    if (tokens.size() < 2 || tokens[0] != "classes") throw ModelError("missing classes line");
    const auto count = text::parse_uint(tokens[1]);
    if (tokens.size() != count + 2) throw ModelError("class count mismatch");
    for (std::size_t i = 0; i < count; ++i) {
      model.classes_.push_back(static_cast<ClassLabel>(text::parse_int(tokens[2 + i])));
    }
  }
  model.bins_.resize(features);
  for (std::size_t f = 0; f < features; ++f) {
    const std::string line = next();
    const auto tokens = fields_of(line);
    if (tokens.size() < 3 || tokens[0] != "bins" || text::parse_uint(tokens[1]) != f) {
      throw ModelError("malformed bins line");
    }
    const auto count = text::parse_uint(tokens[2]);
    if (tokens.size() != count + 3) throw ModelError("bin edge count mismatch");
    for (std::size_t i = 0; i < count; ++i) model.bins_[f].edges.push_back(text::parse_double(tokens[3 + i]));
  }
  model.trees_.resize(model.classes_.size());
  for (std::size_t k = 0; k < model.classes_.size(); ++k) {
    const std::string line = next();
    const auto tokens = fields_of(line);
    if (tokens.size() != 3 || tokens[0] != "class" || text::parse_uint(tokens[1]) != k) {
      throw ModelError("malformed class line");
    }
    const auto tree_count = text::parse_uint(tokens[2]);
    for (std::size_t t = 0; t < tree_count; ++t) {
      const std::string header = next();
      const auto head = fields_of(header);
      if (head.size() != 2 || head[0] != "tree") throw ModelError("malformed tree header");
      Tree tree;
      tree.nodes.resize(text::parse_uint(head[1]));
      for (TreeNode& node : tree.nodes) {
        const std::string record = next();
        const auto parts = fields_of(record);
        if (parts.size() == 2 && parts[0] == "L") {
          node.value = text::parse_double(parts[1]);
        } else if (parts.size() == 5 && parts[0] == "N") {
          node.feature = static_cast<std::int32_t>(text::parse_int(parts[1]));
          node.bin = static_cast<std::uint16_t>(text::parse_uint(parts[2]));
          node.threshold = text::parse_double(parts[3]);
          node.gain = text::parse_double(parts[4]);
          if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= features) {
            throw ModelError("split feature out of range");
          }
        } else {
          throw ModelError("malformed node record");
        }
      }
      std::size_t cursor = 0;
      link_preorder(tree, cursor);
      if (cursor != tree.nodes.size()) throw ModelError("tree has unreachable nodes");
      model.trees_[k].push_back(std::move(tree));
    }
  }
  if (text::trim(next()) != "end") throw ModelError("missing end marker");
  return model;
}

ClassifierTrainer gbdt_trainer(const GbdtConfig& config) {
  return [config](const Matrix& rows, std::span<const ClassLabel> labels, std::uint64_t seed) {
    GbdtConfig c = config;
    c.seed = seed;
    return std::make_shared<const GbdtModel>(fit_gbdt(rows, labels, c));
  };
}

FeatureImportance feature_importance(const GbdtModel& model) {
  FeatureImportance result;
  const std::size_t features = model.feature_count();
  result.split_count.assign(features, 0);
  result.total_gain.assign(features, 0.0);
  std::size_t splits = 0;
  double gain = 0.0;
  for (const auto& class_trees : model.trees()) {
    for (const Tree& tree : class_trees) {
      for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) continue;
        ++result.split_count[static_cast<std::size_t>(node.feature)];
        result.total_gain[static_cast<std::size_t>(node.feature)] += node.gain;
        ++splits;
        gain += node.gain;
      }
    }
  }
  if (splits == 0 || !(gain > 0.0)) throw ModelError("model has no splits to attribute");
  result.split_fraction.resize(features);
  result.gain_fraction.resize(features);
  for (std::size_t f = 0; f < features; ++f) {
    result.split_fraction[f] = static_cast<double>(result.split_count[f]) / static_cast<double>(splits);
    result.gain_fraction[f] = result.total_gain[f] / gain;
  }
  return result;
}

}  // namespace motionid
