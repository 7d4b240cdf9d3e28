#include "flexlp/tree.hpp"

#include "flexlp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace flexlp {

// ---------------------------------------------------------------------------
// TrainingDesign

TrainingDesign::TrainingDesign(Matrix x) : x_(std::move(x)) {
  const std::size_t n = rows();
  const std::size_t p = cols();
  distinct_.resize(p);
  ranks_.resize(n * p);
  std::vector<double> column(n);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t i = 0; i < n; ++i) column[i] = value(i, c);
    std::vector<double>& uniq = distinct_[c];
    uniq = column;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t i = 0; i < n; ++i) {
      ranks_[c * n + i] =
          static_cast<std::uint32_t>(std::lower_bound(uniq.begin(), uniq.end(), column[i]) - uniq.begin());
    }
  }
}

std::optional<std::uint32_t> TrainingDesign::find_rank(std::size_t col, double threshold) const {
  const std::vector<double>& uniq = distinct_[col];
  auto it = std::lower_bound(uniq.begin(), uniq.end(), threshold);
  if (it == uniq.end() || *it != threshold) return std::nullopt;
  return static_cast<std::uint32_t>(it - uniq.begin());
}

// ---------------------------------------------------------------------------
// Tree

Tree::Tree() : nodes_(1), leaf_pos_(1, 0) {}

Tree::NodeId Tree::allocate(NodeId parent, int depth) {
  Node node;
  node.parent = parent;
  node.depth = depth;
  if (!free_.empty()) {
    const NodeId id = free_.back();
    free_.pop_back();
    nodes_[static_cast<std::size_t>(id)] = node;
    return id;
  }
  nodes_.push_back(node);
  return static_cast<NodeId>(nodes_.size() - 1);
}

std::pair<Tree::NodeId, Tree::NodeId> Tree::split(NodeId leaf, SplitRule rule) {
  const int d = depth(leaf) + 1;
  const NodeId l = allocate(leaf, d);
  const NodeId r = allocate(leaf, d);
  Node& n = nodes_[static_cast<std::size_t>(leaf)];
  n.left = l;
  n.right = r;
  n.rule = rule;
  reindex_leaves();
  return {l, r};
}

void Tree::collapse(NodeId node) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  free_.push_back(n.right);
  free_.push_back(n.left);
  n.left = kNoNode;
  n.right = kNoNode;
  n.rule = SplitRule{};
  reindex_leaves();
}

void Tree::set_rule(NodeId node, SplitRule rule) { nodes_[static_cast<std::size_t>(node)].rule = rule; }

void Tree::reindex_leaves() {
  leaf_pos_.assign(nodes_.size(), 0);
  leaf_count_ = 0;
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId node = stack.back();
    stack.pop_back();
    if (is_leaf(node)) {
      leaf_pos_[static_cast<std::size_t>(node)] = leaf_count_++;
    } else {
      stack.push_back(right(node));
      stack.push_back(left(node));
    }
  }
}

std::vector<Tree::NodeId> Tree::leaves() const {
  std::vector<NodeId> out(leaf_count_);
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId node = stack.back();
    stack.pop_back();
    if (is_leaf(node)) {
      out[leaf_position(node)] = node;
    } else {
      stack.push_back(right(node));
      stack.push_back(left(node));
    }
  }
  return out;
}

std::vector<Tree::NodeId> Tree::internal_nodes() const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId node = stack.back();
    stack.pop_back();
    if (!is_leaf(node)) {
      out.push_back(node);
      stack.push_back(right(node));
      stack.push_back(left(node));
    }
  }
  return out;
}

std::vector<Tree::NodeId> Tree::prunable_nodes() const {
  std::vector<NodeId> out;
  for (NodeId node : internal_nodes()) {
    if (is_leaf(left(node)) && is_leaf(right(node))) out.push_back(node);
  }
  return out;
}

std::vector<std::pair<Tree::NodeId, Tree::NodeId>> Tree::internal_pairs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId node : internal_nodes()) {
    if (!is_leaf(left(node))) out.emplace_back(node, left(node));
    if (!is_leaf(right(node))) out.emplace_back(node, right(node));
  }
  return out;
}

int Tree::max_depth() const {
  int d = 0;
  for (NodeId leaf : leaves()) d = std::max(d, depth(leaf));
  return d;
}

bool Tree::in_subtree(NodeId node, NodeId ancestor) const {
  const int target = depth(ancestor);
  while (depth(node) > target) node = parent(node);
  return node == ancestor;
}

bool Tree::same_subtree(const Tree& a, NodeId na, const Tree& b, NodeId nb) {
  if (a.is_leaf(na) != b.is_leaf(nb)) return false;
  if (a.is_leaf(na)) return true;
  return a.rule(na) == b.rule(nb) && same_subtree(a, a.left(na), b, b.left(nb)) &&
         same_subtree(a, a.right(na), b, b.right(nb));
}

bool operator==(const Tree& a, const Tree& b) { return Tree::same_subtree(a, Tree::root(), b, Tree::root()); }

// ---------------------------------------------------------------------------
// Prediction

std::size_t assign_leaf(const Tree& tree, std::span<const double> x) {
  return tree.leaf_position(tree.terminal_node(x));
}

double tree_predict(const Tree& tree, const LeafValues& leaves, std::span<const double> x) {
  return leaves[assign_leaf(tree, x)];
}

std::vector<Tree::NodeId> route_rows(const Tree& tree, const TrainingDesign& design) {
  std::vector<Tree::NodeId> out(design.rows());
  for (std::size_t i = 0; i < design.rows(); ++i) {
    out[i] = tree.descend(Tree::root(), [&](std::size_t c) { return design.value(i, c); });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Priors and likelihood

double depth_nonterminal_prob(int depth, double alpha, double beta) {
  if (depth < 0) throw ParameterError("depth_nonterminal_prob: depth must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("depth prior: alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ParameterError("depth prior: beta must be >= 0");
  return alpha * std::pow(1.0 + depth, -beta);
}

double node_log_marginal_likelihood(const NodeStats& s, double sigma2, double sigma_mu) {
  if (!(sigma2 > 0.0) || !(sigma_mu > 0.0)) throw ParameterError("marginal likelihood: sigma2 and sigma_mu must be > 0");
  if (s.n == 0) return 0.0;
  const double n = static_cast<double>(s.n);
  const double tau2 = sigma_mu * sigma_mu;
  const double denom = sigma2 + n * tau2;
  return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) + 0.5 * std::log(sigma2 / denom) -
         s.sum_sq / (2.0 * sigma2) + tau2 * s.sum * s.sum / (2.0 * sigma2 * denom);
}

double node_log_marginal_likelihood(std::span<const double> residuals, double sigma2, double sigma_mu) {
  NodeStats s;
  for (double r : residuals) s.add(r);
  return node_log_marginal_likelihood(s, sigma2, sigma_mu);
}

namespace detail {

SplitScratch::SplitScratch(const TrainingDesign& design) : design_(&design), stamps_(design.cols()) {
  for (std::size_t c = 0; c < design.cols(); ++c) stamps_[c].assign(design.distinct(c).size(), 0);
}

SplitScratch::Candidates SplitScratch::scan(std::span<const std::uint32_t> rows, std::size_t col, bool collect) {
  if (++stamp_ == 0) {
    for (auto& s : stamps_) std::fill(s.begin(), s.end(), 0);
    stamp_ = 1;
  }
  std::vector<std::uint32_t>& stamps = stamps_[col];
  collected_.clear();
  std::size_t distinct = 0;
  std::uint32_t max_rank = 0;
  for (std::uint32_t row : rows) {
    const std::uint32_t r = design_->rank(row, col);
    if (stamps[r] != stamp_) {
      stamps[r] = stamp_;
      ++distinct;
      max_rank = std::max(max_rank, r);
      if (collect) collected_.push_back(r);
    }
  }
  if (collect && distinct > 0) {
    collected_.erase(std::find(collected_.begin(), collected_.end(), max_rank));
  }
  return {distinct > 0 ? distinct - 1 : 0, max_rank};
}

namespace {

void score_node(const Tree& tree, Tree::NodeId node, std::span<std::uint32_t> rows, std::span<const double> residuals,
                const ScoreParams& params, SplitScratch& scratch, SubtreeScore& out) {
  if (!out.feasible) return;
  const int d = tree.depth(node);
  if (params.max_depth >= 0 && d > params.max_depth) {
    out.feasible = false;
    return;
  }
  const double split_prob = depth_nonterminal_prob(d, params.alpha, params.beta);
  if (tree.is_leaf(node)) {
    if (rows.size() < params.min_leaf) {
      out.feasible = false;
      return;
    }
    out.log_prior += std::log1p(-split_prob);
    if (params.with_likelihood) {
      NodeStats stats;
      for (std::uint32_t row : rows) stats.add(residuals[row]);
      out.log_likelihood += node_log_marginal_likelihood(stats, params.sigma2, params.sigma_mu);
    }
    return;
  }

  const TrainingDesign& design = scratch.design();
  const SplitRule& rule = tree.rule(node);
  if (rule.covariate >= design.cols()) {
    out.feasible = false;
    return;
  }
  const auto cand = scratch.scan(rows, rule.covariate, false);
  const auto rank = design.find_rank(rule.covariate, rule.threshold);
  if (cand.count == 0 || !rank || !scratch.seen(rule.covariate, *rank) || *rank == cand.max_rank) {
    out.feasible = false;
    return;
  }
  out.log_prior += std::log(split_prob) - std::log(static_cast<double>(design.cols())) -
                   std::log(static_cast<double>(cand.count));

  auto mid = std::partition(rows.begin(), rows.end(), [&](std::uint32_t row) {
    return design.value(row, rule.covariate) <= rule.threshold;
  });
  const auto n_left = static_cast<std::size_t>(mid - rows.begin());
  score_node(tree, tree.left(node), rows.first(n_left), residuals, params, scratch, out);
  score_node(tree, tree.right(node), rows.subspan(n_left), residuals, params, scratch, out);
}

}  // namespace

SubtreeScore score_subtree(const Tree& tree, Tree::NodeId node, std::span<std::uint32_t> rows,
                           std::span<const double> residuals, const ScoreParams& params, SplitScratch& scratch) {
  SubtreeScore out;
  score_node(tree, node, rows, residuals, params, scratch, out);
  return out;
}

void rows_in_subtree(const Tree& tree, std::span<const Tree::NodeId> row_nodes, Tree::NodeId node,
                     std::vector<std::uint32_t>& out) {
  out.clear();
  if (tree.is_leaf(node)) {
    for (std::size_t i = 0; i < row_nodes.size(); ++i)
      if (row_nodes[i] == node) out.push_back(static_cast<std::uint32_t>(i));
    return;
  }
  for (std::size_t i = 0; i < row_nodes.size(); ++i)
    if (tree.in_subtree(row_nodes[i], node)) out.push_back(static_cast<std::uint32_t>(i));
}

namespace {

bool structurally_feasible(const Tree& tree, Tree::NodeId node, std::span<const std::uint32_t> rows,
                           const ProposalOptions& options, SplitScratch& scratch) {
  std::vector<std::uint32_t> work(rows.begin(), rows.end());
  ScoreParams params;
  params.min_leaf = options.min_leaf;
  params.max_depth = options.max_depth;
  return score_subtree(tree, node, work, {}, params, scratch).feasible;
}

}  // namespace

std::optional<Proposal> propose_move(const Tree& tree, std::span<const Tree::NodeId> row_nodes, MoveKind move,
                                     RngStream& rng, const ProposalOptions& options, SplitScratch& scratch) {
  const TrainingDesign& design = scratch.design();
  const double p = static_cast<double>(design.cols());
  const MoveProbabilities& mp = options.move_probs;
  std::vector<std::uint32_t> rows;

  switch (move) {
    case MoveKind::kGrow: {
      const std::vector<Tree::NodeId> leaves = tree.leaves();
      const Tree::NodeId node = leaves[rng.index(leaves.size())];
      const std::size_t var = rng.index(design.cols());
      if (options.max_depth >= 0 && tree.depth(node) + 1 > options.max_depth) return std::nullopt;
      rows_in_subtree(tree, row_nodes, node, rows);
      const auto cand = scratch.scan(rows, var, true);
      if (cand.count == 0) return std::nullopt;
      const double threshold = design.distinct(var)[scratch.candidates()[rng.index(cand.count)]];
      std::size_t n_left = 0;
      for (std::uint32_t row : rows) n_left += design.value(row, var) <= threshold ? 1 : 0;
      if (n_left < options.min_leaf || rows.size() - n_left < options.min_leaf) return std::nullopt;

      Proposal out{tree, move, node, 0.0};
      out.tree.split(node, SplitRule{var, threshold});
      const double n_prunable = static_cast<double>(out.tree.prunable_nodes().size());
      out.log_q_ratio = std::log(mp.prune / n_prunable) -
                        std::log(mp.grow / (static_cast<double>(leaves.size()) * p * static_cast<double>(cand.count)));
      return out;
    }
    case MoveKind::kPrune: {
      const std::vector<Tree::NodeId> prunable = tree.prunable_nodes();
      if (prunable.empty()) return std::nullopt;
      const Tree::NodeId node = prunable[rng.index(prunable.size())];
      rows_in_subtree(tree, row_nodes, node, rows);
      const auto cand = scratch.scan(rows, tree.rule(node).covariate, false);
      if (cand.count == 0) return std::nullopt;

      Proposal out{tree, move, node, 0.0};
      out.tree.collapse(node);
      const double n_leaves_new = static_cast<double>(out.tree.leaf_count());
      out.log_q_ratio = std::log(mp.grow / (n_leaves_new * p * static_cast<double>(cand.count))) -
                        std::log(mp.prune / static_cast<double>(prunable.size()));
      return out;
    }
    case MoveKind::kChange: {
      const std::vector<Tree::NodeId> internal = tree.internal_nodes();
      if (internal.empty()) return std::nullopt;
      const Tree::NodeId node = internal[rng.index(internal.size())];
      const std::size_t var = rng.index(design.cols());
      rows_in_subtree(tree, row_nodes, node, rows);
      const auto cand_new = scratch.scan(rows, var, true);
      if (cand_new.count == 0) return std::nullopt;
      const double threshold = design.distinct(var)[scratch.candidates()[rng.index(cand_new.count)]];
      const auto cand_old = scratch.scan(rows, tree.rule(node).covariate, false);
      if (cand_old.count == 0) return std::nullopt;

      Proposal out{tree, move, node, 0.0};
      out.tree.set_rule(node, SplitRule{var, threshold});
      if (!structurally_feasible(out.tree, node, rows, options, scratch)) return std::nullopt;
      out.log_q_ratio =
          std::log(static_cast<double>(cand_new.count)) - std::log(static_cast<double>(cand_old.count));
      return out;
    }
    case MoveKind::kSwap: {
      const auto pairs = tree.internal_pairs();
      if (pairs.empty()) return std::nullopt;
      const auto [upper, lower] = pairs[rng.index(pairs.size())];
      Proposal out{tree, move, upper, 0.0};
      out.tree.set_rule(upper, tree.rule(lower));
      out.tree.set_rule(lower, tree.rule(upper));
      rows_in_subtree(tree, row_nodes, upper, rows);
      if (!structurally_feasible(out.tree, upper, rows, options, scratch)) return std::nullopt;
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace detail

double log_tree_prior(const Tree& tree, double alpha, double beta, const TrainingDesign& design) {
  detail::SplitScratch scratch(design);
  std::vector<std::uint32_t> rows(design.rows());
  std::iota(rows.begin(), rows.end(), 0U);
  detail::ScoreParams params;
  params.alpha = alpha;
  params.beta = beta;
  params.min_leaf = 0;
  const auto score = detail::score_subtree(tree, Tree::root(), rows, {}, params, scratch);
  if (!score.feasible) throw DataError("tree prior undefined: a split rule has no valid threshold on this data");
  return score.log_prior;
}

// ---------------------------------------------------------------------------
// Moves

const char* to_string(MoveKind move) {
  switch (move) {
    case MoveKind::kGrow: return "grow";
    case MoveKind::kPrune: return "prune";
    case MoveKind::kChange: return "change";
    case MoveKind::kSwap: return "swap";
  }
  return "?";
}

double MoveProbabilities::of(MoveKind move) const {
  switch (move) {
    case MoveKind::kGrow: return grow;
    case MoveKind::kPrune: return prune;
    case MoveKind::kChange: return change;
    case MoveKind::kSwap: return swap;
  }
  return 0.0;
}

MoveKind MoveProbabilities::sample(RngStream& rng) const {
  const double u = rng.uniform() * (grow + prune + change + swap);
  if (u < grow) return MoveKind::kGrow;
  if (u < grow + prune) return MoveKind::kPrune;
  if (u < grow + prune + change) return MoveKind::kChange;
  return MoveKind::kSwap;
}

std::optional<Proposal> propose_move(const Tree& tree, MoveKind move, const TrainingDesign& design, RngStream& rng,
                                     const ProposalOptions& options) {
  const std::vector<Tree::NodeId> row_nodes = route_rows(tree, design);
  return propose_move(tree, row_nodes, move, design, rng, options);
}

std::optional<Proposal> propose_move(const Tree& tree, std::span<const Tree::NodeId> row_nodes, MoveKind move,
                                     const TrainingDesign& design, RngStream& rng, const ProposalOptions& options) {
  detail::SplitScratch scratch(design);
  return detail::propose_move(tree, row_nodes, move, rng, options, scratch);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json node_to_json(const Tree& tree, Tree::NodeId node, const LeafValues& leaves) {
  if (tree.is_leaf(node)) return nlohmann::json{{"leaf", leaves[tree.leaf_position(node)]}};
  const SplitRule& r = tree.rule(node);
  return nlohmann::json{{"covariate", r.covariate},
                        {"threshold", r.threshold},
                        {"left", node_to_json(tree, tree.left(node), leaves)},
                        {"right", node_to_json(tree, tree.right(node), leaves)}};
}

void node_from_json(const nlohmann::json& j, Tree& tree, Tree::NodeId node, std::vector<std::pair<Tree::NodeId, double>>& mu) {
  if (j.contains("leaf")) {
    mu.emplace_back(node, j.at("leaf").get<double>());
    return;
  }
  const auto [l, r] = tree.split(node, SplitRule{j.at("covariate").get<std::size_t>(), j.at("threshold").get<double>()});
  node_from_json(j.at("left"), tree, l, mu);
  node_from_json(j.at("right"), tree, r, mu);
}

}  // namespace

nlohmann::json tree_to_json(const Tree& tree, const LeafValues& leaves) {
  if (leaves.size() != tree.leaf_count()) throw DataError("tree_to_json: leaf value count does not match the tree");
  return node_to_json(tree, Tree::root(), leaves);
}

std::pair<Tree, LeafValues> tree_from_json(const nlohmann::json& j) {
  Tree tree;
  std::vector<std::pair<Tree::NodeId, double>> mu;
  try {
    node_from_json(j, tree, Tree::root(), mu);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tree JSON: ") + e.what());
  }
  LeafValues leaves(tree.leaf_count());
  for (const auto& [node, value] : mu) leaves[tree.leaf_position(node)] = value;
  return {std::move(tree), std::move(leaves)};
}

}  // namespace flexlp
