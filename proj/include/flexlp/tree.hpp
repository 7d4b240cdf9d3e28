#pragma once

#include "flexlp/linalg.hpp"
#include "flexlp/rng.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace flexlp {

/// Decision rule "X[covariate] <= threshold" (left) versus "> threshold" (right).
struct SplitRule {
  std::size_t covariate = 0;
  double threshold = 0.0;

  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

/// Training covariates prepared for split search. For every column it keeps the
/// sorted distinct values and the position of each row's value among them, so
/// candidate thresholds inside a node can be enumerated in linear time.
class TrainingDesign {
 public:
  explicit TrainingDesign(Matrix x);

  std::size_t rows() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(x_.cols()); }
  double value(std::size_t row, std::size_t col) const {
    return x_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  std::uint32_t rank(std::size_t row, std::size_t col) const { return ranks_[col * rows() + row]; }
  std::span<const double> distinct(std::size_t col) const { return distinct_[col]; }
  /// Position of `threshold` among the distinct values of `col`, or nullopt if unobserved.
  std::optional<std::uint32_t> find_rank(std::size_t col, double threshold) const;
  const Matrix& values() const { return x_; }

 private:
  Matrix x_;
  std::vector<std::vector<double>> distinct_;
  std::vector<std::uint32_t> ranks_;
};

/// Binary regression tree structure. Node ids are stable across edits (freed ids
/// are recycled), so row-to-node caches survive grow/prune of unrelated nodes.
/// Terminal nodes are numbered 0..B-1 in depth-first, left-first order; that
/// numbering indexes LeafValues.
class Tree {
 public:
  using NodeId = int;
  static constexpr NodeId kNoNode = -1;

  Tree();

  static constexpr NodeId root() { return 0; }
  bool is_leaf(NodeId node) const { return nodes_[static_cast<std::size_t>(node)].left == kNoNode; }
  NodeId left(NodeId node) const { return nodes_[static_cast<std::size_t>(node)].left; }
  NodeId right(NodeId node) const { return nodes_[static_cast<std::size_t>(node)].right; }
  NodeId parent(NodeId node) const { return nodes_[static_cast<std::size_t>(node)].parent; }
  int depth(NodeId node) const { return nodes_[static_cast<std::size_t>(node)].depth; }
  const SplitRule& rule(NodeId node) const { return nodes_[static_cast<std::size_t>(node)].rule; }

  std::size_t leaf_count() const { return leaf_count_; }
  /// Upper bound on node ids; sized arrays indexed by NodeId use this.
  std::size_t id_bound() const { return nodes_.size(); }
  /// Depth-first position of a terminal node.
  std::size_t leaf_position(NodeId leaf) const { return leaf_pos_[static_cast<std::size_t>(leaf)]; }

  std::vector<NodeId> leaves() const;
  std::vector<NodeId> internal_nodes() const;
  /// Internal nodes whose two children are both terminal.
  std::vector<NodeId> prunable_nodes() const;
  /// (parent, child) pairs where both are internal.
  std::vector<std::pair<NodeId, NodeId>> internal_pairs() const;
  int max_depth() const;
  /// True when `ancestor` is `node` or lies on its path to the root.
  bool in_subtree(NodeId node, NodeId ancestor) const;

  /// Terminal node reached from `start` by following the <= / > routing.
  template <class Value>
  NodeId descend(NodeId start, Value&& value_of) const {
    NodeId node = start;
    while (!is_leaf(node)) {
      const Node& n = nodes_[static_cast<std::size_t>(node)];
      node = value_of(n.rule.covariate) <= n.rule.threshold ? n.left : n.right;
    }
    return node;
  }
  NodeId terminal_node(std::span<const double> x) const {
    return descend(root(), [&](std::size_t c) { return x[c]; });
  }

  /// Turns a terminal node into an internal one with two terminal children.
  std::pair<NodeId, NodeId> split(NodeId leaf, SplitRule rule);
  /// Collapses an internal node whose children are both terminal.
  void collapse(NodeId node);
  void set_rule(NodeId node, SplitRule rule);

  friend bool operator==(const Tree& a, const Tree& b);

 private:
  struct Node {
    NodeId parent = kNoNode;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    int depth = 0;
    SplitRule rule;
  };

  NodeId allocate(NodeId parent, int depth);
  void reindex_leaves();
  static bool same_subtree(const Tree& a, NodeId na, const Tree& b, NodeId nb);

  std::vector<Node> nodes_;
  std::vector<NodeId> free_;
  std::vector<std::size_t> leaf_pos_;
  std::size_t leaf_count_ = 1;
};

/// Terminal-node parameters, one per leaf in depth-first order.
using LeafValues = std::vector<double>;

std::size_t assign_leaf(const Tree& tree, std::span<const double> x);
double tree_predict(const Tree& tree, const LeafValues& leaves, std::span<const double> x);

/// alpha * (1 + depth)^(-beta): prior probability that a node at `depth` splits.
double depth_nonterminal_prob(int depth, double alpha, double beta);

/// Log prior of the tree structure on `design`: depth terms, a uniform choice
/// among covariates and a uniform choice among the node's candidate thresholds
/// (distinct observed values in the node, excluding the node maximum).
double log_tree_prior(const Tree& tree, double alpha, double beta, const TrainingDesign& design);

/// Sufficient statistics of the residuals routed to one node.
struct NodeStats {
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double r) {
    ++n;
    sum += r;
    sum_sq += r * r;
  }
};

/// log of the integral over mu of N(r | mu 1, sigma2 I) N(mu | 0, sigma_mu^2).
double node_log_marginal_likelihood(const NodeStats& stats, double sigma2, double sigma_mu);
double node_log_marginal_likelihood(std::span<const double> residuals, double sigma2, double sigma_mu);

enum class MoveKind { kGrow = 0, kPrune = 1, kChange = 2, kSwap = 3 };
const char* to_string(MoveKind move);

struct MoveProbabilities {
  double grow = 0.25;
  double prune = 0.25;
  double change = 0.4;
  double swap = 0.1;

  double of(MoveKind move) const;
  MoveKind sample(RngStream& rng) const;
};

struct ProposalOptions {
  MoveProbabilities move_probs;
  std::size_t min_leaf = 5;
  int max_depth = -1;  // negative: unlimited
};

struct Proposal {
  Tree tree;
  MoveKind move = MoveKind::kGrow;
  Tree::NodeId node = 0;     // root of the subtree that differs from the current tree
  double log_q_ratio = 0.0;  // log q(old | new) - log q(new | old)
};

/// Terminal node of every training row.
std::vector<Tree::NodeId> route_rows(const Tree& tree, const TrainingDesign& design);

/// Draws a proposal for `move`. Returns nullopt when the move is impossible on
/// this tree or would leave a leaf with fewer than min_leaf rows; callers treat
/// that as a rejected step.
std::optional<Proposal> propose_move(const Tree& tree, MoveKind move, const TrainingDesign& design, RngStream& rng,
                                     const ProposalOptions& options);
/// Same, reusing a cached row routing (`row_nodes[i]` is the terminal node of row i).
std::optional<Proposal> propose_move(const Tree& tree, std::span<const Tree::NodeId> row_nodes, MoveKind move,
                                     const TrainingDesign& design, RngStream& rng, const ProposalOptions& options);

namespace detail {

/// Reusable buffers for candidate enumeration.
class SplitScratch {
 public:
  explicit SplitScratch(const TrainingDesign& design);

  const TrainingDesign& design() const { return *design_; }

  struct Candidates {
    std::size_t count = 0;  // distinct values minus one
    std::uint32_t max_rank = 0;
  };
  /// Counts candidate thresholds of `col` among `rows`; when `collect` is set the
  /// candidate ranks are left in candidates().
  Candidates scan(std::span<const std::uint32_t> rows, std::size_t col, bool collect);
  bool seen(std::size_t col, std::uint32_t rank) const { return stamps_[col][rank] == stamp_; }
  std::span<const std::uint32_t> candidates() const { return collected_; }

 private:
  const TrainingDesign* design_;
  std::vector<std::vector<std::uint32_t>> stamps_;
  std::uint32_t stamp_ = 0;
  std::vector<std::uint32_t> collected_;
};

struct ScoreParams {
  double alpha = 0.95;
  double beta = 2.0;
  std::size_t min_leaf = 1;
  int max_depth = -1;
  bool with_likelihood = false;
  double sigma2 = 1.0;
  double sigma_mu = 1.0;
};

struct SubtreeScore {
  bool feasible = true;
  double log_prior = 0.0;
  double log_likelihood = 0.0;
};

/// Prior (and optionally marginal likelihood) contribution of the subtree rooted
/// at `node`, given the rows that reach it. `rows` is reordered in place.
SubtreeScore score_subtree(const Tree& tree, Tree::NodeId node, std::span<std::uint32_t> rows,
                           std::span<const double> residuals, const ScoreParams& params, SplitScratch& scratch);

/// Rows whose terminal node lies in the subtree rooted at `node`, in row order.
void rows_in_subtree(const Tree& tree, std::span<const Tree::NodeId> row_nodes, Tree::NodeId node,
                     std::vector<std::uint32_t>& out);

std::optional<Proposal> propose_move(const Tree& tree, std::span<const Tree::NodeId> row_nodes, MoveKind move,
                                     RngStream& rng, const ProposalOptions& options, SplitScratch& scratch);

}  // namespace detail

nlohmann::json tree_to_json(const Tree& tree, const LeafValues& leaves);
std::pair<Tree, LeafValues> tree_from_json(const nlohmann::json& j);

}  // namespace flexlp
