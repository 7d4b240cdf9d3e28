#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexlp/errors.hpp"
#include "flexlp/tree.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

using namespace flexlp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  std::vector<double> lo, hi;  // lo < x <= hi per covariate
  double mu = 0.0;
};

// Hyper-rectangle of every leaf, listed in depth-first left-first order.
void enumerate_boxes(const Tree& t, Tree::NodeId node, Box box, const LeafValues& mu, std::vector<Box>& out) {
  if (t.is_leaf(node)) {
    box.mu = mu[t.leaf_position(node)];
    out.push_back(box);
    return;
  }
  const SplitRule r = t.rule(node);
  Box l = box, h = box;
  l.hi[r.covariate] = std::min(l.hi[r.covariate], r.threshold);
  h.lo[r.covariate] = std::max(h.lo[r.covariate], r.threshold);
  enumerate_boxes(t, t.left(node), l, mu, out);
  enumerate_boxes(t, t.right(node), h, mu, out);
}

bool inside(const Box& b, const std::vector<double>& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > b.lo[i] && x[i] <= b.hi[i])) return false;
  return true;
}

Tree random_tree(RngStream& rng, int depth, std::size_t p) {
  Tree t;
  std::vector<Tree::NodeId> frontier{Tree::root()};
  while (!frontier.empty()) {
    const Tree::NodeId n = frontier.back();
    frontier.pop_back();
    if (t.depth(n) >= depth || (n != Tree::root() && rng.uniform() < 0.2)) continue;
    const auto [l, r] = t.split(n, SplitRule{rng.index(p), rng.normal()});
    frontier.push_back(l);
    frontier.push_back(r);
  }
  return t;
}

Matrix toy_grid() {
  Matrix x(6, 2);
  x << 0, 1,  //
      1, 1,   //
      2, 0,   //
      3, 0,   //
      1, 2,   //
      4, 2;
  return x;
}

std::vector<double> candidates(const Matrix& x, const std::vector<int>& rows, int col) {
  std::set<double> v;
  for (int r : rows) v.insert(x(r, col));
  if (!v.empty()) v.erase(std::prev(v.end()));
  return {v.begin(), v.end()};
}

// Prior mass of all trees whose nodes stay within max_depth, by direct recursion.
double prior_mass(const Matrix& x, const std::vector<int>& rows, int depth, int max_depth) {
  const double ps = 0.95 * std::pow(1.0 + depth, -2.0);
  if (depth == max_depth) return 1.0 - ps;
  double split = 0.0;
  for (int v = 0; v < x.cols(); ++v) {
    const auto cs = candidates(x, rows, v);
    for (double c : cs) {
      std::vector<int> l, r;
      for (int row : rows) (x(row, v) <= c ? l : r).push_back(row);
      split += prior_mass(x, l, depth + 1, max_depth) * prior_mass(x, r, depth + 1, max_depth) /
               (static_cast<double>(x.cols()) * static_cast<double>(cs.size()));
    }
  }
  return 1.0 - ps + ps * split;
}

// Every tree (as a rule list per node) within max_depth, built on the Tree API.
void all_trees(const Matrix& x, Tree t, std::vector<Tree::NodeId> open, std::vector<std::vector<int>> open_rows,
               int max_depth, std::vector<Tree>& out) {
  if (open.empty()) {
    out.push_back(t);
    return;
  }
  const Tree::NodeId n = open.back();
  const std::vector<int> rows = open_rows.back();
  open.pop_back();
  open_rows.pop_back();
  all_trees(x, t, open, open_rows, max_depth, out);  // leave n terminal
  if (t.depth(n) >= max_depth) return;
  for (int v = 0; v < x.cols(); ++v) {
    for (double c : candidates(x, rows, v)) {
      Tree s = t;
      const auto [l, r] = s.split(n, SplitRule{static_cast<std::size_t>(v), c});
      std::vector<int> lr, rr;
      for (int row : rows) (x(row, v) <= c ? lr : rr).push_back(row);
      auto o = open;
      auto orows = open_rows;
      o.push_back(l);
      orows.push_back(lr);
      o.push_back(r);
      orows.push_back(rr);
      all_trees(x, s, o, orows, max_depth, out);
    }
  }
}

}  // namespace

TEST_CASE("leaf assignment boundary convention") {
  Tree root;
  const std::vector<double> any{3.0, -1.0};
  CHECK(assign_leaf(root, any) == 0);
  CHECK(tree_predict(root, {0.3}, any) == 0.3);

  Tree t;
  t.split(Tree::root(), SplitRule{0, 0.5});
  const std::vector<double> at{0.5}, above{0.500001};
  CHECK(assign_leaf(t, at) == 0);
  CHECK(assign_leaf(t, above) == 1);
  const LeafValues mu{-0.2, 0.4};
  const std::vector<double> below{0.1};
  CHECK(tree_predict(t, mu, below) == -0.2);
}

TEST_CASE("random trees agree with the hyper-rectangle enumeration") {
  RngStream rng(17);
  int disagreements = 0;
  for (int k = 0; k < 50; ++k) {
    const Tree t = random_tree(rng, 4, 3);
    LeafValues mu(t.leaf_count());
    for (double& m : mu) m = rng.normal();
    std::vector<Box> boxes;
    enumerate_boxes(t, Tree::root(), Box{std::vector<double>(3, -kInf), std::vector<double>(3, kInf)}, mu, boxes);
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
      std::size_t hits = 0, which = 0;
      double literal = 0.0;
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        if (inside(boxes[b], x)) {
          ++hits;
          which = b;
          literal += boxes[b].mu;
        }
      }
      if (hits != 1 || which != assign_leaf(t, x) || literal != tree_predict(t, mu, x)) ++disagreements;
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("prediction is constant away from thresholds") {
  Tree t;
  const auto [l, r] = t.split(Tree::root(), SplitRule{0, 0.0});
  t.split(r, SplitRule{1, 1.0});
  const LeafValues mu{0.1, 0.2, 0.3};
  const std::vector<double> a{0.5, 0.2}, b{0.9, 0.99};
  CHECK(tree_predict(t, mu, a) == tree_predict(t, mu, b));
  (void)l;
}

TEST_CASE("depth prior") {
  CHECK(depth_nonterminal_prob(0, 0.95, 2.0) == 0.95);
  CHECK(depth_nonterminal_prob(1, 0.95, 2.0) == doctest::Approx(0.2375).epsilon(1e-15));
  CHECK(depth_nonterminal_prob(3, 0.95, 2.0) == doctest::Approx(0.059375).epsilon(1e-15));
  for (int d = 0; d < 10; ++d) CHECK(depth_nonterminal_prob(d + 1, 0.95, 2.0) < depth_nonterminal_prob(d, 0.95, 2.0));
  CHECK_THROWS_AS(depth_nonterminal_prob(0, 1.0, 2.0), ParameterError);
  CHECK_THROWS_AS(depth_nonterminal_prob(-1, 0.5, 2.0), ParameterError);
}

TEST_CASE("tree prior composition") {
  Matrix x(5, 1);
  x << 1, 2, 3, 4, 5;
  const TrainingDesign design(x);
  CHECK(log_tree_prior(Tree{}, 0.95, 2.0, design) == doctest::Approx(std::log(0.05)));

  Tree t;
  t.split(Tree::root(), SplitRule{0, 2.0});
  const double m = 4.0;  // candidates 1..4
  CHECK(log_tree_prior(t, 0.95, 2.0, design) ==
        doctest::Approx(std::log(0.95) + std::log(1.0 / m) + 2.0 * std::log(1.0 - 0.2375)));

  Tree bad;
  bad.split(Tree::root(), SplitRule{0, 5.0});  // node maximum: empty right child
  CHECK_THROWS_AS(log_tree_prior(bad, 0.95, 2.0, design), DataError);
  Tree unobserved;
  unobserved.split(Tree::root(), SplitRule{0, 2.5});
  CHECK_THROWS_AS(log_tree_prior(unobserved, 0.95, 2.0, design), DataError);
}

TEST_CASE("tree prior mass over depth <= 2 matches the recursion") {
  const Matrix x = toy_grid();
  const TrainingDesign design(x);
  std::vector<Tree> trees;
  all_trees(x, Tree{}, {Tree::root()}, {{0, 1, 2, 3, 4, 5}}, 2, trees);
  CHECK(trees.size() > 20);
  double total = 0.0;
  for (const Tree& t : trees) {
    // depth <= 2 truncation: leaves at depth 2 carry 1 - p(2) in both computations
    total += std::exp(log_tree_prior(t, 0.95, 2.0, design));
  }
  CHECK(total == doctest::Approx(prior_mass(x, {0, 1, 2, 3, 4, 5}, 0, 2)).epsilon(1e-12));
}

TEST_CASE("node marginal likelihood") {
  CHECK(node_log_marginal_likelihood(std::vector<double>{}, 1.0, 1.0) == 0.0);
  CHECK(node_log_marginal_likelihood(std::vector<double>{0.0}, 1.0, 1e-9) == doctest::Approx(-0.918938533).epsilon(1e-9));

  const std::vector<double> r{0.3, -0.1, 0.7};
  const double sigma2 = 0.4, sigma_mu = 0.6;
  auto integrand = [&](double mu) {
    double ll = -0.5 * std::log(2.0 * std::numbers::pi * sigma_mu * sigma_mu) - mu * mu / (2.0 * sigma_mu * sigma_mu);
    for (double v : r) ll += -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - (v - mu) * (v - mu) / (2.0 * sigma2);
    return std::exp(ll);
  };
  const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -10.0, 10.0, 15, 1e-14);
  CHECK(std::fabs(node_log_marginal_likelihood(r, sigma2, sigma_mu) - std::log(q)) < 1e-8);
  CHECK_THROWS_AS(node_log_marginal_likelihood(r, 0.0, 1.0), ParameterError);
}

TEST_CASE("proposal bookkeeping") {
  RngStream rng(3);
  Matrix x(40, 2);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = i;
    x(i, 1) = (i * 7) % 11;
  }
  const TrainingDesign design(x);
  ProposalOptions opts;

  CHECK_FALSE(propose_move(Tree{}, MoveKind::kPrune, design, rng, opts).has_value());
  CHECK_FALSE(propose_move(Tree{}, MoveKind::kChange, design, rng, opts).has_value());
  CHECK_FALSE(propose_move(Tree{}, MoveKind::kSwap, design, rng, opts).has_value());

  int grown = 0;
  for (int k = 0; k < 50; ++k) {
    const auto g = propose_move(Tree{}, MoveKind::kGrow, design, rng, opts);
    if (!g) continue;
    ++grown;
    CHECK(g->tree.leaf_count() == 2);
    CHECK_FALSE(propose_move(g->tree, MoveKind::kSwap, design, rng, opts).has_value());
    const auto p = propose_move(g->tree, MoveKind::kPrune, design, rng, opts);
    REQUIRE(p.has_value());
    CHECK(p->tree == Tree{});
    CHECK(g->log_q_ratio + p->log_q_ratio == doctest::Approx(0.0).epsilon(1e-14));
    // leaves respect min_leaf
    const auto nodes = route_rows(g->tree, design);
    for (Tree::NodeId leaf : g->tree.leaves())
      CHECK(std::count(nodes.begin(), nodes.end(), leaf) >= 5);
  }
  CHECK(grown > 0);
}

TEST_CASE("swap exchanges parent and child rules") {
  Matrix x(40, 2);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = i;
    x(i, 1) = 39 - i;
  }
  const TrainingDesign design(x);
  Tree t;
  const auto [l, r] = t.split(Tree::root(), SplitRule{0, 19.0});
  t.split(l, SplitRule{1, 29.0});
  RngStream rng(1);
  ProposalOptions opts;
  opts.min_leaf = 1;
  const auto s = propose_move(t, MoveKind::kSwap, design, rng, opts);
  REQUIRE(s.has_value());
  CHECK(s->tree.rule(Tree::root()) == SplitRule{1, 29.0});
  CHECK(s->tree.rule(l) == SplitRule{0, 19.0});
  CHECK(s->log_q_ratio == 0.0);
  (void)r;

  // after the swap the inner rule 30 is not a candidate among rows <= 2
  Tree u;
  const auto [ul, ur] = u.split(Tree::root(), SplitRule{0, 30.0});
  u.split(ul, SplitRule{0, 2.0});
  const auto bad = propose_move(u, MoveKind::kSwap, design, rng, opts);
  CHECK_FALSE(bad.has_value());
  (void)ur;
}

TEST_CASE("json round trip") {
  RngStream rng(8);
  const Tree t = random_tree(rng, 3, 2);
  LeafValues mu(t.leaf_count());
  for (double& m : mu) m = rng.normal();
  const auto [t2, mu2] = tree_from_json(tree_to_json(t, mu));
  CHECK(t2 == t);
  CHECK(mu2 == mu);
  CHECK_THROWS_AS(tree_from_json(nlohmann::json{{"covariate", 1}}), DataError);
}
