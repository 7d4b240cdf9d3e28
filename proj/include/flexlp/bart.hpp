#pragma once

#include "flexlp/linalg.hpp"
#include "flexlp/rng.hpp"
#include "flexlp/tree.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flexlp {

struct BartConfig {
  int trees = 250;  // J
  double alpha = 0.95;
  double beta = 2.0;
  double kappa = 2.0;
  double nu = 3.0;
  double q = 0.9;
  int n_draws = 2000;
  int n_burn = 1000;
  int thin = 1;
  MoveProbabilities move_probs;
  std::size_t min_leaf = 5;
  int max_depth = -1;

  /// Throws ParameterError on an invalid combination.
  void validate() const;
};

nlohmann::json to_json(const BartConfig& config);
BartConfig bart_config_from_json(const nlohmann::json& j);

/// scaled = (y - min) / range - 0.5, so training responses span [-0.5, 0.5].
struct ScaleTransform {
  double min = 0.0;
  double range = 1.0;

  double slope() const { return 1.0 / range; }
  double to_scaled(double y) const { return (y - min) / range - 0.5; }
  double to_original(double s) const { return (s + 0.5) * range + min; }
};

std::pair<std::vector<double>, ScaleTransform> scale_response(std::span<const double> y);

/// 0.5 / (kappa sqrt(J)); a standard deviation.
double leaf_prior_sd(int trees, double kappa);

/// lambda such that P(sigma^2 < sigma_hat^2) = q under Scaled-Inv-chi2(nu, lambda).
double calibrate_sigma_prior(double sigma_hat, double nu, double q);

/// Residual standard deviation of an OLS fit of y on [1, X]; falls back to the
/// standard deviation of y when there are too few rows for the regression.
double linear_sigma_hat(const Matrix& x, std::span<const double> y);

/// Conjugate leaf draws given the residuals routed to each leaf.
LeafValues draw_leaf_values(std::span<const NodeStats> leaf_stats, double sigma2, double sigma_mu, RngStream& rng);

/// sigma^2 | e ~ Scaled-Inv-chi2(nu + n, (nu lambda + sum e^2) / (nu + n)).
double draw_sigma2(std::span<const double> residuals, double nu, double lambda, RngStream& rng);

/// Hyperparameters of one backfitting chain, in scaled-response units.
struct SamplerSettings {
  int trees = 1;
  double alpha = 0.95;
  double beta = 2.0;
  double sigma_mu = 0.25;
  double nu = 3.0;
  double lambda = 1.0;
  MoveProbabilities move_probs;
  std::size_t min_leaf = 5;
  int max_depth = -1;
  double sigma2_init = 1.0;
  bool fix_sigma2 = false;
  bool prior_only = false;  // drop the likelihood from the tree moves
};

struct MoveCounts {
  std::array<long, 4> proposed{};
  std::array<long, 4> accepted{};

  double acceptance_rate() const;
};

/// One tree's Metropolis-Hastings structure step against partial residuals.
/// `row_nodes` caches the terminal node of each row and is updated on acceptance.
/// Returns true when the proposal was accepted.
bool mh_tree_update(Tree& tree, std::vector<Tree::NodeId>& row_nodes, std::span<const double> residuals,
                    double sigma2, const SamplerSettings& settings, detail::SplitScratch& scratch, RngStream& rng,
                    MoveCounts* counts = nullptr);

/// Backfitting sampler over J trees on scaled responses.
class BartSampler {
 public:
  BartSampler(const TrainingDesign& design, std::vector<double> y_scaled, SamplerSettings settings, RngStream rng);

  /// sigma^2 draw, then an MH step and a leaf redraw for every tree.
  void sweep();

  std::size_t tree_count() const { return trees_.size(); }
  const Tree& tree(std::size_t j) const { return trees_[j]; }
  const LeafValues& leaves(std::size_t j) const { return leaves_[j]; }
  double sigma2() const { return sigma2_; }
  const MoveCounts& counts() const { return counts_; }
  /// Sum-of-trees fit at each training row, recomputed from the leaves.
  std::vector<double> training_fit() const;

 private:
  void refresh_contribution(std::size_t j);

  const TrainingDesign* design_;
  std::vector<double> y_;
  SamplerSettings settings_;
  RngStream rng_;
  detail::SplitScratch scratch_;
  std::vector<Tree> trees_;
  std::vector<LeafValues> leaves_;
  std::vector<std::vector<Tree::NodeId>> row_nodes_;
  std::vector<std::vector<double>> contribution_;  // per tree, per row
  std::vector<double> fit_;
  std::vector<double> partial_;
  std::vector<NodeStats> stats_;
  double sigma2_;
  MoveCounts counts_;
};

struct ForestDraw {
  std::vector<Tree> trees;
  std::vector<LeafValues> leaves;
  double sigma2 = 0.0;  // scaled units
};

struct BartDiagnostics {
  MoveCounts moves;
  std::vector<double> sigma2_trace;  // every sweep, scaled units
  double mean_leaves = 0.0;          // average leaves per tree over retained draws
};

/// What bart_fit keeps besides the summary fields.
struct BartOutputs {
  bool keep_forests = true;
  /// Rows at which every retained draw is evaluated (original units).
  Matrix eval_points;
  /// Retained-draw indices whose training-row fit is stored.
  std::vector<std::size_t> train_fit_draws;
};

struct BartPosterior {
  BartConfig config;
  ScaleTransform transform;
  std::vector<std::string> columns;
  double sigma_hat = 0.0;  // scaled units
  double lambda = 0.0;
  double sigma_mu = 0.0;
  std::vector<ForestDraw> draws;
  Matrix eval_predictions;              // retained draws x eval points, original units
  std::vector<std::vector<double>> train_fits;  // aligned with BartOutputs::train_fit_draws
  std::vector<double> sigma2_draws;     // retained draws, scaled units
  BartDiagnostics diagnostics;

  std::size_t draw_count() const { return sigma2_draws.size(); }
};

BartPosterior bart_fit(const DataMatrix& x, std::span<const double> y, const BartConfig& config, RngStream& rng,
                       const BartOutputs& outputs = {});

/// Inverse-scaled sum of tree predictions under retained draw `draw_index`.
double bart_predict(const BartPosterior& posterior, std::span<const double> x, std::size_t draw_index);
/// Same, with x given by column name; throws DataError on an unknown or missing column.
double bart_predict(const BartPosterior& posterior, const std::vector<std::string>& names, std::span<const double> x,
                    std::size_t draw_index);

nlohmann::json posterior_to_json(const BartPosterior& posterior);
BartPosterior posterior_from_json(const nlohmann::json& j);

}  // namespace flexlp
