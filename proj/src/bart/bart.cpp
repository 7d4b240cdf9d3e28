#include "flexlp/bart.hpp"

#include "flexlp/distributions.hpp"
#include "flexlp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flexlp {

void BartConfig::validate() const {
  if (trees < 1) throw ParameterError("bart: trees must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("bart: alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ParameterError("bart: beta must be >= 0");
  if (!(kappa > 0.0)) throw ParameterError("bart: kappa must be > 0");
  if (!(nu > 0.0)) throw ParameterError("bart: nu must be > 0");
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("bart: q must lie in (0, 1)");
  if (n_draws < 1) throw ParameterError("bart: n_draws must be >= 1");
  if (n_burn < 0) throw ParameterError("bart: n_burn must be >= 0");
  if (thin < 1) throw ParameterError("bart: thin must be >= 1");
  const MoveProbabilities& m = move_probs;
  if (m.grow < 0 || m.prune < 0 || m.change < 0 || m.swap < 0) throw ParameterError("bart: negative move probability");
  if (std::fabs(m.grow + m.prune + m.change + m.swap - 1.0) > 1e-9)
    throw ParameterError("bart: move probabilities must sum to 1");
}

nlohmann::json to_json(const BartConfig& c) {
  return {{"trees", c.trees},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"kappa", c.kappa},
          {"nu", c.nu},
          {"q", c.q},
          {"n_draws", c.n_draws},
          {"n_burn", c.n_burn},
          {"thin", c.thin},
          {"move_probs", {c.move_probs.grow, c.move_probs.prune, c.move_probs.change, c.move_probs.swap}},
          {"min_leaf", c.min_leaf},
          {"max_depth", c.max_depth}};
}

BartConfig bart_config_from_json(const nlohmann::json& j) {
  BartConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "trees") c.trees = value.get<int>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "kappa") c.kappa = value.get<double>();
      else if (key == "nu") c.nu = value.get<double>();
      else if (key == "q") c.q = value.get<double>();
      else if (key == "n_draws") c.n_draws = value.get<int>();
      else if (key == "n_burn") c.n_burn = value.get<int>();
      else if (key == "thin") c.thin = value.get<int>();
      else if (key == "min_leaf") c.min_leaf = value.get<std::size_t>();
      else if (key == "max_depth") c.max_depth = value.get<int>();
      else if (key == "move_probs") {
        const auto v = value.get<std::vector<double>>();
        if (v.size() != 4) throw ConfigError("bart: move_probs needs 4 entries (grow, prune, change, swap)");
        c.move_probs = MoveProbabilities{v[0], v[1], v[2], v[3]};
      } else {
        throw ConfigError("bart: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bart: ") + e.what());
  }
  c.validate();
  return c;
}

std::pair<std::vector<double>, ScaleTransform> scale_response(std::span<const double> y) {
  if (y.empty()) throw DataError("scale_response: empty response");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  ScaleTransform t{*lo, *hi - *lo};
  if (!std::isfinite(t.min) || !std::isfinite(t.range)) throw DataError("scale_response: non-finite response");
  if (!(t.range > 0.0)) throw DataError("scale_response: degenerate (constant) response");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = t.to_scaled(y[i]);
  return {std::move(out), t};
}

double leaf_prior_sd(int trees, double kappa) {
  if (trees < 1 || !(kappa > 0.0)) throw ParameterError("leaf_prior_sd: need trees >= 1 and kappa > 0");
  return 0.5 / (kappa * std::sqrt(static_cast<double>(trees)));
}

double calibrate_sigma_prior(double sigma_hat, double nu, double q) {
  if (!(sigma_hat > 0.0) || !(nu > 0.0) || !(q > 0.0 && q < 1.0))
    throw ParameterError("calibrate_sigma_prior: need sigma_hat > 0, nu > 0, q in (0, 1)");
  // P(nu lambda / X < s^2) = P(X > nu lambda / s^2) = q
  return sigma_hat * sigma_hat * chi2_quantile(1.0 - q, nu) / nu;
}

namespace {

double sample_sd(std::span<const double> y) {
  if (y.size() < 2) return 1.0;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(y.size() - 1));
}

}  // namespace

double linear_sigma_hat(const Matrix& x, std::span<const double> y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  if (static_cast<std::size_t>(n) != y.size()) throw DataError("linear_sigma_hat: row mismatch");
  if (n <= p + 1) return sample_sd(y);

  // Columns are rescaled by powers of two so that a design multiplied by 2^k
  // produces bit-identical factorizations.
  Matrix a(n, p);
  a.col(0).setOnes();
  for (Eigen::Index c = 1; c < p; ++c) {
    const double m = x.col(c - 1).cwiseAbs().maxCoeff();
    int e = 0;
    if (m > 0.0 && std::isfinite(m)) std::frexp(m, &e);
    for (Eigen::Index i = 0; i < n; ++i) a(i, c) = std::ldexp(x(i, c - 1), -e);
  }
  const Vector yv = Eigen::Map<const Vector>(y.data(), n);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Eigen::Index rank = qr.rank();
  if (n - rank <= 0) return sample_sd(y);
  const Vector b = qr.solve(yv);
  const double rss = (yv - a * b).squaredNorm();
  const double s = std::sqrt(rss / static_cast<double>(n - rank));
  return s > 0.0 ? s : sample_sd(y);
}

LeafValues draw_leaf_values(std::span<const NodeStats> leaf_stats, double sigma2, double sigma_mu, RngStream& rng) {
  if (!(sigma2 > 0.0) || !(sigma_mu > 0.0)) throw ParameterError("draw_leaf_values: sigma2, sigma_mu must be > 0");
  LeafValues out(leaf_stats.size());
  const double prior_prec = 1.0 / (sigma_mu * sigma_mu);
  for (std::size_t b = 0; b < leaf_stats.size(); ++b) {
    const double v = 1.0 / (static_cast<double>(leaf_stats[b].n) / sigma2 + prior_prec);
    const double m = v * leaf_stats[b].sum / sigma2;
    out[b] = m + std::sqrt(v) * rng.normal();
  }
  return out;
}

double draw_sigma2(std::span<const double> residuals, double nu, double lambda, RngStream& rng) {
  double ss = 0.0;
  for (double e : residuals) ss += e * e;
  const double n = static_cast<double>(residuals.size());
  return draw_scaled_inv_chi2(rng, nu + n, (nu * lambda + ss) / (nu + n));
}

double MoveCounts::acceptance_rate() const {
  const long p = std::accumulate(proposed.begin(), proposed.end(), 0L);
  const long a = std::accumulate(accepted.begin(), accepted.end(), 0L);
  return p > 0 ? static_cast<double>(a) / static_cast<double>(p) : 0.0;
}

bool mh_tree_update(Tree& tree, std::vector<Tree::NodeId>& row_nodes, std::span<const double> residuals,
                    double sigma2, const SamplerSettings& settings, detail::SplitScratch& scratch, RngStream& rng,
                    MoveCounts* counts) {
  const MoveKind move = settings.move_probs.sample(rng);
  const auto k = static_cast<std::size_t>(move);
  if (counts) ++counts->proposed[k];

  const ProposalOptions options{settings.move_probs, settings.min_leaf, settings.max_depth};
  std::optional<Proposal> proposal = detail::propose_move(tree, row_nodes, move, rng, options, scratch);
  if (!proposal) return false;

  std::vector<std::uint32_t> rows;
  detail::rows_in_subtree(tree, row_nodes, proposal->node, rows);
  std::vector<std::uint32_t> work(rows);
  detail::ScoreParams params;
  params.alpha = settings.alpha;
  params.beta = settings.beta;
  params.min_leaf = settings.min_leaf;
  params.max_depth = settings.max_depth;
  params.with_likelihood = !settings.prior_only;
  params.sigma2 = sigma2;
  params.sigma_mu = settings.sigma_mu;
  const auto current = detail::score_subtree(tree, proposal->node, work, residuals, params, scratch);
  work = rows;
  const auto candidate = detail::score_subtree(proposal->tree, proposal->node, work, residuals, params, scratch);
  if (!candidate.feasible) return false;

  const double log_ratio = candidate.log_prior + candidate.log_likelihood - current.log_prior -
                           current.log_likelihood + proposal->log_q_ratio;
  if (!(std::log(rng.uniform()) < log_ratio)) return false;

  tree = std::move(proposal->tree);
  const TrainingDesign& design = scratch.design();
  for (std::uint32_t r : rows) {
    row_nodes[r] = tree.descend(proposal->node, [&](std::size_t c) { return design.value(r, c); });
  }
  if (counts) ++counts->accepted[k];
  return true;
}

// ---------------------------------------------------------------------------
// BartSampler

BartSampler::BartSampler(const TrainingDesign& design, std::vector<double> y_scaled, SamplerSettings settings,
                         RngStream rng)
    : design_(&design),
      y_(std::move(y_scaled)),
      settings_(settings),
      rng_(std::move(rng)),
      scratch_(design),
      trees_(static_cast<std::size_t>(settings.trees)),
      leaves_(static_cast<std::size_t>(settings.trees), LeafValues{0.0}),
      row_nodes_(static_cast<std::size_t>(settings.trees), std::vector<Tree::NodeId>(design.rows(), Tree::root())),
      contribution_(static_cast<std::size_t>(settings.trees), std::vector<double>(design.rows(), 0.0)),
      fit_(design.rows(), 0.0),
      partial_(design.rows(), 0.0),
      sigma2_(settings.sigma2_init) {
  if (y_.size() != design.rows()) throw DataError("BartSampler: response length does not match design rows");
  if (settings.trees < 1) throw ParameterError("BartSampler: trees must be >= 1");
}

void BartSampler::refresh_contribution(std::size_t j) {
  const Tree& t = trees_[j];
  const LeafValues& mu = leaves_[j];
  std::vector<double>& c = contribution_[j];
  const std::vector<Tree::NodeId>& nodes = row_nodes_[j];
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double v = mu[t.leaf_position(nodes[i])];
    fit_[i] += v - c[i];
    c[i] = v;
  }
}

void BartSampler::sweep() {
  const std::size_t n = y_.size();
  if (!settings_.fix_sigma2) {
    for (std::size_t i = 0; i < n; ++i) partial_[i] = y_[i] - fit_[i];
    sigma2_ = draw_sigma2(partial_, settings_.nu, settings_.lambda, rng_);
  }
  for (std::size_t j = 0; j < trees_.size(); ++j) {
    const std::vector<double>& c = contribution_[j];
    for (std::size_t i = 0; i < n; ++i) partial_[i] = y_[i] - fit_[i] + c[i];
    mh_tree_update(trees_[j], row_nodes_[j], partial_, sigma2_, settings_, scratch_, rng_, &counts_);

    const Tree& t = trees_[j];
    stats_.assign(t.leaf_count(), NodeStats{});
    for (std::size_t i = 0; i < n; ++i) stats_[t.leaf_position(row_nodes_[j][i])].add(partial_[i]);
    leaves_[j] = draw_leaf_values(stats_, sigma2_, settings_.sigma_mu, rng_);
    refresh_contribution(j);
  }
}

std::vector<double> BartSampler::training_fit() const {
  std::vector<double> out(y_.size(), 0.0);
  for (std::size_t j = 0; j < trees_.size(); ++j)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += contribution_[j][i];
  return out;
}

// ---------------------------------------------------------------------------
// bart_fit

BartPosterior bart_fit(const DataMatrix& x, std::span<const double> y, const BartConfig& config, RngStream& rng,
                       const BartOutputs& outputs) {
  config.validate();
  if (x.rows() != y.size()) throw DataError("bart_fit: response length does not match design rows");
  if (y.size() < 10) throw DataError("bart_fit: need at least 10 observations");
  if (outputs.eval_points.rows() > 0 && static_cast<std::size_t>(outputs.eval_points.cols()) != x.cols())
    throw DataError("bart_fit: evaluation points have the wrong number of columns");
  for (std::size_t d : outputs.train_fit_draws)
    if (d >= static_cast<std::size_t>(config.n_draws)) throw ParameterError("bart_fit: training-fit draw out of range");

  BartPosterior post;
  post.config = config;
  post.columns = x.names;
  auto [ys, transform] = scale_response(y);
  post.transform = transform;
  post.sigma_hat = linear_sigma_hat(x.values, ys);
  post.lambda = calibrate_sigma_prior(post.sigma_hat, config.nu, config.q);
  post.sigma_mu = leaf_prior_sd(config.trees, config.kappa);

  SamplerSettings s;
  s.trees = config.trees;
  s.alpha = config.alpha;
  s.beta = config.beta;
  s.sigma_mu = post.sigma_mu;
  s.nu = config.nu;
  s.lambda = post.lambda;
  s.move_probs = config.move_probs;
  s.min_leaf = config.min_leaf;
  s.max_depth = config.max_depth;
  s.sigma2_init = post.sigma_hat * post.sigma_hat;

  const TrainingDesign design(x.values);
  BartSampler sampler(design, std::move(ys), s, RngStream(rng.next_u64()));

  const auto n_eval = outputs.eval_points.rows();
  const auto n_draws = static_cast<std::size_t>(config.n_draws);
  post.eval_predictions.resize(static_cast<Eigen::Index>(n_draws), n_eval);
  post.train_fits.resize(outputs.train_fit_draws.size());
  post.sigma2_draws.reserve(n_draws);
  if (outputs.keep_forests) post.draws.reserve(n_draws);
  std::vector<double> point(x.cols());
  double leaf_total = 0.0;

  const long total = config.n_burn + static_cast<long>(config.n_draws) * config.thin;
  post.diagnostics.sigma2_trace.reserve(static_cast<std::size_t>(total));
  for (long sweep = 0; sweep < total; ++sweep) {
    sampler.sweep();
    post.diagnostics.sigma2_trace.push_back(sampler.sigma2());
    if (sweep < config.n_burn || (sweep - config.n_burn + 1) % config.thin != 0) continue;

    const std::size_t d = post.sigma2_draws.size();
    post.sigma2_draws.push_back(sampler.sigma2());
    for (std::size_t j = 0; j < sampler.tree_count(); ++j) leaf_total += static_cast<double>(sampler.tree(j).leaf_count());
    if (outputs.keep_forests) {
      ForestDraw f;
      f.sigma2 = sampler.sigma2();
      for (std::size_t j = 0; j < sampler.tree_count(); ++j) {
        f.trees.push_back(sampler.tree(j));
        f.leaves.push_back(sampler.leaves(j));
      }
      post.draws.push_back(std::move(f));
    }
    for (Eigen::Index m = 0; m < n_eval; ++m) {
      for (std::size_t c = 0; c < point.size(); ++c) point[c] = outputs.eval_points(m, static_cast<Eigen::Index>(c));
      double sum = 0.0;
      for (std::size_t j = 0; j < sampler.tree_count(); ++j) sum += tree_predict(sampler.tree(j), sampler.leaves(j), point);
      post.eval_predictions(static_cast<Eigen::Index>(d), m) = transform.to_original(sum);
    }
    for (std::size_t k = 0; k < outputs.train_fit_draws.size(); ++k) {
      if (outputs.train_fit_draws[k] != d) continue;
      std::vector<double> fit = sampler.training_fit();
      for (double& v : fit) v = transform.to_original(v);
      post.train_fits[k] = std::move(fit);
    }
  }
  post.diagnostics.moves = sampler.counts();
  post.diagnostics.mean_leaves = leaf_total / (static_cast<double>(n_draws) * config.trees);
  return post;
}

double bart_predict(const BartPosterior& posterior, std::span<const double> x, std::size_t draw_index) {
  if (draw_index >= posterior.draws.size()) throw DataError("bart_predict: draw index out of range (forests kept?)");
  if (x.size() != posterior.columns.size()) throw DataError("bart_predict: covariate vector has the wrong length");
  const ForestDraw& f = posterior.draws[draw_index];
  double sum = 0.0;
  for (std::size_t j = 0; j < f.trees.size(); ++j) sum += tree_predict(f.trees[j], f.leaves[j], x);
  return posterior.transform.to_original(sum);
}

double bart_predict(const BartPosterior& posterior, const std::vector<std::string>& names, std::span<const double> x,
                    std::size_t draw_index) {
  if (names.size() != x.size()) throw DataError("bart_predict: names and values differ in length");
  std::vector<double> ordered(posterior.columns.size());
  std::vector<bool> found(posterior.columns.size(), false);
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto it = std::find(posterior.columns.begin(), posterior.columns.end(), names[k]);
    if (it == posterior.columns.end()) throw DataError("bart_predict: unknown covariate '" + names[k] + "'");
    const auto c = static_cast<std::size_t>(it - posterior.columns.begin());
    ordered[c] = x[k];
    found[c] = true;
  }
  for (std::size_t c = 0; c < found.size(); ++c)
    if (!found[c]) throw DataError("bart_predict: missing covariate '" + posterior.columns[c] + "'");
  return bart_predict(posterior, ordered, draw_index);
}

nlohmann::json posterior_to_json(const BartPosterior& p) {
  nlohmann::json draws = nlohmann::json::array();
  for (const ForestDraw& f : p.draws) {
    nlohmann::json trees = nlohmann::json::array();
    for (std::size_t j = 0; j < f.trees.size(); ++j) trees.push_back(tree_to_json(f.trees[j], f.leaves[j]));
    draws.push_back({{"sigma2", f.sigma2}, {"trees", std::move(trees)}});
  }
  return {{"format", "flexlp-bart-posterior"},
          {"version", 1},
          {"config", to_json(p.config)},
          {"transform", {{"min", p.transform.min}, {"range", p.transform.range}}},
          {"columns", p.columns},
          {"sigma_hat", p.sigma_hat},
          {"lambda", p.lambda},
          {"sigma_mu", p.sigma_mu},
          {"sigma2_draws", p.sigma2_draws},
          {"acceptance_rate", p.diagnostics.moves.acceptance_rate()},
          {"draws", std::move(draws)}};
}

BartPosterior posterior_from_json(const nlohmann::json& j) {
  BartPosterior p;
  try {
    if (j.at("format").get<std::string>() != "flexlp-bart-posterior") throw DataError("not a BART posterior file");
    p.config = bart_config_from_json(j.at("config"));
    p.transform.min = j.at("transform").at("min").get<double>();
    p.transform.range = j.at("transform").at("range").get<double>();
    p.columns = j.at("columns").get<std::vector<std::string>>();
    p.sigma_hat = j.at("sigma_hat").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.sigma_mu = j.at("sigma_mu").get<double>();
    p.sigma2_draws = j.at("sigma2_draws").get<std::vector<double>>();
    for (const auto& d : j.at("draws")) {
      ForestDraw f;
      f.sigma2 = d.at("sigma2").get<double>();
      for (const auto& t : d.at("trees")) {
        auto [tree, leaves] = tree_from_json(t);
        f.trees.push_back(std::move(tree));
        f.leaves.push_back(std::move(leaves));
      }
      p.draws.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed posterior JSON: ") + e.what());
  }
  return p;
}

}  // namespace flexlp
