#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/forest.hpp"
#include "georf/grf.hpp"
#include "georf/random.hpp"
#include "georf/spatial.hpp"

namespace georf {

/// Coefficient of determination: 1 - SS_res / SS_tot.
inline double r_squared(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) raise(Errc::length_mismatch, "r_squared: input lengths differ");
  if (y.size() < 2) raise(Errc::too_few_rows, "r_squared: need at least 2 observations");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot <= 0.0) raise(Errc::zero_variance, "r_squared: true values are constant");
  return 1.0 - ss_res / ss_tot;
}

/// Root mean squared error.
inline double rmse(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) raise(Errc::length_mismatch, "rmse: input lengths differ");
  if (y.empty()) raise(Errc::length_mismatch, "rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

struct FoldScore {
  double r2 = std::numeric_limits<double>::quiet_NaN(); // NaN when the fold target is constant
  double rmse = 0.0;
};

struct CvReport {
  std::vector<FoldScore> per_fold;
  double pooled_r2 = 0.0;
  double pooled_rmse = 0.0;
  std::vector<int> fold_assignment;
  std::vector<double> predictions; // out-of-fold combined prediction per row
  double wall_time_seconds = 0.0;
  int models_fitted = 0;
};

/// Seeded shuffled partition into folds of near-equal size (sizes differ by
/// at most one).
inline std::vector<int> make_fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2 || static_cast<std::size_t>(folds) > n)
    raise(Errc::too_few_rows, "fold count " + std::to_string(folds) + " outside [2, n]");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed_mix(seed, "folds"));
  rng.shuffle(order);
  std::vector<int> assignment(n);
  const std::size_t base = n / static_cast<std::size_t>(folds);
  const std::size_t extra = n % static_cast<std::size_t>(folds);
  std::size_t pos = 0;
  for (int f = 0; f < folds; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) assignment[order[pos++]] = f;
  }
  return assignment;
}

enum class ModelKind { grf, random_forest };

/// K-fold cross-validation of a GRF (or plain forest) configuration. Pooled
/// metrics are computed over the concatenated out-of-fold predictions. The
/// per-fold fit seed derives from (seed, fold); config.base_seed is ignored
/// here so that a CV run is reproducible from its own seed alone. A bandwidth
/// larger than a fold's training size is clamped to train_size - 1 for that
/// fold's fit.
inline CvReport kfold_cv(const SpatialDataset& data, const GrfConfig& config, int folds,
                         std::uint64_t seed, ModelKind kind = ModelKind::grf) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  CvReport report;
  report.fold_assignment = make_fold_assignment(n, folds, seed);
  report.predictions.assign(n, 0.0);
  report.per_fold.resize(folds);

  const int workers = resolve_workers(config.workers);

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows;
    std::vector<int> test_rows;
    train_rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      (report.fold_assignment[i] == f ? test_rows : train_rows).push_back(static_cast<int>(i));
    }

    // Restricted view of the training rows as a standalone dataset.
    std::vector<double> fts(train_rows.size() * data.feature_count());
    std::vector<double> tgt(train_rows.size());
    std::vector<Point> crd(train_rows.size());
    std::vector<std::string> ids(train_rows.size());
    for (std::size_t j = 0; j < train_rows.size(); ++j) {
      const std::size_t r = static_cast<std::size_t>(train_rows[j]);
      const auto row = data.row(r);
      std::copy(row.begin(), row.end(), fts.begin() + j * data.feature_count());
      tgt[j] = data.target(r);
      crd[j] = data.coord(r);
      ids[j] = data.row_ids()[r];
    }
    SpatialDataset train(data.feature_count(), std::move(fts), std::move(tgt), std::move(crd),
                         data.feature_names(), std::move(ids));

    GrfConfig fit_config = config;
    fit_config.base_seed = seed_mix(seed, "fit", static_cast<std::uint64_t>(f));
    fit_config.bandwidth_lambda =
        std::min(fit_config.bandwidth_lambda, static_cast<int>(train_rows.size()) - 1);

    if (kind == ModelKind::grf) {
      const TrainedGrf model = fit_grf(train, fit_config);
      parallel_for(test_rows.size(), workers, [&](std::size_t j) {
        const int r = test_rows[j];
        report.predictions[r] = predict_grf(model, data.coord(r), data.row(r)).combined;
      });
    } else {
      const RandomForest model = fit_forest(train, fit_config, fit_config.base_seed, workers);
      parallel_for(test_rows.size(), workers, [&](std::size_t j) {
        const int r = test_rows[j];
        report.predictions[r] = predict_forest(model, data.row(r));
      });
    }
    ++report.models_fitted;

    std::vector<double> fold_y;
    std::vector<double> fold_pred;
    fold_y.reserve(test_rows.size());
    for (int r : test_rows) {
      fold_y.push_back(data.target(r));
      fold_pred.push_back(report.predictions[r]);
    }
    report.per_fold[f].rmse = rmse(fold_y, fold_pred);
    double lo = fold_y[0], hi = fold_y[0];
    for (double v : fold_y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (fold_y.size() >= 2 && hi > lo) report.per_fold[f].r2 = r_squared(fold_y, fold_pred);
  }

  report.pooled_r2 = r_squared(data.targets(), report.predictions);
  report.pooled_rmse = rmse(data.targets(), report.predictions);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct SearchGrids {
  std::vector<int> ntree;
  std::vector<MtrySpec> mtry;
  std::vector<int> lambda;
  std::vector<double> alpha;
};

/// Trial-and-error defaults: ntree over (0, n/2] on a step grid, mtry from
/// {all, third, sqrt} (or every value when S <= 3), lambda between the 0.05
/// and 0.95 quantiles of the sample count, alpha in {0.25, 0.5, 0.75}.
inline SearchGrids default_search_grids(const SpatialDataset& data, int ntree_step = 20,
                                        int lambda_step = 5) {
  SearchGrids g;
  const int n = static_cast<int>(data.size());
  const int S = static_cast<int>(data.feature_count());
  for (int t = ntree_step; t <= n / 2; t += ntree_step) g.ntree.push_back(t);
  if (g.ntree.empty()) g.ntree.push_back(std::max(1, n / 2));
  if (S <= 3) {
    for (int m = 1; m <= S; ++m) g.mtry.push_back(MtrySpec::fixed(m));
  } else {
    g.mtry = {MtrySpec::all(), MtrySpec::one_third(), MtrySpec::sqrt()};
  }
  const auto [lo, hi] = default_isa_bounds(data.size());
  for (int l = lo; l <= hi; l += lambda_step) g.lambda.push_back(l);
  if (g.lambda.empty()) g.lambda.push_back(lo);
  g.alpha = {0.25, 0.5, 0.75};
  return g;
}

struct TuneCandidate {
  GrfConfig config;
  double pooled_rmse = 0.0;
  double pooled_r2 = 0.0;
};

struct TuneReport {
  std::string method; // "grid" or "isa"
  GrfConfig chosen;
  int candidates_evaluated = 0;
  long grf_fits_performed = 0;
  double wall_time_seconds = 0.0;
  std::vector<TuneCandidate> leaderboard;
};

namespace detail {

/// Lower RMSE wins; ties prefer smaller ntree, then smaller lambda.
inline bool tune_candidate_better(const TuneCandidate& a, const TuneCandidate& b) {
  if (a.pooled_rmse != b.pooled_rmse) return a.pooled_rmse < b.pooled_rmse;
  if (a.config.ntree != b.config.ntree) return a.config.ntree < b.config.ntree;
  return a.config.bandwidth_lambda < b.config.bandwidth_lambda;
}

} // namespace detail

/// Exhaustive cross-validated search over the Cartesian product of the four
/// hyperparameter grids. Every candidate is evaluated with the same fold
/// partition; the cost in GRF fits is folds * |product|.
inline TuneReport grid_search(const SpatialDataset& data, const SearchGrids& grids, int folds,
                              std::uint64_t seed, const GrfConfig& base = {}) {
  if (grids.ntree.empty() || grids.mtry.empty() || grids.lambda.empty() || grids.alpha.empty())
    raise(Errc::empty_grid, "grid_search: all four grids must be non-empty");
  const auto start = std::chrono::steady_clock::now();

  TuneReport report;
  report.method = "grid";
  for (int ntree : grids.ntree) {
    for (const MtrySpec& mtry : grids.mtry) {
      for (int lambda : grids.lambda) {
        for (double alpha : grids.alpha) {
          GrfConfig candidate = base;
          candidate.ntree = ntree;
          candidate.mtry = mtry;
          candidate.bandwidth_lambda = lambda;
          candidate.local_weight_alpha = alpha;
          const CvReport cv = kfold_cv(data, candidate, folds, seed);
          report.grf_fits_performed += cv.models_fitted;
          report.leaderboard.push_back({candidate, cv.pooled_rmse, cv.pooled_r2});
          ++report.candidates_evaluated;
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < report.leaderboard.size(); ++c) {
    if (detail::tune_candidate_better(report.leaderboard[c], report.leaderboard[best])) best = c;
  }
  report.chosen = report.leaderboard[best].config;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct ForestGrids {
  std::vector<int> ntree;
  std::vector<MtrySpec> mtry;
};

/// Autocorrelation-driven tuning: bandwidth and local weight come from the
/// ISA scan (no GRF fits spent on them); only ntree and mtry are tuned by
/// cross-validation.
inline TuneReport isa_tune(const SpatialDataset& data, const ForestGrids& grids, int folds,
                           std::uint64_t seed, const GrfConfig& base = {}, int k_step = 1,
                           double significance = 0.05) {
  if (grids.ntree.empty() || grids.mtry.empty())
    raise(Errc::empty_grid, "isa_tune: ntree and mtry grids must be non-empty");
  const auto start = std::chrono::steady_clock::now();

  const auto [k_lo, k_hi] = default_isa_bounds(data.size());
  const IsaScanResult scan =
      isa_scan(data, k_lo, k_hi, k_step, significance, resolve_workers(base.workers));

  TuneReport report;
  report.method = "isa";
  for (int ntree : grids.ntree) {
    for (const MtrySpec& mtry : grids.mtry) {
      GrfConfig candidate = base;
      candidate.ntree = ntree;
      candidate.mtry = mtry;
      candidate.bandwidth_lambda = scan.selected_lambda;
      candidate.local_weight_alpha = scan.selected_alpha;
      candidate.enable_i1 = true;
      const CvReport cv = kfold_cv(data, candidate, folds, seed);
      report.grf_fits_performed += cv.models_fitted;
      report.leaderboard.push_back({candidate, cv.pooled_rmse, cv.pooled_r2});
      ++report.candidates_evaluated;
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < report.leaderboard.size(); ++c) {
    if (detail::tune_candidate_better(report.leaderboard[c], report.leaderboard[best])) best = c;
  }
  report.chosen = report.leaderboard[best].config;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct ExperimentRow {
  std::string variant;
  GrfConfig config;
  bool uses_bandwidth = true; // false for the plain-forest baseline
  double pooled_r2 = 0.0;
  double pooled_rmse = 0.0;
};

/// The three-experiment design over one dataset: a plain-forest baseline, the
/// grid-tuned GRF, each improvement applied individually, and the
/// improvements stacked. Returns one row per model variant.
inline std::vector<ExperimentRow> run_experiment_suite(const SpatialDataset& data,
                                                       const SearchGrids& grids, int folds,
                                                       std::uint64_t seed,
                                                       const GrfConfig& base = {}) {
  const TuneReport grid = grid_search(data, grids, folds, seed, base);
  const TuneReport isa = isa_tune(data, {grids.ntree, grids.mtry}, folds, seed, base);

  std::vector<ExperimentRow> rows;
  const auto evaluate = [&](std::string variant, GrfConfig config, ModelKind kind,
                            bool uses_bandwidth) {
    const CvReport cv = kfold_cv(data, config, folds, seed, kind);
    rows.push_back({std::move(variant), config, uses_bandwidth, cv.pooled_r2, cv.pooled_rmse});
  };

  GrfConfig rf = grid.chosen;
  rf.local_weight_alpha = 0.0;
  evaluate("RF", rf, ModelKind::random_forest, false);
  evaluate("GRF", grid.chosen, ModelKind::grf, true);

  GrfConfig with_i1 = isa.chosen;
  evaluate("GRF+I1", with_i1, ModelKind::grf, true);

  GrfConfig with_i2 = grid.chosen;
  with_i2.enable_i2 = true;
  evaluate("GRF+I2", with_i2, ModelKind::grf, true);

  GrfConfig with_i3 = grid.chosen;
  with_i3.enable_i3 = true;
  evaluate("GRF+I3", with_i3, ModelKind::grf, true);

  GrfConfig with_i1_i2 = isa.chosen;
  with_i1_i2.enable_i2 = true;
  evaluate("GRF+I1+I2", with_i1_i2, ModelKind::grf, true);

  GrfConfig all = isa.chosen;
  all.enable_i2 = true;
  all.enable_i3 = true;
  evaluate("GRF+I1+I2+I3", all, ModelKind::grf, true);

  return rows;
}

} // namespace georf
