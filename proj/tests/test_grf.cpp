#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "georf/evaluation.hpp"
#include "georf/grf.hpp"
#include "georf/random.hpp"
#include "georf/synthetic.hpp"

using namespace georf;

TEST(expand_local_samples, size_law) {
  std::vector<int> d10(10), d150(150), d300(300), d40(40);
  std::iota(d10.begin(), d10.end(), 0);
  std::iota(d150.begin(), d150.end(), 0);
  std::iota(d300.begin(), d300.end(), 0);
  std::iota(d40.begin(), d40.end(), 0);

  EXPECT_EQ(expand_local_samples(d10, 100, 1).size(), 20u);   // min(200, 20)
  EXPECT_EQ(expand_local_samples(d150, 100, 1).size(), 200u); // min(200, 300)
  EXPECT_EQ(expand_local_samples(d300, 100, 1), d300);        // 300 >= 200: unchanged
  EXPECT_EQ(expand_local_samples(d40, 60, 1).size(), 80u);    // min(120, 80)
}

TEST(expand_local_samples, draws_only_from_input) {
  std::vector<int> d = {3, 8, 15};
  const auto out = expand_local_samples(d, 10, 99);
  EXPECT_EQ(out.size(), 6u);
  for (int v : out) EXPECT_TRUE(v == 3 || v == 8 || v == 15);
}

TEST(fit_grf, one_local_model_per_instance) {
  const auto data = make_random_dataset(100, 3, 5);
  GrfConfig config;
  config.ntree = 10;
  config.bandwidth_lambda = 12;
  const auto model = fit_grf(data, config);
  EXPECT_EQ(model.local_models.size(), 100u);
  EXPECT_EQ(model.training_stats.local_sample_sizes.size(), 100u);
  for (int size : model.training_stats.local_sample_sizes) EXPECT_EQ(size, 12);
  for (const auto& lm : model.local_models) {
    double total = 0.0;
    for (double v : lm.local_importance) total += v;
    EXPECT_TRUE(std::abs(total - 1.0) < 1e-9 || total == 0.0);
  }
}

TEST(fit_grf, expansion_size_law_in_training_stats) {
  const auto data = make_random_dataset(80, 2, 6);
  GrfConfig config;
  config.ntree = 60;
  config.bandwidth_lambda = 30;
  config.enable_i2 = true;
  const auto model = fit_grf(data, config);
  // |D| = 30 < 120: every local fit uses min(120, 60) = 60 samples.
  for (int size : model.training_stats.local_sample_sizes) EXPECT_EQ(size, 60);
  EXPECT_EQ(model.training_stats.expanded_count, 80);
}

TEST(fit_grf, expansion_noop_when_lambda_covers_two_ntree) {
  const auto data = make_random_dataset(60, 2, 7);
  GrfConfig config;
  config.ntree = 5;
  config.bandwidth_lambda = 20; // 20 >= 2*5: expansion never triggers
  config.base_seed = 31;

  GrfConfig with_i2 = config;
  with_i2.enable_i2 = true;
  const auto plain = fit_grf(data, config);
  const auto expanded = fit_grf(data, with_i2);
  EXPECT_EQ(expanded.training_stats.expanded_count, 0);

  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Point p{rng.next_unit(), rng.next_unit()};
    const std::vector<double> row = {rng.next_uniform(-1, 1), rng.next_uniform(-1, 1)};
    const auto a = predict_grf(plain, p, row);
    const auto b = predict_grf(expanded, p, row);
    EXPECT_EQ(a.combined, b.combined);
    EXPECT_EQ(a.local, b.local);
    EXPECT_EQ(a.global, b.global);
  }
}

TEST(fit_grf, bandwidth_too_large_rejected) {
  const auto data = make_random_dataset(20, 2, 9);
  GrfConfig config;
  config.bandwidth_lambda = 20;
  try {
    fit_grf(data, config);
    FAIL() << "expected BandwidthTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bandwidth_too_large);
  }
}

TEST(spatially_weighted_blend, single_contributor_returns_its_prediction) {
  EXPECT_DOUBLE_EQ(spatially_weighted_blend(std::vector<double>{2.5}, std::vector<double>{8.0}), 8.0);
}

TEST(spatially_weighted_blend, equal_distances_average) {
  const double blended =
      spatially_weighted_blend(std::vector<double>{1.0, 1.0}, std::vector<double>{8.0, 4.0});
  EXPECT_DOUBLE_EQ(blended, 6.0);
}

TEST(spatially_weighted_blend, weighted_mean_formula) {
  // Explicit weights: (0.75*8 + 0.25*4) / 1 = 7.
  EXPECT_DOUBLE_EQ(detail::weighted_mean(std::vector<double>{8.0, 4.0},
                                         std::vector<double>{0.75, 0.25}),
                   7.0);
}

TEST(spatially_weighted_blend, within_contributor_bounds) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.next_index(8);
    std::vector<double> distances(k);
    std::vector<double> predictions(k);
    for (std::size_t j = 0; j < k; ++j) {
      distances[j] = rng.next_uniform(0.0, 5.0);
      predictions[j] = rng.next_uniform(-100.0, 100.0);
    }
    const double blended = spatially_weighted_blend(distances, predictions);
    const double lo = *std::min_element(predictions.begin(), predictions.end());
    const double hi = *std::max_element(predictions.begin(), predictions.end());
    EXPECT_GE(blended, lo - 1e-9);
    EXPECT_LE(blended, hi + 1e-9);
  }
}

TEST(local_prediction, nearest_model_when_i3_off) {
  const auto data = make_random_dataset(40, 2, 14);
  GrfConfig config;
  config.ntree = 8;
  config.bandwidth_lambda = 6;
  const auto model = fit_grf(data, config);
  // At a training anchor the anchor's own local model answers (distance 0).
  for (std::size_t i = 0; i < 10; ++i) {
    const double expected = predict_forest(model.local_models[i].forest, data.row(i));
    EXPECT_EQ(local_prediction(model, data.coord(i), data.row(i)), expected);
  }
}

TEST(local_prediction, i3_blend_within_bounds_of_contributors) {
  const auto data = make_random_dataset(50, 2, 15);
  GrfConfig config;
  config.ntree = 8;
  config.bandwidth_lambda = 7;
  config.enable_i3 = true;
  const auto model = fit_grf(data, config);
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const Point p{rng.next_unit(), rng.next_unit()};
    const std::vector<double> row = {rng.next_uniform(-1, 1), rng.next_uniform(-1, 1)};
    const auto neighbors = model.anchor_index->query(p, 7);
    double lo = 1e300, hi = -1e300;
    for (const auto& nb : neighbors) {
      const double pred = predict_forest(model.local_models[nb.index].forest, row);
      lo = std::min(lo, pred);
      hi = std::max(hi, pred);
    }
    const double local = local_prediction(model, p, row);
    EXPECT_GE(local, lo - 1e-9);
    EXPECT_LE(local, hi + 1e-9);
  }
}

TEST(predict_grf, alpha_blending) {
  const auto data = make_random_dataset(40, 2, 18);
  GrfConfig config;
  config.ntree = 6;
  config.bandwidth_lambda = 5;

  config.local_weight_alpha = 0.0;
  const auto m0 = fit_grf(data, config);
  config.local_weight_alpha = 1.0;
  const auto m1 = fit_grf(data, config);
  config.local_weight_alpha = 0.5;
  const auto mh = fit_grf(data, config);

  Rng rng(19);
  for (int trial = 0; trial < 40; ++trial) {
    const Point p{rng.next_unit(), rng.next_unit()};
    const std::vector<double> row = {rng.next_uniform(-1, 1), rng.next_uniform(-1, 1)};
    const auto p0 = predict_grf(m0, p, row);
    EXPECT_EQ(p0.combined, p0.global);
    const auto p1 = predict_grf(m1, p, row);
    EXPECT_EQ(p1.combined, p1.local);
    const auto ph = predict_grf(mh, p, row);
    EXPECT_DOUBLE_EQ(ph.combined, 0.5 * ph.local + 0.5 * ph.global);
    EXPECT_GE(ph.combined, std::min(ph.local, ph.global) - 1e-12);
    EXPECT_LE(ph.combined, std::max(ph.local, ph.global) + 1e-12);
  }
}

TEST(predict_grf, alpha_zero_equals_plain_forest_bit_identical) {
  const auto data = make_random_dataset(120, 3, 20);
  GrfConfig config;
  config.ntree = 15;
  config.bandwidth_lambda = 10;
  config.local_weight_alpha = 0.0;
  config.base_seed = 777;
  const auto grf_model = fit_grf(data, config);
  const auto forest = fit_forest(data, config, config.base_seed, resolve_workers(config.workers));
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(predict_grf(grf_model, data.coord(i), data.row(i)).combined,
              predict_forest(forest, data.row(i)));
  }
}

TEST(fit_grf, deterministic_and_schedule_independent) {
  const auto data = make_random_dataset(70, 3, 22);
  GrfConfig config;
  config.ntree = 10;
  config.bandwidth_lambda = 9;
  config.enable_i2 = true;
  config.enable_i3 = true;

  GrfConfig serial = config;
  serial.workers = 1;
  GrfConfig threaded = config;
  threaded.workers = 4;
  const auto a = fit_grf(data, serial);
  const auto b = fit_grf(data, threaded);

  EXPECT_EQ(a.training_stats.local_sample_sizes, b.training_stats.local_sample_sizes);
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Point p{rng.next_unit(), rng.next_unit()};
    const std::vector<double> row = {rng.next_uniform(-1, 1), rng.next_uniform(-1, 1),
                                     rng.next_uniform(-1, 1)};
    const auto pa = predict_grf(a, p, row);
    const auto pb = predict_grf(b, p, row);
    EXPECT_EQ(pa.combined, pb.combined);
    EXPECT_EQ(pa.local, pb.local);
    EXPECT_EQ(pa.global, pb.global);
  }
}

TEST(fit_grf, exclude_anchor_changes_local_subset) {
  const auto data = make_random_dataset(30, 2, 25);
  GrfConfig config;
  config.ntree = 5;
  config.bandwidth_lambda = 4;
  config.include_anchor = false;
  const auto model = fit_grf(data, config);
  EXPECT_EQ(model.local_models.size(), 30u);
  for (int size : model.training_stats.local_sample_sizes) EXPECT_EQ(size, 4);
}

TEST(importance_table, shapes_and_normalization) {
  const auto data = make_random_dataset(40, 3, 26);
  GrfConfig config;
  config.ntree = 8;
  config.bandwidth_lambda = 6;
  const auto model = fit_grf(data, config);
  const auto table = importance_table(model);
  EXPECT_EQ(table.global, model.global_forest.importance);
  EXPECT_EQ(table.local.size(), 40u);
  EXPECT_EQ(table.anchors.size(), 40u);
  for (const auto& row : table.local) {
    ASSERT_EQ(row.size(), 3u);
    double total = 0.0;
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_TRUE(std::abs(total - 1.0) < 1e-9 || total == 0.0);
  }
}

// Duplicate coordinates: whole neighborhoods can sit at distance zero from
// the anchor. The kernel degenerates to uniform weights and the fit must stay
// deterministic.
TEST(fit_grf, tolerates_coincident_coordinates) {
  Rng rng(71);
  const std::size_t n = 30;
  std::vector<double> features, target;
  std::vector<Point> coords;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    coords.push_back({static_cast<double>(i / 10), 0.0}); // ten points per location
    features.push_back(rng.next_uniform(-1, 1));
    features.push_back(rng.next_uniform(-1, 1));
    target.push_back(rng.next_uniform(0, 5));
    ids.push_back(std::to_string(i));
  }
  const SpatialDataset data(2, std::move(features), std::move(target), std::move(coords),
                            {"a", "b"}, std::move(ids));
  GrfConfig config;
  config.ntree = 5;
  config.bandwidth_lambda = 6; // fits inside one coincident group
  config.enable_i3 = true;
  const auto a = fit_grf(data, config);
  const auto b = fit_grf(data, config);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pa = predict_grf(a, data.coord(i), data.row(i));
    const auto pb = predict_grf(b, data.coord(i), data.row(i));
    EXPECT_EQ(pa.combined, pb.combined);
    EXPECT_TRUE(std::isfinite(pa.combined));
  }
}

TEST(importance_table, unfitted_model_rejected) {
  TrainedGrf empty;
  EXPECT_THROW(importance_table(empty), Error);
  EXPECT_THROW(predict_grf(empty, {0, 0}, std::vector<double>{1.0}), Error);
  EXPECT_THROW(local_prediction(empty, {0, 0}, std::vector<double>{1.0}), Error);
}

// Constant target within every neighborhood: local importance all-zero.
TEST(importance_table, constant_neighborhoods_zero_importance) {
  const std::size_t n = 24;
  std::vector<double> features;
  std::vector<double> target;
  std::vector<Point> coords;
  std::vector<std::string> ids;
  Rng rng(27);
  for (std::size_t i = 0; i < n; ++i) {
    const bool east = i >= n / 2;
    coords.push_back({east ? 100.0 + rng.next_unit() : rng.next_unit(), rng.next_unit()});
    target.push_back(east ? 2.0 : -2.0); // constant within each side
    features.push_back(rng.next_uniform(-1, 1));
    features.push_back(rng.next_uniform(-1, 1));
    ids.push_back(std::to_string(i));
  }
  const SpatialDataset data(2, std::move(features), std::move(target), std::move(coords),
                            {"a", "b"}, std::move(ids));
  GrfConfig config;
  config.ntree = 5;
  config.bandwidth_lambda = 8; // stays within one side
  const auto model = fit_grf(data, config);
  const auto table = importance_table(model);
  for (const auto& row : table.local) {
    for (double v : row) EXPECT_DOUBLE_EQ(v, 0.0);
  }
}
