#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "georf/csv.hpp"
#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/evaluation.hpp"
#include "georf/grf.hpp"
#include "georf/spatial.hpp"
#include "georf/version.hpp"

namespace georf {

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  raise(Errc::invalid_config, "unknown report format '" + text + "' (expected csv or json)");
}

// ---------------------------------------------------------------------------
// Config <-> JSON
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const GrfConfig& c) {
  return {
      {"ntree", c.ntree},
      {"mtry", c.mtry.to_string()},
      {"bandwidth_lambda", c.bandwidth_lambda},
      {"local_weight_alpha", c.local_weight_alpha},
      {"kernel", "bisquare"},
      {"enable_i1", c.enable_i1},
      {"enable_i2", c.enable_i2},
      {"enable_i3", c.enable_i3},
      {"base_seed", c.base_seed},
      {"min_leaf_size", c.min_leaf_size},
      {"include_anchor", c.include_anchor},
  };
}

inline GrfConfig config_from_json(const nlohmann::json& j) {
  GrfConfig c;
  c.ntree = j.at("ntree").get<int>();
  c.mtry = MtrySpec::parse(j.at("mtry").get<std::string>());
  c.bandwidth_lambda = j.at("bandwidth_lambda").get<int>();
  c.local_weight_alpha = j.at("local_weight_alpha").get<double>();
  c.enable_i1 = j.at("enable_i1").get<bool>();
  c.enable_i2 = j.at("enable_i2").get<bool>();
  c.enable_i3 = j.at("enable_i3").get<bool>();
  c.base_seed = j.at("base_seed").get<std::uint64_t>();
  c.min_leaf_size = j.at("min_leaf_size").get<int>();
  c.include_anchor = j.at("include_anchor").get<bool>();
  return c;
}

// ---------------------------------------------------------------------------
// Model persistence: versioned, self-describing JSON. Doubles are serialized
// in shortest round-trip form, so reloaded models predict bit-identically.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json tree_to_json(const RegressionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : tree.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  }
  return {{"nodes", std::move(nodes)}, {"importance_raw", tree.importance_raw}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j, std::size_t n_features) {
  RegressionTree tree;
  tree.n_features = n_features;
  tree.importance_raw = j.at("importance_raw").get<std::vector<double>>();
  for (const auto& nj : j.at("nodes")) {
    TreeNode node;
    node.feature = nj.at(0).get<int>();
    node.threshold = nj.at(1).get<double>();
    node.left = nj.at(2).get<int>();
    node.right = nj.at(3).get<int>();
    node.value = nj.at(4).get<double>();
    tree.nodes.push_back(node);
  }
  return tree;
}

inline nlohmann::json forest_to_json(const RandomForest& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& t : forest.trees) trees.push_back(tree_to_json(t));
  return {{"ntree", forest.ntree},
          {"mtry", forest.mtry},
          {"n_features", forest.n_features},
          {"importance", forest.importance},
          {"trees", std::move(trees)}};
}

inline RandomForest forest_from_json(const nlohmann::json& j) {
  RandomForest forest;
  forest.ntree = j.at("ntree").get<int>();
  forest.mtry = j.at("mtry").get<int>();
  forest.n_features = j.at("n_features").get<std::size_t>();
  forest.importance = j.at("importance").get<std::vector<double>>();
  for (const auto& tj : j.at("trees")) forest.trees.push_back(tree_from_json(tj, forest.n_features));
  return forest;
}

} // namespace detail

inline nlohmann::json model_to_json(const TrainedGrf& model) {
  if (!model.fitted()) raise(Errc::model_not_fitted, "model_to_json: model is not fitted");
  nlohmann::json locals = nlohmann::json::array();
  for (std::size_t i = 0; i < model.local_models.size(); ++i) {
    const LocalModel& lm = model.local_models[i];
    locals.push_back({{"anchor", {lm.anchor.x, lm.anchor.y}},
                      {"sample_size", model.training_stats.local_sample_sizes[i]},
                      {"forest", detail::forest_to_json(lm.forest)}});
  }
  return {{"format", "georf-model"},
          {"format_version", kModelFormatVersion},
          {"library_version", kVersion},
          {"config", config_to_json(model.config)},
          {"feature_names", model.feature_names},
          {"global_forest", detail::forest_to_json(model.global_forest)},
          {"local_models", std::move(locals)},
          {"expanded_count", model.training_stats.expanded_count}};
}

inline TrainedGrf model_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format").get<std::string>() != "georf-model")
    raise(Errc::io_error, "not a georf model file");
  if (j.at("format_version").get<int>() != kModelFormatVersion)
    raise(Errc::io_error, "unsupported model format version");
  TrainedGrf model;
  model.config = config_from_json(j.at("config"));
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  model.global_forest = detail::forest_from_json(j.at("global_forest"));
  std::vector<Point> anchors;
  for (const auto& lj : j.at("local_models")) {
    LocalModel lm;
    lm.anchor = {lj.at("anchor").at(0).get<double>(), lj.at("anchor").at(1).get<double>()};
    lm.forest = detail::forest_from_json(lj.at("forest"));
    lm.local_importance = lm.forest.importance;
    anchors.push_back(lm.anchor);
    model.training_stats.local_sample_sizes.push_back(lj.at("sample_size").get<int>());
    model.local_models.push_back(std::move(lm));
  }
  model.training_stats.expanded_count = j.at("expanded_count").get<int>();
  model.anchor_index.emplace(std::move(anchors));
  return model;
}

inline void save_model(const std::string& path, const TrainedGrf& model) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  out << model_to_json(model).dump(1) << '\n';
  if (!out) raise(Errc::io_error, "failed writing " + path);
}

inline TrainedGrf load_model(const std::string& path) {
  if (!std::filesystem::exists(path)) raise(Errc::file_not_found, "no such file: " + path);
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_error, std::string("cannot parse model file: ") + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Importance export
// ---------------------------------------------------------------------------

/// CSV: header x,y,<features...>; one leading global row (empty coordinates)
/// then one row per anchor. JSON: a feature collection of anchor points whose
/// properties carry the importance vector, plus the global vector at the top
/// level.
inline void export_importance(const ImportanceTable& table, const std::string& path,
                              ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::vector<std::string> header = {"x", "y"};
    for (const auto& f : table.feature_names) header.push_back(f);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.local.size() + 1);
    std::vector<std::string> global_row = {"", ""};
    for (double v : table.global) global_row.push_back(format_double(v));
    rows.push_back(std::move(global_row));
    for (std::size_t i = 0; i < table.local.size(); ++i) {
      std::vector<std::string> row = {format_double(table.anchors[i].x),
                                      format_double(table.anchors[i].y)};
      for (double v : table.local[i]) row.push_back(format_double(v));
      rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
    return;
  }

  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < table.local.size(); ++i) {
    nlohmann::json props;
    for (std::size_t f = 0; f < table.feature_names.size(); ++f)
      props[table.feature_names[f]] = table.local[i][f];
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {table.anchors[i].x, table.anchors[i].y}}}},
                        {"properties", std::move(props)}});
  }
  nlohmann::json global;
  for (std::size_t f = 0; f < table.feature_names.size(); ++f)
    global[table.feature_names[f]] = table.global[f];
  const nlohmann::json doc = {{"type", "FeatureCollection"},
                              {"global_importance", std::move(global)},
                              {"features", std::move(features)}};
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  out << doc.dump(1) << '\n';
  if (!out) raise(Errc::io_error, "failed writing " + path);
}

// ---------------------------------------------------------------------------
// Report writers. Wall-clock durations never enter file bodies, so reruns
// with the same seed produce byte-identical files.
// ---------------------------------------------------------------------------

inline nlohmann::json cv_report_to_json(const CvReport& report) {
  nlohmann::json per_fold = nlohmann::json::array();
  for (const FoldScore& s : report.per_fold) {
    nlohmann::json entry;
    entry["rmse"] = s.rmse;
    if (std::isfinite(s.r2)) {
      entry["r2"] = s.r2;
    } else {
      entry["r2"] = nullptr;
    }
    per_fold.push_back(std::move(entry));
  }
  return {{"pooled_r2", report.pooled_r2},
          {"pooled_rmse", report.pooled_rmse},
          {"per_fold", std::move(per_fold)},
          {"fold_assignment", report.fold_assignment},
          {"models_fitted", report.models_fitted}};
}

inline nlohmann::json tune_report_to_json(const TuneReport& report) {
  nlohmann::json leaderboard = nlohmann::json::array();
  for (const TuneCandidate& c : report.leaderboard) {
    leaderboard.push_back({{"config", config_to_json(c.config)},
                           {"pooled_rmse", c.pooled_rmse},
                           {"pooled_r2", c.pooled_r2}});
  }
  return {{"method", report.method},
          {"chosen", config_to_json(report.chosen)},
          {"candidates_evaluated", report.candidates_evaluated},
          {"grf_fits_performed", report.grf_fits_performed},
          {"leaderboard", std::move(leaderboard)}};
}

inline nlohmann::json isa_result_to_json(const IsaScanResult& scan) {
  nlohmann::json results = nlohmann::json::array();
  for (const MoranResult& r : scan.results) {
    results.push_back({{"k", r.k},
                       {"moran_i", r.moran_i},
                       {"expected_i", r.expected_i},
                       {"z_score", r.z_score},
                       {"p_value", r.p_value}});
  }
  return {{"results", std::move(results)},
          {"selected_lambda", scan.selected_lambda},
          {"selected_alpha", scan.selected_alpha}};
}

inline void write_json_report(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  out << doc.dump(1) << '\n';
  if (!out) raise(Errc::io_error, "failed writing " + path);
}

inline void write_isa_csv(const std::string& path, const IsaScanResult& scan) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(scan.results.size());
  for (const MoranResult& r : scan.results) {
    rows.push_back({std::to_string(r.k), format_double(r.moran_i), format_double(r.expected_i),
                    format_double(r.z_score), format_double(r.p_value)});
  }
  write_csv(path, {"k", "moran_i", "expected_i", "z_score", "p_value"}, rows);
}

} // namespace georf
