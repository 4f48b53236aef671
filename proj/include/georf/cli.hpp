#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "georf/csv.hpp"
#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/evaluation.hpp"
#include "georf/grf.hpp"
#include "georf/io.hpp"
#include "georf/spatial.hpp"
#include "georf/synthetic.hpp"
#include "georf/version.hpp"

namespace georf::cli {

namespace detail {

struct DataOptions {
  std::string input;
  std::vector<std::string> features;
  std::string target = "target";
  std::string x_column = "x";
  std::string y_column = "y";
  std::string id_column = "auto"; // use an "id" column when present, else row index
};

struct ConfigOptions {
  int ntree = 100;
  std::string mtry = "third";
  int bandwidth = 0;
  double local_weight = 0.5;
  std::vector<std::string> enable;
  std::uint64_t seed = 42;
  int min_leaf = 1;
  int workers = 0;
  bool exclude_anchor = false;
};

inline void add_data_options(CLI::App* sub, DataOptions& d, bool target_required) {
  sub->add_option("-i,--input", d.input, "input CSV file (header row required)")->required();
  sub->add_option("--features", d.features,
                  "feature column names; defaults to every column except target/x/y/id")
      ->delimiter(',');
  auto* target = sub->add_option("--target", d.target, "target column name");
  if (!target_required) target->description("target column name (optional for prediction inputs)");
  sub->add_option("--x", d.x_column, "x coordinate column");
  sub->add_option("--y", d.y_column, "y coordinate column");
  sub->add_option("--id", d.id_column,
                  "row id column; default uses a column named 'id' when present, else the row index");
}

inline void add_config_options(CLI::App* sub, ConfigOptions& c) {
  sub->add_option("--ntree", c.ntree, "number of trees per forest");
  sub->add_option("--mtry", c.mtry, "features tried per split: integer, all, third, or sqrt");
  sub->add_option("--bandwidth", c.bandwidth, "neighbor-count bandwidth lambda");
  sub->add_option("--local-weight", c.local_weight, "local model weight alpha in [0,1]");
  sub->add_option("--enable", c.enable, "improvements to enable: i1,i2,i3")
      ->delimiter(',')
      ->check(CLI::IsMember({"i1", "i2", "i3"}));
  sub->add_option("--seed", c.seed, "base random seed");
  sub->add_option("--min-leaf", c.min_leaf, "minimum rows per leaf");
  sub->add_option("--workers", c.workers, "worker threads (0 = all cores)")->envname("GEORF_WORKERS");
  sub->add_flag("--exclude-anchor", c.exclude_anchor,
                "leave the anchor instance out of its own local training set");
}

inline GrfConfig build_config(const ConfigOptions& c) {
  GrfConfig config;
  config.ntree = c.ntree;
  config.mtry = MtrySpec::parse(c.mtry);
  config.bandwidth_lambda = c.bandwidth;
  config.local_weight_alpha = c.local_weight;
  config.base_seed = c.seed;
  config.min_leaf_size = c.min_leaf;
  config.workers = c.workers;
  config.include_anchor = !c.exclude_anchor;
  for (const std::string& e : c.enable) {
    if (e == "i1") config.enable_i1 = true;
    if (e == "i2") config.enable_i2 = true;
    if (e == "i3") config.enable_i3 = true;
  }
  return config;
}

inline ColumnSpec build_columns(const DataOptions& d, const std::string& input_path,
                                bool with_target) {
  ColumnSpec columns;
  columns.target = with_target ? d.target : std::string{};
  columns.x = d.x_column;
  columns.y = d.y_column;
  columns.id = d.id_column;
  if (columns.id == "auto" || d.features.empty()) {
    const RawTable table = read_csv(input_path);
    if (columns.id == "auto") {
      const bool has_id = std::find(table.column_names.begin(), table.column_names.end(), "id") !=
                          table.column_names.end();
      columns.id = has_id ? "id" : "";
    }
    if (d.features.empty()) {
      for (const std::string& name : table.column_names) {
        if (name == d.target || name == d.x_column || name == d.y_column || name == columns.id)
          continue;
        columns.features.push_back(name);
      }
    }
  }
  if (!d.features.empty()) columns.features = d.features;
  return columns;
}

inline void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
}

/// Fills bandwidth/alpha from the ISA scan when i1 is enabled and the user
/// did not pin them explicitly.
inline void apply_isa_if_requested(GrfConfig& config, const SpatialDataset& data,
                                   bool bandwidth_given, bool alpha_given, int k_step,
                                   std::ostream& err) {
  if (!config.enable_i1) return;
  const auto [lo, hi] = default_isa_bounds(data.size());
  const IsaScanResult scan =
      isa_scan(data, lo, hi, k_step, 0.05, resolve_workers(config.workers));
  if (!bandwidth_given) config.bandwidth_lambda = scan.selected_lambda;
  if (!alpha_given) config.local_weight_alpha = scan.selected_alpha;
  err << "isa: selected bandwidth " << scan.selected_lambda << ", local weight "
      << format_double(scan.selected_alpha) << '\n';
}

inline std::vector<int> parse_int_list(const std::vector<std::string>& items,
                                       const std::string& what) {
  std::vector<int> out;
  for (const std::string& s : items) {
    try {
      out.push_back(std::stoi(s));
    } catch (...) {
      raise(Errc::invalid_config, "cannot parse " + what + " entry '" + s + "'");
    }
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::vector<std::string>& items,
                                             const std::string& what) {
  std::vector<double> out;
  for (const std::string& s : items) {
    try {
      out.push_back(std::stod(s));
    } catch (...) {
      raise(Errc::invalid_config, "cannot parse " + what + " entry '" + s + "'");
    }
  }
  return out;
}

inline void write_cv_csv(const std::string& path, const CvReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
    rows.push_back({std::to_string(f),
                    std::isfinite(report.per_fold[f].r2) ? format_double(report.per_fold[f].r2) : "",
                    format_double(report.per_fold[f].rmse)});
  }
  rows.push_back({"pooled", format_double(report.pooled_r2), format_double(report.pooled_rmse)});
  write_csv(path, {"fold", "r2", "rmse"}, rows);
}

inline void write_tune_csv(const std::string& path, const TuneReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const TuneCandidate& c : report.leaderboard) {
    const bool chosen = c.config.ntree == report.chosen.ntree && c.config.mtry == report.chosen.mtry &&
                        c.config.bandwidth_lambda == report.chosen.bandwidth_lambda &&
                        c.config.local_weight_alpha == report.chosen.local_weight_alpha;
    rows.push_back({std::to_string(c.config.ntree), c.config.mtry.to_string(),
                    std::to_string(c.config.bandwidth_lambda),
                    format_double(c.config.local_weight_alpha), format_double(c.pooled_rmse),
                    format_double(c.pooled_r2), chosen ? "1" : "0"});
  }
  write_csv(path, {"ntree", "mtry", "lambda", "alpha", "pooled_rmse", "pooled_r2", "chosen"}, rows);
}

} // namespace detail

/// Entry point shared by the binary and the tests. Returns the process exit
/// code: 0 success, 1 data/model errors, 2 usage errors.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"geographical random forest: spatially local ensemble regression"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  detail::DataOptions data_opts;
  detail::ConfigOptions config_opts;
  std::string output;
  std::string format = "json";
  std::string model_path;
  int folds = 10;
  int k_min = 0, k_max = 0, k_step = 1;
  double significance = 0.05;
  std::string method;
  std::vector<std::string> ntree_grid, mtry_grid, bandwidth_grid, alpha_grid;
  int ntree_step = 20, bandwidth_step = 5;
  std::string kind = "random";
  int synth_n = 200, synth_side = 10, synth_cluster = 11;
  double noise_sd = 0.6, outlier_fraction = 0.01, outlier_value = 50.0;

  auto* fit = app.add_subcommand("fit", "train a model and write it to a file");
  detail::add_data_options(fit, data_opts, true);
  detail::add_config_options(fit, config_opts);
  fit->add_option("-o,--output", output, "model output path")->required();
  fit->add_option("--k-step", k_step, "ISA scan stride when i1 is enabled");

  auto* predict = app.add_subcommand("predict", "predict rows of a CSV with a fitted model");
  detail::add_data_options(predict, data_opts, false);
  predict->add_option("-m,--model", model_path, "model file from `fit`")->required();
  predict->add_option("-o,--output", output, "predictions output path")->required();
  predict->add_option("--format", format, "csv or json");
  predict->add_option("--workers", config_opts.workers, "worker threads (0 = all cores)")
      ->envname("GEORF_WORKERS");

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation of one configuration");
  detail::add_data_options(cv, data_opts, true);
  detail::add_config_options(cv, config_opts);
  cv->add_option("--folds", folds, "number of folds");
  cv->add_option("-o,--output", output, "report output path")->required();
  cv->add_option("--format", format, "csv or json");
  cv->add_option("--k-step", k_step, "ISA scan stride when i1 is enabled");

  auto* tune = app.add_subcommand("tune", "hyperparameter search (grid or isa)");
  detail::add_data_options(tune, data_opts, true);
  detail::add_config_options(tune, config_opts);
  tune->add_option("--method", method, "grid or isa")
      ->required()
      ->check(CLI::IsMember({"grid", "isa"}));
  tune->add_option("--folds", folds, "number of folds");
  tune->add_option("--ntree-grid", ntree_grid, "explicit ntree candidates")->delimiter(',');
  tune->add_option("--mtry-grid", mtry_grid, "explicit mtry candidates")->delimiter(',');
  tune->add_option("--bandwidth-grid", bandwidth_grid, "explicit lambda candidates (grid method)")
      ->delimiter(',');
  tune->add_option("--alpha-grid", alpha_grid, "explicit alpha candidates (grid method)")
      ->delimiter(',');
  tune->add_option("--ntree-step", ntree_step, "stride of the default ntree grid");
  tune->add_option("--bandwidth-step", bandwidth_step, "stride of the default lambda grid");
  tune->add_option("--k-step", k_step, "ISA scan stride (isa method)");
  tune->add_option("-o,--output", output, "report output path")->required();
  tune->add_option("--format", format, "csv or json");

  auto* isa = app.add_subcommand("isa", "incremental spatial autocorrelation scan");
  detail::add_data_options(isa, data_opts, true);
  isa->add_option("--k-min", k_min, "smallest neighbor count (default 0.05 quantile)");
  isa->add_option("--k-max", k_max, "largest neighbor count (default 0.95 quantile)");
  isa->add_option("--k-step", k_step, "scan stride");
  isa->add_option("--significance", significance, "p-value threshold for alpha");
  isa->add_option("--workers", config_opts.workers, "worker threads (0 = all cores)")
      ->envname("GEORF_WORKERS");
  isa->add_option("-o,--output", output, "scan output path")->required();
  isa->add_option("--format", format, "csv or json");

  auto* importance = app.add_subcommand("importance", "export global and local feature importance");
  importance->add_option("-m,--model", model_path, "model file from `fit`")->required();
  importance->add_option("-o,--output", output, "table output path")->required();
  importance->add_option("--format", format, "csv or json");

  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  synth->group(""); // internal helper, hidden from the main help text
  synth->add_option("--kind", kind, "two-cluster, checkerboard, quadrant, outlier, or random")
      ->check(CLI::IsMember({"two-cluster", "checkerboard", "quadrant", "outlier", "random"}));
  synth->add_option("--n", synth_n, "row count (quadrant/outlier/random)");
  synth->add_option("--side", synth_side, "lattice side (checkerboard)");
  synth->add_option("--points-per-cluster", synth_cluster, "cluster size (two-cluster)");
  synth->add_option("--noise-sd", noise_sd, "noise level (quadrant)");
  synth->add_option("--outlier-fraction", outlier_fraction, "fraction of rows replaced");
  synth->add_option("--outlier-value", outlier_value, "value injected into outlier rows");
  synth->add_option("--seed", config_opts.seed, "generator seed");
  synth->add_option("-o,--output", output, "dataset output path")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    err << app.help();
    return 2;
  }

  try {
    const ReportFormat report_format = parse_report_format(format);

    if (fit->parsed()) {
      const ColumnSpec columns = detail::build_columns(data_opts, data_opts.input, true);
      ValidatedDataset loaded = load_csv(data_opts.input, columns);
      detail::print_warnings(loaded.warnings, err);
      GrfConfig config = detail::build_config(config_opts);
      detail::apply_isa_if_requested(config, loaded.dataset,
                                     fit->count("--bandwidth") > 0,
                                     fit->count("--local-weight") > 0, k_step, err);
      const TrainedGrf model = fit_grf(loaded.dataset, config);
      save_model(output, model);
      out << "fitted " << model.local_models.size() << " local models; wrote " << output << '\n';
      return 0;
    }

    if (predict->parsed()) {
      const TrainedGrf model = load_model(model_path);
      detail::DataOptions predict_opts = data_opts;
      predict_opts.features = model.feature_names;
      const ColumnSpec columns = detail::build_columns(predict_opts, data_opts.input, false);
      ValidatedDataset loaded = load_csv(data_opts.input, columns);
      detail::print_warnings(loaded.warnings, err);
      const SpatialDataset& data = loaded.dataset;

      std::vector<GrfPrediction> predictions(data.size());
      parallel_for(data.size(), resolve_workers(config_opts.workers), [&](std::size_t i) {
        predictions[i] = predict_grf(model, data.coord(i), data.row(i));
      });

      if (report_format == ReportFormat::csv) {
        std::vector<std::vector<std::string>> rows(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
          rows[i] = {data.row_ids()[i], format_double(data.coord(i).x), format_double(data.coord(i).y),
                     format_double(predictions[i].combined), format_double(predictions[i].local),
                     format_double(predictions[i].global)};
        }
        write_csv(output, {"id", "x", "y", "combined", "local", "global"}, rows);
      } else {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < data.size(); ++i) {
          rows.push_back({{"id", data.row_ids()[i]},
                          {"x", data.coord(i).x},
                          {"y", data.coord(i).y},
                          {"combined", predictions[i].combined},
                          {"local", predictions[i].local},
                          {"global", predictions[i].global}});
        }
        write_json_report(output, {{"predictions", std::move(rows)}});
      }
      out << "predicted " << data.size() << " rows; wrote " << output << '\n';
      return 0;
    }

    if (cv->parsed()) {
      const ColumnSpec columns = detail::build_columns(data_opts, data_opts.input, true);
      ValidatedDataset loaded = load_csv(data_opts.input, columns);
      detail::print_warnings(loaded.warnings, err);
      GrfConfig config = detail::build_config(config_opts);
      detail::apply_isa_if_requested(config, loaded.dataset,
                                     cv->count("--bandwidth") > 0,
                                     cv->count("--local-weight") > 0, k_step, err);
      const CvReport report = kfold_cv(loaded.dataset, config, folds, config.base_seed);
      if (report_format == ReportFormat::csv) {
        detail::write_cv_csv(output, report);
      } else {
        write_json_report(output, cv_report_to_json(report));
      }
      err << "cv wall time: " << report.wall_time_seconds << " s (not written to the report)\n";
      out << "pooled r2 " << format_double(report.pooled_r2) << ", pooled rmse "
          << format_double(report.pooled_rmse) << "; wrote " << output << '\n';
      return 0;
    }

    if (tune->parsed()) {
      const ColumnSpec columns = detail::build_columns(data_opts, data_opts.input, true);
      ValidatedDataset loaded = load_csv(data_opts.input, columns);
      detail::print_warnings(loaded.warnings, err);
      GrfConfig base = detail::build_config(config_opts);
      base.bandwidth_lambda = 0; // grids decide
      TuneReport report;
      const SearchGrids defaults =
          default_search_grids(loaded.dataset, ntree_step, bandwidth_step);
      std::vector<int> ntrees =
          ntree_grid.empty() ? defaults.ntree : detail::parse_int_list(ntree_grid, "--ntree-grid");
      std::vector<MtrySpec> mtries;
      if (mtry_grid.empty()) {
        mtries = defaults.mtry;
      } else {
        for (const std::string& m : mtry_grid) mtries.push_back(MtrySpec::parse(m));
      }
      if (method == "grid") {
        SearchGrids grids;
        grids.ntree = std::move(ntrees);
        grids.mtry = std::move(mtries);
        grids.lambda = bandwidth_grid.empty()
                           ? defaults.lambda
                           : detail::parse_int_list(bandwidth_grid, "--bandwidth-grid");
        grids.alpha = alpha_grid.empty() ? defaults.alpha
                                         : detail::parse_double_list(alpha_grid, "--alpha-grid");
        report = grid_search(loaded.dataset, grids, folds, base.base_seed, base);
      } else {
        report = isa_tune(loaded.dataset, {std::move(ntrees), std::move(mtries)}, folds,
                          base.base_seed, base, k_step, significance);
      }
      if (report_format == ReportFormat::csv) {
        detail::write_tune_csv(output, report);
      } else {
        write_json_report(output, tune_report_to_json(report));
      }
      err << "tune wall time: " << report.wall_time_seconds << " s (not written to the report)\n";
      out << "method " << report.method << ": " << report.grf_fits_performed << " model fits over "
          << report.candidates_evaluated << " candidates; wrote " << output << '\n';
      return 0;
    }

    if (isa->parsed()) {
      const ColumnSpec columns = detail::build_columns(data_opts, data_opts.input, true);
      ValidatedDataset loaded = load_csv(data_opts.input, columns);
      detail::print_warnings(loaded.warnings, err);
      const auto [lo, hi] = default_isa_bounds(loaded.dataset.size());
      const int use_min = isa->count("--k-min") > 0 ? k_min : lo;
      const int use_max = isa->count("--k-max") > 0 ? k_max : hi;
      const IsaScanResult scan = isa_scan(loaded.dataset, use_min, use_max, k_step, significance,
                                          resolve_workers(config_opts.workers));
      if (report_format == ReportFormat::csv) {
        write_isa_csv(output, scan);
      } else {
        write_json_report(output, isa_result_to_json(scan));
      }
      out << "selected bandwidth " << scan.selected_lambda << ", local weight "
          << format_double(scan.selected_alpha) << "; wrote " << output << '\n';
      return 0;
    }

    if (importance->parsed()) {
      const TrainedGrf model = load_model(model_path);
      export_importance(importance_table(model), output, report_format);
      out << "wrote " << output << '\n';
      return 0;
    }

    if (synth->parsed()) {
      SpatialDataset data;
      if (kind == "two-cluster") {
        data = make_two_cluster_dataset(synth_cluster, config_opts.seed);
      } else if (kind == "checkerboard") {
        data = make_checkerboard_dataset(synth_side, config_opts.seed);
      } else if (kind == "quadrant") {
        data = make_quadrant_dataset(synth_n, noise_sd, config_opts.seed);
      } else if (kind == "outlier") {
        data = make_outlier_dataset(synth_n, outlier_fraction, outlier_value, config_opts.seed);
      } else {
        data = make_random_dataset(synth_n, 3, config_opts.seed);
      }
      write_dataset_csv(output, data);
      out << "wrote " << data.size() << " rows to " << output << '\n';
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace georf::cli
