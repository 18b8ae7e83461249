// gridcast command-line harness: resample, train, forecast, eval, gradcheck.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridcast/checkpoint.hpp"
#include "gridcast/eval.hpp"
#include "gridcast/gradcheck.hpp"
#include "gridcast/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridcast;

namespace {

bool g_quiet = false;

void say(const std::string& line) {
  if (!g_quiet) std::cout << line << '\n';
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed for " + path);
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

LoadSeries load_for_config(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset path given (config key 'dataset')");
  LoadSeries s = load_series_auto(cfg.dataset, cfg.resolution_enum(), cfg.min_valid_minutes);
  if (cfg.forward_fill) s = forward_fill(std::move(s));
  return s;
}

LoadSeries truncate_fraction(const LoadSeries& s, double fraction) {
  if (fraction >= 1.0) return s;
  const auto keep = static_cast<std::size_t>(std::llround(fraction * s.size()));
  LoadSeries t = s;
  t.values_kw.resize(std::max<std::size_t>(keep, 2));
  t.valid.resize(t.values_kw.size());
  return t;
}

void write_train_log(const std::string& path, const RunConfig& cfg,
                     const std::vector<EpochEntry>& entries, std::size_t pretrain_epochs) {
  std::ostringstream out;
  out << "# gridcast training log\n";
  std::ostringstream cfg_text;
  write_run_config(cfg, cfg_text);
  std::istringstream cfg_lines(cfg_text.str());
  std::string line;
  while (std::getline(cfg_lines, line)) out << "# " << line << '\n';
  if (pretrain_epochs > 0) {
    out << "# epochs 1.." << pretrain_epochs << " pre-train the encoder\n";
  }
  out << "epoch,sse,rmse_train,seconds\n";
  for (const EpochEntry& e : entries) {
    out << e.epoch << ',' << fmt17(e.sse) << ',' << fmt17(e.rmse_train) << ',' << fmt6(e.seconds)
        << '\n';
  }
  write_text(path, out.str());
}

// --------------------------------------------------------------------------
// resample

int cmd_resample(const std::string& data_path, const std::string& out_dir,
                 std::size_t min_valid_minutes) {
  ensure_out_dir(out_dir);
  ParsedDataset parsed = parse_dataset(data_path);
  LoadSeries minutes = to_minute_series(std::move(parsed.records));
  LoadSeries hours = resample_hourly(minutes, min_valid_minutes);

  const std::string csv_path = (fs::path(out_dir) / "hourly.csv").string();
  write_series_csv(hours, csv_path);

  json report{
      {"rows_read", parsed.report.data_rows},
      {"records", parsed.report.records},
      {"missing_power", parsed.report.missing_power},
      {"malformed_rows", parsed.report.malformed_rows},
      {"minute_slots", minutes.size()},
      {"minute_valid", minutes.valid_count()},
      {"hours_emitted", hours.size()},
      {"hours_valid", hours.valid_count()},
  };
  write_json((fs::path(out_dir) / "resample_report.json").string(), report);

  say("rows read:        " + std::to_string(parsed.report.data_rows));
  say("records:          " + std::to_string(parsed.report.records));
  say("missing power:    " + std::to_string(parsed.report.missing_power));
  say("malformed rows:   " + std::to_string(parsed.report.malformed_rows));
  say("hours emitted:    " + std::to_string(hours.size()) + " (" +
      std::to_string(hours.valid_count()) + " valid)");
  say("wrote " + csv_path);
  return 0;
}

// --------------------------------------------------------------------------
// train

struct BestTest {
  double rmse_norm = std::numeric_limits<double>::infinity();
  std::size_t epoch = 0;
};

int cmd_train(const RunConfig& cfg) {
  ensure_out_dir(cfg.out);
  LoadSeries series = load_for_config(cfg);
  auto [train_part, test_part] = split(series, SplitSpec::first_three_years(series));
  LoadSeries train_used = truncate_fraction(train_part, cfg.train_fraction);

  const NormStats stats = fit_norm(train_used);
  say("train: " + std::to_string(train_used.size()) + " samples (" +
      std::to_string(train_used.valid_count()) + " valid), test: " +
      std::to_string(test_part.size()) + "; norm mean=" + fmt6(stats.mean_kw) +
      " std=" + fmt6(stats.std_kw));

  Checkpoint ckpt = init_checkpoint(cfg, stats);
  const std::string ckpt_path = (fs::path(cfg.out) / "model.ckpt").string();

  const EvalOptions test_opts{cfg.window, cfg.horizon, false};
  BestTest best;
  double last_test_rmse = std::numeric_limits<double>::quiet_NaN();
  std::vector<EpochEntry> all_epochs;
  std::size_t epoch_offset = 0;
  bool track_test = true;
  Checkpoint last_good = ckpt;

  auto on_epoch = [&](const EpochEntry& e) {
    EpochEntry shifted = e;
    shifted.epoch += epoch_offset;
    all_epochs.push_back(shifted);
    if (!std::isfinite(e.sse)) {
      save_checkpoint(last_good, ckpt_path);
      throw NumericError("non-finite training loss at epoch " + std::to_string(shifted.epoch) +
                         "; last good checkpoint kept at " + ckpt_path);
    }
    std::string line = "epoch " + std::to_string(shifted.epoch) + "  sse=" + fmt6(e.sse) +
                       "  rmse_train=" + fmt6(e.rmse_train);
    if (track_test) {
      const EvalResult r = evaluate(ckpt, test_part, test_opts);
      last_test_rmse = r.rmse_norm;
      if (r.rmse_norm < best.rmse_norm) {
        best.rmse_norm = r.rmse_norm;
        best.epoch = shifted.epoch;
      }
      line += "  rmse_test=" + fmt6(r.rmse_norm);
    }
    line += "  (" + fmt6(e.seconds) + "s)";
    if (shifted.epoch % std::max<std::size_t>(cfg.loss_report_stride, 1) == 0) say(line);
    last_good = ckpt;
  };

  const auto t0 = std::chrono::steady_clock::now();
  std::size_t pretrain_epochs = 0;
  if (cfg.architecture == "s2s") {
    pretrain_epochs = static_cast<std::size_t>(
        std::llround(cfg.pretrain_fraction * static_cast<double>(cfg.epochs)));
    TrainConfig pre_cfg = cfg.train_config();
    pre_cfg.epochs = pretrain_epochs;
    TrainConfig joint_cfg = cfg.train_config();
    joint_cfg.epochs = cfg.epochs - pretrain_epochs;

    track_test = false;  // the forecast path is the joint-phase product
    if (pretrain_epochs > 0) {
      pretrain_encoder(ckpt.s2s(), train_used, stats, pre_cfg, on_epoch);
    }
    epoch_offset = pretrain_epochs;
    track_test = true;
    joint_train(ckpt.s2s(), train_used, stats, joint_cfg, cfg.window, cfg.horizon,
                /*freeze_encoder=*/false, on_epoch);
  } else {
    TrainConfig fit_cfg = cfg.train_config();
    const TrainingSeries sup = build_supervised(train_used, stats, cfg.lag);
    fit(ckpt.stack(), sup, fit_cfg, on_epoch);
  }
  const auto t1 = std::chrono::steady_clock::now();

  save_checkpoint(ckpt, ckpt_path);
  write_train_log((fs::path(cfg.out) / "train_log.csv").string(), cfg, all_epochs,
                  pretrain_epochs);

  const double rmse_train_final = all_epochs.empty() ? 0.0 : all_epochs.back().rmse_train;
  json metrics{
      {"rmse_train_final", rmse_train_final},
      {"rmse_test_final", last_test_rmse},
      {"rmse_test_best", best.rmse_norm},
      {"rmse_test_best_epoch", best.epoch},
      {"epochs", cfg.epochs},
      {"wall_seconds", std::chrono::duration<double>(t1 - t0).count()},
  };
  write_json((fs::path(cfg.out) / "metrics.json").string(), metrics);

  say("final rmse_train=" + fmt6(rmse_train_final) + "  rmse_test=" + fmt6(last_test_rmse) +
      "  best rmse_test=" + fmt6(best.rmse_norm) + " (epoch " + std::to_string(best.epoch) +
      ")");
  say("wrote " + ckpt_path);
  return 0;
}

// --------------------------------------------------------------------------
// forecast

int cmd_forecast(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& from_str, std::optional<std::size_t> window_opt,
                 std::optional<std::size_t> horizon_opt, std::string mode_str,
                 const std::string& out_dir, bool svg) {
  ensure_out_dir(out_dir);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  LoadSeries series = load_series_auto(data_path, ckpt.config.resolution_enum(),
                                       ckpt.config.min_valid_minutes);

  const std::size_t window = window_opt.value_or(ckpt.config.window);
  const std::size_t horizon = horizon_opt.value_or(ckpt.config.horizon);
  if (window == 0 || horizon == 0) throw ConfigError("window and horizon must be >= 1");
  if (mode_str.empty()) mode_str = ckpt.is_s2s() ? "s2s" : "recursive";
  const ForecastMode mode = forecast_mode_from_string(mode_str);
  if ((mode == ForecastMode::s2s) != ckpt.is_s2s()) {
    throw ConfigError("mode '" + mode_str + "' does not match the checkpoint architecture '" +
                      ckpt.config.architecture + "'");
  }

  const std::size_t from = series.index_of(parse_iso8601(from_str));
  if (from < window) {
    throw DataError("window of " + std::to_string(window) + " steps extends past the series " +
                    "start (first forecast step at index " + std::to_string(from) + ")");
  }
  for (std::size_t j = from - window; j < from; ++j) {
    if (!series.valid[j]) {
      throw DataError("warmup sample at " + iso8601(series.timestamp_at(j)) + " is invalid");
    }
  }

  std::vector<Timestamp> stamps;
  stamps.reserve(window + horizon);
  for (std::size_t j = from - window; j < from + horizon; ++j) {
    stamps.push_back(series.start + static_cast<std::int64_t>(j) *
                                        step_seconds(series.resolution));
  }
  const std::span<const double> warmup_kw(series.values_kw.data() + (from - window), window);
  const std::span<const Timestamp> warmup_ts(stamps.data(), window);
  const std::span<const Timestamp> future_ts(stamps.data() + window, horizon);

  ForecastResult fc;
  switch (mode) {
    case ForecastMode::s2s:
      fc = s2s_forecast(ckpt.s2s(), ckpt.norm, warmup_kw, warmup_ts, future_ts);
      break;
    case ForecastMode::recursive:
      fc = recursive_forecast(ckpt.stack(), ckpt.norm, warmup_kw, warmup_ts, future_ts);
      break;
    case ForecastMode::delayed:
      fc = delayed_input_forecast(ckpt.stack(), ckpt.norm, ckpt.config.lag, warmup_kw,
                                  warmup_ts, future_ts);
      break;
    case ForecastMode::one_step: {
      // Feed actual loads throughout; every horizon step is one-step-ahead.
      if (from + horizon > series.size()) {
        throw DataError("one_step mode needs actual loads over the whole horizon");
      }
      std::vector<CellState> states = ckpt.stack().zero_states();
      auto step = [&](const Matrix& input) {
        return one_step_predict(ckpt.stack(), states, input);
      };
      std::vector<double> all_kw(series.values_kw.begin() + (from - window),
                                 series.values_kw.begin() + (from + horizon));
      for (std::size_t j = window; j < all_kw.size(); ++j) {
        if (!series.valid[from - window + j]) {
          throw DataError("one_step mode needs valid actuals over the horizon");
        }
      }
      fc.mode = ForecastMode::one_step;
      fc.timestamps.assign(future_ts.begin(), future_ts.end());
      for (std::size_t p = 1; p < window + horizon; ++p) {
        const Matrix input = build_input(normalize(all_kw[p - 1], ckpt.norm),
                                         calendar_features(stamps[p]));
        const double y = denormalize(step(input), ckpt.norm);
        if (p >= window) fc.predictions_kw.push_back(y);
      }
      break;
    }
  }

  std::ostringstream csv;
  csv << "timestamp,actual,predicted\n";
  for (std::size_t j = 0; j < fc.horizon(); ++j) {
    const std::size_t idx = from + j;
    csv << iso8601(fc.timestamps[j]) << ',';
    if (idx < series.size() && series.valid[idx]) csv << fmt17(series.values_kw[idx]);
    csv << ',' << fmt17(fc.predictions_kw[j]) << '\n';
  }
  const std::string csv_path = (fs::path(out_dir) / "forecast.csv").string();
  write_text(csv_path, csv.str());
  say("wrote " + csv_path);

  if (svg) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    SvgSeries actual{"actual", "#1f77b4", {}};
    SvgSeries predicted{"predicted", "#d62728", {}};
    for (std::size_t j = 0; j < window + horizon; ++j) {
      const std::size_t idx = from - window + j;
      actual.values.push_back(idx < series.size() && series.valid[idx] ? series.values_kw[idx]
                                                                       : nan);
      predicted.values.push_back(j < window ? nan : fc.predictions_kw[j - window]);
    }
    const std::string svg_path = (fs::path(out_dir) / "forecast.svg").string();
    write_svg_plot(svg_path,
                   "forecast (" + to_string(fc.mode) + ", window " + std::to_string(window) +
                       ", horizon " + std::to_string(horizon) + ")",
                   {actual, predicted});
    say("wrote " + svg_path);
  }
  return 0;
}

// --------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& partition, const std::string& protocol,
             std::optional<std::size_t> window_opt, std::optional<std::size_t> horizon_opt,
             const std::string& out_dir) {
  ensure_out_dir(out_dir);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  LoadSeries series = load_series_auto(data_path, ckpt.config.resolution_enum(),
                                       ckpt.config.min_valid_minutes);

  LoadSeries part;
  if (partition == "all") {
    part = std::move(series);
  } else {
    auto [train_part, test_part] = split(series, SplitSpec::first_three_years(series));
    if (partition == "train") part = std::move(train_part);
    else if (partition == "test") part = std::move(test_part);
    else throw ConfigError("unknown partition '" + partition + "' (train | test | all)");
  }

  EvalOptions opts;
  opts.window = window_opt.value_or(ckpt.config.window);
  opts.horizon = horizon_opt.value_or(ckpt.config.horizon);
  if (protocol == "one_step") opts.one_step = true;
  else if (protocol != "blocks") throw ConfigError("unknown protocol '" + protocol +
                                                   "' (blocks | one_step)");

  const EvalResult r = evaluate(ckpt, part, opts);
  json metrics{
      {"rmse_norm", r.rmse_norm},
      {"rmse_kw", r.rmse_kw},
      {"rmse_persistence", r.rmse_persistence_norm},
      {"n_blocks", r.n_blocks},
      {"wall_seconds", r.wall_seconds},
  };
  write_json((fs::path(out_dir) / "metrics.json").string(), metrics);
  std::cout << metrics.dump(2) << '\n';
  return 0;
}

// --------------------------------------------------------------------------
// gradcheck

int cmd_gradcheck(std::size_t layers, std::size_t units, std::size_t steps,
                  const std::string& variant, std::uint64_t seed, bool with_s2s,
                  bool corrupt_backward) {
  if (units > 16 || steps > 10 || layers > 4) {
    throw ConfigError("gradcheck is restricted to layers <= 4, units <= 16, steps <= 10");
  }
  std::vector<CellVariant> variants;
  if (variant == "both") {
    variants = {CellVariant::standard, CellVariant::tanh_update};
  } else {
    variants = {cell_variant_from_string(variant)};
  }

  constexpr double kTol = 1e-5;
  bool ok = true;
  for (CellVariant v : variants) {
    const GradCheckReport report =
        gradcheck_stack(layers, units, steps, v, seed, 1e-5, corrupt_backward);
    std::cout << "# stack variant=" << to_string(v) << " layers=" << layers
              << " units=" << units << " steps=" << steps << '\n';
    for (const auto& t : report.tensors) {
      std::cout << "  " << t.name << "  max_rel_err=" << fmt17(t.max_rel_err)
                << (t.max_rel_err < kTol ? "" : "  FAIL") << '\n';
    }
    std::cout << "worst=" << fmt17(report.worst) << "  "
              << (report.pass(kTol) ? "PASS" : "FAIL") << '\n';
    ok = ok && report.pass(kTol);

    if (with_s2s) {
      const GradCheckReport s2s_report =
          gradcheck_s2s(layers, units, std::max<std::size_t>(steps / 2, 1),
                        std::max<std::size_t>(steps - steps / 2, 1), v, seed);
      std::cout << "# s2s handoff variant=" << to_string(v) << '\n';
      std::cout << "worst=" << fmt17(s2s_report.worst) << "  "
                << (s2s_report.pass(kTol) ? "PASS" : "FAIL") << '\n';
      ok = ok && s2s_report.pass(kTol);
    }
  }
  if (!ok) throw NumericError("gradient check failed (max relative error >= 1e-5)");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridcast: LSTM building-load training and forecasting"};
  app.require_subcommand(1);

  std::string data_path, out_dir = ".", config_path, ckpt_path;
  std::uint64_t seed = 0;
  bool seed_given = false;

  app.add_flag("--quiet", g_quiet, "suppress progress output");

  auto* c_resample = app.add_subcommand("resample", "average the minute benchmark file to hours");
  std::size_t min_valid_minutes = 1;
  c_resample->add_option("--data", data_path, "benchmark dataset file")->required();
  c_resample->add_option("--out", out_dir, "output directory");
  c_resample->add_option("--min-valid-minutes", min_valid_minutes,
                         "valid minutes required per hour (default 1)");

  auto* c_train = app.add_subcommand("train", "train a model from a config file");
  c_train->add_option("--config", config_path, "run config file")->required();
  c_train->add_option("--data", data_path, "dataset path (overrides config)");
  c_train->add_option("--out", out_dir, "output directory (overrides config)");
  c_train->add_option("--seed", seed, "seed (overrides config)")
      ->each([&](const std::string&) { seed_given = true; });

  auto* c_forecast = app.add_subcommand("forecast", "forecast from a checkpoint");
  std::string from_str, mode_str;
  std::size_t window_arg = 0, horizon_arg = 0;
  bool svg = false;
  c_forecast->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  c_forecast->add_option("--data", data_path, "series file")->required();
  c_forecast->add_option("--from", from_str, "ISO-8601 timestamp of the first forecast step")
      ->required();
  c_forecast->add_option("--window", window_arg, "warmup/encoding window length");
  c_forecast->add_option("--horizon", horizon_arg, "forecast steps");
  c_forecast->add_option("--mode", mode_str, "one_step | recursive | delayed | s2s");
  c_forecast->add_option("--out", out_dir, "output directory");
  c_forecast->add_flag("--svg", svg, "also write an SVG plot");

  auto* c_eval = app.add_subcommand("eval", "sweep forecasts over a partition");
  std::string partition = "test", protocol = "blocks";
  c_eval->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  c_eval->add_option("--data", data_path, "series file")->required();
  c_eval->add_option("--partition", partition, "train | test | all (default test)");
  c_eval->add_option("--protocol", protocol, "blocks | one_step (default blocks)");
  c_eval->add_option("--window", window_arg, "block window length");
  c_eval->add_option("--horizon", horizon_arg, "block horizon length");
  c_eval->add_option("--out", out_dir, "output directory");

  auto* c_gradcheck = app.add_subcommand("gradcheck", "verify BPTT against finite differences");
  std::size_t gc_layers = 1, gc_units = 4, gc_steps = 5;
  std::string gc_variant = "both";
  std::uint64_t gc_seed = 1;
  bool gc_s2s = false, gc_corrupt = false;
  c_gradcheck->add_option("--layers", gc_layers, "stack depth (<= 4)");
  c_gradcheck->add_option("--units", gc_units, "hidden units (<= 16)");
  c_gradcheck->add_option("--steps", gc_steps, "unroll steps (<= 10)");
  c_gradcheck->add_option("--variant", gc_variant, "standard | tanh_update | both");
  c_gradcheck->add_option("--seed", gc_seed, "seed");
  c_gradcheck->add_flag("--s2s", gc_s2s, "also check the encoder->decoder handoff");
  c_gradcheck->add_flag("--corrupt-backward", gc_corrupt, "")->group("");  // test hook

  try {
    app.parse(argc, argv);

    if (c_resample->parsed()) return cmd_resample(data_path, out_dir, min_valid_minutes);

    if (c_train->parsed()) {
      RunConfig cfg = parse_run_config(config_path);
      if (!data_path.empty()) cfg.dataset = data_path;
      if (out_dir != ".") cfg.out = out_dir;
      if (seed_given) cfg.seed = seed;
      cfg.validate();
      return cmd_train(cfg);
    }

    if (c_forecast->parsed()) {
      return cmd_forecast(ckpt_path, data_path, from_str,
                          window_arg ? std::optional<std::size_t>(window_arg) : std::nullopt,
                          horizon_arg ? std::optional<std::size_t>(horizon_arg) : std::nullopt,
                          mode_str, out_dir, svg);
    }

    if (c_eval->parsed()) {
      return cmd_eval(ckpt_path, data_path, partition, protocol,
                      window_arg ? std::optional<std::size_t>(window_arg) : std::nullopt,
                      horizon_arg ? std::optional<std::size_t>(horizon_arg) : std::nullopt,
                      out_dir);
    }

    if (c_gradcheck->parsed()) {
      return cmd_gradcheck(gc_layers, gc_units, gc_steps, gc_variant, gc_seed, gc_s2s,
                           gc_corrupt);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
