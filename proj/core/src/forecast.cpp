#include "gridcast/forecast.hpp"

namespace gridcast {

std::string to_string(ForecastMode m) {
  switch (m) {
    case ForecastMode::one_step: return "one_step";
    case ForecastMode::recursive: return "recursive";
    case ForecastMode::delayed: return "delayed";
    case ForecastMode::s2s: return "s2s";
  }
  return "recursive";
}

ForecastMode forecast_mode_from_string(const std::string& name) {
  if (name == "one_step") return ForecastMode::one_step;
  if (name == "recursive") return ForecastMode::recursive;
  if (name == "delayed") return ForecastMode::delayed;
  if (name == "s2s") return ForecastMode::s2s;
  throw ConfigError("unknown forecast mode '" + name +
                    "' (one_step | recursive | delayed | s2s)");
}

Matrix build_input(double y_value, const CalendarFeatures& c) {
  if (!std::isfinite(y_value)) {
    throw NumericError("non-finite load value in model input");
  }
  c.validate();
  return Matrix::row({y_value, c.day_scaled(), c.day_week_scaled(), c.hour_scaled()});
}

TrainingSeries build_supervised(const LoadSeries& series, const NormStats& stats,
                                std::size_t lag) {
  series.check_consistent();
  if (lag == 0) throw ConfigError("input lag must be >= 1");

  TrainingSeries out;
  const std::size_t n = series.size();
  out.inputs.reserve(n);
  out.targets.assign(n, 0.0);
  out.valid.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j < lag || !series.valid[j] || !series.valid[j - lag]) {
      out.inputs.emplace_back(1, 4);
      continue;
    }
    const double y_prev = normalize(series.values_kw[j - lag], stats);
    out.inputs.push_back(build_input(y_prev, calendar_features(series.timestamp_at(j))));
    out.targets[j] = normalize(series.values_kw[j], stats);
    out.valid[j] = 1;
  }
  return out;
}

double one_step_predict(const StackParams& model, std::vector<CellState>& states,
                        const Matrix& input) {
  if (model.input_dim() != input.cols()) {
    throw ShapeError("model expects 1x" + std::to_string(model.input_dim()) +
                     " inputs, got " + input.shape());
  }
  static const DropoutSpec kNoDropout{0.0, false};
  SeededRng unused(0);  // never consumed in evaluation mode
  return stack_step(input, states, model, kNoDropout, /*training=*/false, unused).y_hat;
}

ForecastResult forecast_with(const std::function<double(const Matrix&)>& step,
                             std::span<const double> warmup_kw,
                             std::span<const Timestamp> warmup_ts,
                             std::span<const Timestamp> future_ts, const NormStats& stats,
                             std::size_t lag, ForecastMode mode) {
  const std::size_t w = warmup_kw.size();
  if (w == 0) throw DataError("forecast warmup window is empty");
  if (warmup_ts.size() != w) {
    throw DataError("warmup has " + std::to_string(w) + " values but " +
                    std::to_string(warmup_ts.size()) + " timestamps");
  }
  if (future_ts.empty()) throw DataError("forecast horizon is empty");
  if (lag == 0) throw ConfigError("input lag must be >= 1");
  if (w < lag) {
    throw DataError("warmup of " + std::to_string(w) + " steps is shorter than input lag " +
                    std::to_string(lag));
  }

  // Normalized y per absolute position: warmup actuals, then predictions.
  std::vector<double> y_norm;
  y_norm.reserve(w + future_ts.size());
  for (double kw : warmup_kw) y_norm.push_back(normalize(kw, stats));

  // Warmup: build state on actual loads. Predictions here are discarded.
  for (std::size_t t = lag; t < w; ++t) {
    step(build_input(y_norm[t - lag], calendar_features(warmup_ts[t])));
  }

  ForecastResult out;
  out.mode = mode;
  out.timestamps.assign(future_ts.begin(), future_ts.end());
  out.predictions_kw.reserve(future_ts.size());
  for (std::size_t j = 0; j < future_ts.size(); ++j) {
    const std::size_t p = w + j;
    const double y_hat = step(build_input(y_norm[p - lag], calendar_features(future_ts[j])));
    y_norm.push_back(y_hat);
    out.predictions_kw.push_back(denormalize(y_hat, stats));
  }
  return out;
}

namespace {

ForecastResult model_forecast(const StackParams& model, const NormStats& stats,
                              std::size_t lag, std::span<const double> warmup_kw,
                              std::span<const Timestamp> warmup_ts,
                              std::span<const Timestamp> future_ts, ForecastMode mode) {
  std::vector<CellState> states = model.zero_states();
  auto step = [&](const Matrix& input) { return one_step_predict(model, states, input); };
  return forecast_with(step, warmup_kw, warmup_ts, future_ts, stats, lag, mode);
}

}  // namespace

ForecastResult recursive_forecast(const StackParams& model, const NormStats& stats,
                                  std::span<const double> warmup_kw,
                                  std::span<const Timestamp> warmup_ts,
                                  std::span<const Timestamp> future_ts) {
  return model_forecast(model, stats, 1, warmup_kw, warmup_ts, future_ts,
                        ForecastMode::recursive);
}

ForecastResult delayed_input_forecast(const StackParams& model, const NormStats& stats,
                                      std::size_t lag, std::span<const double> warmup_kw,
                                      std::span<const Timestamp> warmup_ts,
                                      std::span<const Timestamp> future_ts) {
  return model_forecast(model, stats, lag, warmup_kw, warmup_ts, future_ts,
                        ForecastMode::delayed);
}

ForecastResult persistence_baseline(std::span<const double> window_kw,
                                    std::span<const Timestamp> future_ts) {
  if (window_kw.empty()) throw DataError("persistence baseline needs a non-empty window");
  ForecastResult out;
  out.mode = ForecastMode::recursive;
  out.timestamps.assign(future_ts.begin(), future_ts.end());
  out.predictions_kw.assign(future_ts.size(), window_kw.back());
  return out;
}

}  // namespace gridcast
