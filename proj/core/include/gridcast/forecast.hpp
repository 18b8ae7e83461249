#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gridcast/data.hpp"
#include "gridcast/lstm.hpp"
#include "gridcast/train.hpp"

namespace gridcast {

enum class ForecastMode { one_step, recursive, delayed, s2s };

std::string to_string(ForecastMode m);
ForecastMode forecast_mode_from_string(const std::string& name);

// Input row of the standard model, fixed layout
// [y_prev, day, day_week, hour] with the calendar fields scaled to [0, 1].
Matrix build_input(double y_value, const CalendarFeatures& c);

struct ForecastResult {
  std::vector<Timestamp> timestamps;
  std::vector<double> predictions_kw;
  ForecastMode mode = ForecastMode::recursive;

  std::size_t horizon() const { return predictions_kw.size(); }
};

// Supervised one-step stream for the standard model: sample at index j has
// input [norm(y_{j-lag}), calendar(j)] and target norm(y_j); it is valid
// when both series slots are. The first `lag` samples are invalid padding
// so indices line up with the series.
TrainingSeries build_supervised(const LoadSeries& series, const NormStats& stats,
                                std::size_t lag = 1);

// Readout of one stacked forward step in evaluation mode, advancing
// `states`. Returns the normalized prediction.
double one_step_predict(const StackParams& model, std::vector<CellState>& states,
                        const Matrix& input);

// Recursion engine shared by the model-backed forecasters and by tests that
// substitute a synthetic predictor: `step` consumes one input row and
// returns the normalized prediction. Warmup feeds actual (normalized)
// loads; from the first future step onward the previous prediction fills
// the y slot, delayed by `lag` steps.
ForecastResult forecast_with(const std::function<double(const Matrix&)>& step,
                             std::span<const double> warmup_kw,
                             std::span<const Timestamp> warmup_ts,
                             std::span<const Timestamp> future_ts, const NormStats& stats,
                             std::size_t lag, ForecastMode mode);

// Multi-step forecast per the recursive scheme: the prediction for step t
// feeds the input vector of step t+1.
ForecastResult recursive_forecast(const StackParams& model, const NormStats& stats,
                                  std::span<const double> warmup_kw,
                                  std::span<const Timestamp> warmup_ts,
                                  std::span<const Timestamp> future_ts);

// Same recursion with the y slot delayed by `lag` steps: the input at time
// t carries y_{t-lag}, actual while t-lag falls in the warmup and the
// prediction made for t-lag afterwards. Requires warmup length >= lag.
ForecastResult delayed_input_forecast(const StackParams& model, const NormStats& stats,
                                      std::size_t lag, std::span<const double> warmup_kw,
                                      std::span<const Timestamp> warmup_ts,
                                      std::span<const Timestamp> future_ts);

// Every future step equals the last observed value.
ForecastResult persistence_baseline(std::span<const double> window_kw,
                                    std::span<const Timestamp> future_ts);

}  // namespace gridcast
