#pragma once

#include "gridcast/checkpoint.hpp"

namespace gridcast {

struct EvalOptions {
  std::size_t window = 60;
  std::size_t horizon = 60;
  bool one_step = false;  // one-step protocol instead of block sweeps
};

struct EvalResult {
  double rmse_norm = 0.0;
  double rmse_kw = 0.0;
  double rmse_persistence_norm = 0.0;
  double rmse_persistence_kw = 0.0;
  std::size_t n_blocks = 0;  // blocks swept, or predictions in one-step mode
  std::size_t n_predictions = 0;
  double wall_seconds = 0.0;
};

// Block protocol: non-overlapping (window, horizon) blocks in data order;
// a block is used only when every sample in it is valid. The model warms up
// (or encodes) on the window and forecasts the horizon; reported RMSE is
// rmse() over the concatenated horizon outputs. The persistence baseline
// repeats the last window value over the same horizons.
//
// One-step protocol (standard architecture only): every sample whose
// required inputs are valid is predicted from actual inputs with state
// carried along the sweep; state resets at gaps. Persistence is the
// previous observed value.
EvalResult evaluate(const Checkpoint& ckpt, const LoadSeries& partition,
                    const EvalOptions& opts);

}  // namespace gridcast
