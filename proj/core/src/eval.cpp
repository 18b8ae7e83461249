#include "gridcast/eval.hpp"

#include <chrono>
#include <cmath>

namespace gridcast {

namespace {

struct Accum {
  double sse = 0.0;
  std::size_t n = 0;

  void add(double pred, double actual) {
    const double d = pred - actual;
    sse += d * d;
    ++n;
  }
  double rmse() const { return n == 0 ? 0.0 : std::sqrt(sse / static_cast<double>(n)); }
};

EvalResult finish(const Accum& model, const Accum& pers, const NormStats& stats,
                  std::size_t n_blocks, double seconds) {
  EvalResult r;
  r.rmse_kw = model.rmse();
  r.rmse_norm = r.rmse_kw / stats.std_kw;
  r.rmse_persistence_kw = pers.rmse();
  r.rmse_persistence_norm = r.rmse_persistence_kw / stats.std_kw;
  r.n_blocks = n_blocks;
  r.n_predictions = model.n;
  r.wall_seconds = seconds;
  return r;
}

EvalResult eval_one_step(const Checkpoint& ckpt, const LoadSeries& part) {
  if (ckpt.is_s2s()) {
    throw ConfigError("the one-step protocol applies to the standard architecture only");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const StackParams& model = ckpt.stack();
  const NormStats& stats = ckpt.norm;
  const std::size_t lag = ckpt.config.lag;

  Accum acc_model, acc_pers;
  std::vector<CellState> states = model.zero_states();
  for (std::size_t j = std::max<std::size_t>(lag, 1); j < part.size(); ++j) {
    const bool usable = part.valid[j] && part.valid[j - lag] && part.valid[j - 1];
    if (!usable) {
      states = model.zero_states();
      continue;
    }
    const Matrix input = build_input(normalize(part.values_kw[j - lag], stats),
                                     calendar_features(part.timestamp_at(j)));
    const double pred_kw = denormalize(one_step_predict(model, states, input), stats);
    acc_model.add(pred_kw, part.values_kw[j]);
    acc_pers.add(part.values_kw[j - 1], part.values_kw[j]);
  }
  const auto t1 = std::chrono::steady_clock::now();
  return finish(acc_model, acc_pers, stats, acc_model.n,
                std::chrono::duration<double>(t1 - t0).count());
}

}  // namespace

EvalResult evaluate(const Checkpoint& ckpt, const LoadSeries& partition,
                    const EvalOptions& opts) {
  partition.check_consistent();
  if (to_string(partition.resolution) != ckpt.config.resolution) {
    throw DataError("series resolution " + to_string(partition.resolution) +
                    " does not match the checkpoint's " + ckpt.config.resolution);
  }
  if (opts.one_step) return eval_one_step(ckpt, partition);

  const std::size_t w = opts.window;
  const std::size_t n = opts.horizon;
  if (w == 0 || n == 0) throw ConfigError("evaluation needs window >= 1 and horizon >= 1");
  const std::size_t block = w + n;
  const NormStats& stats = ckpt.norm;

  const auto t0 = std::chrono::steady_clock::now();
  Accum acc_model, acc_pers;
  std::size_t n_blocks = 0;

  std::vector<Timestamp> stamps(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) stamps[i] = partition.timestamp_at(i);

  std::size_t p = 0;
  while (p + block <= partition.size()) {
    std::size_t invalid_at = p + block;
    for (std::size_t j = p; j < p + block; ++j) {
      if (!partition.valid[j]) {
        invalid_at = j;
        break;
      }
    }
    if (invalid_at < p + block) {
      p = invalid_at + 1;
      continue;
    }

    const std::span<const double> window_kw(partition.values_kw.data() + p, w);
    const std::span<const Timestamp> window_ts(stamps.data() + p, w);
    const std::span<const Timestamp> future_ts(stamps.data() + p + w, n);

    ForecastResult fc;
    if (ckpt.is_s2s()) {
      fc = s2s_forecast(ckpt.s2s(), stats, window_kw, window_ts, future_ts);
    } else if (ckpt.config.lag > 1) {
      fc = delayed_input_forecast(ckpt.stack(), stats, ckpt.config.lag, window_kw, window_ts,
                                  future_ts);
    } else {
      fc = recursive_forecast(ckpt.stack(), stats, window_kw, window_ts, future_ts);
    }
    const double last = window_kw.back();
    for (std::size_t j = 0; j < n; ++j) {
      acc_model.add(fc.predictions_kw[j], partition.values_kw[p + w + j]);
      acc_pers.add(last, partition.values_kw[p + w + j]);
    }
    ++n_blocks;
    p += block;
  }

  const auto t1 = std::chrono::steady_clock::now();
  return finish(acc_model, acc_pers, stats, n_blocks,
                std::chrono::duration<double>(t1 - t0).count());
}

}  // namespace gridcast
