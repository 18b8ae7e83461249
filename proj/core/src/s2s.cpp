#include "gridcast/s2s.hpp"

#include <chrono>
#include <cmath>

namespace gridcast {

namespace {

DecoderInputProbe g_decoder_input_probe;

constexpr std::size_t kEncoderInputDim = 4;
constexpr std::size_t kDecoderInputDim = 3;

}  // namespace

S2SParams S2SParams::init(std::size_t num_layers, std::size_t hidden_dim, double range,
                          SeededRng& rng, CellVariant variant) {
  S2SParams s;
  s.encoder = StackParams::init(kEncoderInputDim, num_layers, hidden_dim, range, rng, variant);
  s.decoder = StackParams::init(kDecoderInputDim, num_layers, hidden_dim, range, rng, variant);
  s.validate();
  return s;
}

void S2SParams::validate() const {
  encoder.validate();
  decoder.validate();
  if (encoder.input_dim() != kEncoderInputDim) {
    throw ShapeError("encoder input dim is " + std::to_string(encoder.input_dim()) +
                     ", expected 4 (y + calendar)");
  }
  if (decoder.input_dim() != kDecoderInputDim) {
    throw ShapeError("decoder input dim is " + std::to_string(decoder.input_dim()) +
                     ", expected 3 (calendar only)");
  }
  if (encoder.layers.size() != decoder.layers.size()) {
    throw ShapeError("encoder has " + std::to_string(encoder.layers.size()) +
                     " layers but decoder has " + std::to_string(decoder.layers.size()));
  }
  for (std::size_t l = 0; l < encoder.layers.size(); ++l) {
    if (encoder.layers[l].hidden_dim != decoder.layers[l].hidden_dim) {
      throw ShapeError("layer " + std::to_string(l) + " hidden dims differ: encoder " +
                       std::to_string(encoder.layers[l].hidden_dim) + " vs decoder " +
                       std::to_string(decoder.layers[l].hidden_dim) +
                       " (state handoff needs matching shapes)");
    }
  }
  if (encoder.variant != decoder.variant) {
    throw ConfigError("encoder and decoder use different cell variants");
  }
}

std::vector<Matrix*> param_tensors(S2SParams& s) {
  std::vector<Matrix*> t = param_tensors(s.encoder);
  std::vector<Matrix*> d = param_tensors(s.decoder);
  t.insert(t.end(), d.begin(), d.end());
  return t;
}

std::vector<const Matrix*> param_tensors(const S2SParams& s) {
  auto mut = param_tensors(const_cast<S2SParams&>(s));
  return {mut.begin(), mut.end()};
}

std::vector<std::string> param_names(const S2SParams& s) {
  std::vector<std::string> n = param_names(s.encoder, "encoder.");
  std::vector<std::string> d = param_names(s.decoder, "decoder.");
  n.insert(n.end(), d.begin(), d.end());
  return n;
}

Matrix build_decoder_input(const CalendarFeatures& c) {
  c.validate();
  Matrix input = Matrix::row({c.day_scaled(), c.day_week_scaled(), c.hour_scaled()});
  if (g_decoder_input_probe) g_decoder_input_probe(c, input);
  return input;
}

void set_decoder_input_probe(DecoderInputProbe probe) {
  g_decoder_input_probe = std::move(probe);
}

Encoding encode(const S2SParams& model, std::span<const double> window_kw,
                std::span<const Timestamp> window_ts, const NormStats& stats) {
  if (window_kw.empty()) throw DataError("encoder window is empty");
  if (window_kw.size() != window_ts.size()) {
    throw DataError("encoder window has " + std::to_string(window_kw.size()) +
                    " values but " + std::to_string(window_ts.size()) + " timestamps");
  }

  std::vector<CellState> states = model.encoder.zero_states();
  static const DropoutSpec kNoDropout{0.0, false};
  SeededRng unused(0);
  for (std::size_t t = 0; t < window_kw.size(); ++t) {
    const Matrix input = build_input(normalize(window_kw[t], stats),
                                     calendar_features(window_ts[t]));
    stack_step(input, states, model.encoder, kNoDropout, /*training=*/false, unused);
  }
  return Encoding{std::move(states), window_kw.size()};
}

std::vector<double> decode(const S2SParams& model, const Encoding& enc,
                           std::span<const Timestamp> future_ts, const NormStats& stats) {
  if (future_ts.empty()) throw DataError("decoder horizon is empty (n must be >= 1)");
  if (enc.states.size() != model.decoder.layers.size()) {
    throw ShapeError("encoding has " + std::to_string(enc.states.size()) +
                     " layer states but the decoder has " +
                     std::to_string(model.decoder.layers.size()) + " layers");
  }

  std::vector<CellState> states = enc.states;
  static const DropoutSpec kNoDropout{0.0, false};
  SeededRng unused(0);
  std::vector<double> out;
  out.reserve(future_ts.size());
  for (const Timestamp& ts : future_ts) {
    const Matrix input = build_decoder_input(calendar_features(ts));
    const StepCache step =
        stack_step(input, states, model.decoder, kNoDropout, /*training=*/false, unused);
    out.push_back(denormalize(step.y_hat, stats));
  }
  return out;
}

ForecastResult s2s_forecast(const S2SParams& model, const NormStats& stats,
                            std::span<const double> window_kw,
                            std::span<const Timestamp> window_ts,
                            std::span<const Timestamp> future_ts) {
  const Encoding enc = encode(model, window_kw, window_ts, stats);
  ForecastResult out;
  out.mode = ForecastMode::s2s;
  out.timestamps.assign(future_ts.begin(), future_ts.end());
  out.predictions_kw = decode(model, enc, future_ts, stats);
  return out;
}

TrainingSeries build_encoder_supervised(const LoadSeries& series, const NormStats& stats) {
  series.check_consistent();
  TrainingSeries out;
  const std::size_t n = series.size();
  out.inputs.reserve(n);
  out.targets.assign(n, 0.0);
  out.valid.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j + 1 >= n || !series.valid[j] || !series.valid[j + 1]) {
      out.inputs.emplace_back(1, kEncoderInputDim);
      continue;
    }
    out.inputs.push_back(build_input(normalize(series.values_kw[j], stats),
                                     calendar_features(series.timestamp_at(j))));
    out.targets[j] = normalize(series.values_kw[j + 1], stats);
    out.valid[j] = 1;
  }
  return out;
}

TrainLog pretrain_encoder(S2SParams& model, const LoadSeries& train, const NormStats& stats,
                          const TrainConfig& cfg, const EpochCallback& on_epoch) {
  model.validate();
  const TrainingSeries sup = build_encoder_supervised(train, stats);
  return fit(model.encoder, sup, cfg, on_epoch);
}

S2SBlockResult s2s_block_gradients(const S2SParams& model,
                                   std::span<const Matrix> encoder_inputs,
                                   std::span<const Matrix> decoder_inputs,
                                   std::span<const double> targets,
                                   const DropoutSpec& dropout, SeededRng& rng) {
  if (decoder_inputs.size() != targets.size() || targets.empty()) {
    throw ShapeError("joint block: " + std::to_string(decoder_inputs.size()) +
                     " decoder inputs vs " + std::to_string(targets.size()) + " targets");
  }

  WindowForward enc = forward_window(model.encoder, encoder_inputs, dropout,
                                     /*training=*/true, rng);
  WindowForward dec = forward_window(model.decoder, decoder_inputs, dropout,
                                     /*training=*/true, rng, &enc.final_states);

  S2SBlockResult out;
  out.y_hat = dec.y_hat;
  std::vector<double> d_y(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double diff = dec.y_hat[t] - targets[t];
    out.loss += diff * diff;
    d_y[t] = 2.0 * diff;
  }

  WindowBackward dec_back = backward_window(model.decoder, dec.cache, d_y);
  // The decoder's initial states are the encoder's final states, so the
  // boundary gradient flows straight through the copy.
  const std::vector<double> zero_dy(encoder_inputs.size(), 0.0);
  WindowBackward enc_back = backward_window(model.encoder, enc.cache, zero_dy,
                                            &dec_back.initial_state_grads);

  out.grads.tensors = std::move(enc_back.grads.tensors);
  out.grads.tensors.insert(out.grads.tensors.end(),
                           std::make_move_iterator(dec_back.grads.tensors.begin()),
                           std::make_move_iterator(dec_back.grads.tensors.end()));
  return out;
}

TrainLog joint_train(S2SParams& model, const LoadSeries& train, const NormStats& stats,
                     const TrainConfig& cfg, std::size_t window_m, std::size_t horizon_n,
                     bool freeze_encoder, const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  train.check_consistent();
  if (window_m == 0 || horizon_n == 0) {
    throw ConfigError("joint training needs window >= 1 and horizon >= 1");
  }
  const std::size_t block = window_m + horizon_n;
  if (train.size() < block) {
    throw DataError("training series has " + std::to_string(train.size()) +
                    " samples, need at least window + horizon = " + std::to_string(block));
  }
  // Default stride: the smallest odd number >= n. Aligned strides make every
  // block start at the same phase of the daily cycle and let the decoder
  // learn block positions instead of the calendar inputs.
  const std::size_t stride = cfg.window_stride == 0 ? (horizon_n | 1) : cfg.window_stride;
  const DropoutSpec dropout = cfg.dropout();
  dropout.validate();
  const std::size_t enc_tensor_count = param_tensors(model.encoder).size();

  SeededRng rng(cfg.seed);
  auto params = param_tensors(model);
  AdamState adam = AdamState::init_for(param_tensors(std::as_const(model)));

  // Precompute inputs once; block slices reference these.
  std::vector<Matrix> enc_inputs, dec_inputs;
  std::vector<double> targets_norm;
  enc_inputs.reserve(train.size());
  dec_inputs.reserve(train.size());
  targets_norm.reserve(train.size());
  for (std::size_t j = 0; j < train.size(); ++j) {
    const CalendarFeatures cal = calendar_features(train.timestamp_at(j));
    const double y = train.valid[j] ? normalize(train.values_kw[j], stats) : 0.0;
    enc_inputs.push_back(build_input(y, cal));
    dec_inputs.push_back(build_decoder_input(cal));
    targets_norm.push_back(y);
  }

  TrainLog log;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double sse = 0.0;
    std::size_t n_targets = 0;

    std::size_t s = 0;
    while (s + block <= train.size()) {
      std::size_t invalid_at = s + block;
      for (std::size_t j = s; j < s + block; ++j) {
        if (!train.valid[j]) {
          invalid_at = j;
          break;
        }
      }
      if (invalid_at < s + block) {
        s = invalid_at + 1;
        continue;
      }

      S2SBlockResult res = s2s_block_gradients(
          model, std::span<const Matrix>(enc_inputs.data() + s, window_m),
          std::span<const Matrix>(dec_inputs.data() + s + window_m, horizon_n),
          std::span<const double>(targets_norm.data() + s + window_m, horizon_n), dropout,
          rng);
      if (freeze_encoder) {
        for (std::size_t i = 0; i < enc_tensor_count; ++i) {
          res.grads.tensors[i] *= 0.0;
        }
      }
      GradSet clipped = clip_global_norm(std::move(res.grads), cfg.clip_threshold);
      adam_step(params, adam, clipped, cfg);

      sse += res.loss;
      n_targets += horizon_n;
      s += stride;
    }

    const auto t1 = std::chrono::steady_clock::now();
    EpochEntry entry;
    entry.epoch = epoch;
    entry.sse = sse;
    entry.rmse_train = n_targets == 0 ? 0.0 : std::sqrt(sse / static_cast<double>(n_targets));
    entry.seconds = std::chrono::duration<double>(t1 - t0).count();
    log.epochs.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return log;
}

}  // namespace gridcast
