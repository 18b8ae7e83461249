#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gridcast/forecast.hpp"

namespace gridcast {

// Encoder-decoder pair. The encoder consumes [y, day, day_week, hour] rows
// and carries a readout used only while pre-training it as a one-step
// predictor; the decoder consumes calendar-only rows and its readout emits
// the forecast. Decoder inputs never contain a load value: they are 1 x 3
// and built exclusively from CalendarFeatures.
struct S2SParams {
  StackParams encoder;
  StackParams decoder;

  static S2SParams init(std::size_t num_layers, std::size_t hidden_dim, double range,
                        SeededRng& rng, CellVariant variant = CellVariant::standard);
  void validate() const;
};

// Every parameter tensor, encoder block first then decoder block, each in
// param_tensors(StackParams) order.
std::vector<Matrix*> param_tensors(S2SParams& s);
std::vector<const Matrix*> param_tensors(const S2SParams& s);
std::vector<std::string> param_names(const S2SParams& s);

// Fixed-length summary of an input window: the final (x, o) state of every
// encoder layer, independent of the window length.
struct Encoding {
  std::vector<CellState> states;
  std::size_t window_len = 0;
};

// Calendar-only decoder input, fixed layout [day, day_week, hour] scaled.
Matrix build_decoder_input(const CalendarFeatures& c);

// Test instrumentation: when set, invoked with every decoder input built,
// together with the calendar it came from. Not for production use.
using DecoderInputProbe = std::function<void(const CalendarFeatures&, const Matrix&)>;
void set_decoder_input_probe(DecoderInputProbe probe);

// Runs the encoder over the window in evaluation mode. The encoding shape
// depends only on the model, never on the window length.
Encoding encode(const S2SParams& model, std::span<const double> window_kw,
                std::span<const Timestamp> window_ts, const NormStats& stats);

// Seeds the decoder states from the encoding and rolls it forward over the
// future calendars. Returns denormalized predictions, one per future step.
std::vector<double> decode(const S2SParams& model, const Encoding& enc,
                           std::span<const Timestamp> future_ts, const NormStats& stats);

// encode() then decode(); never reads loads beyond the window.
ForecastResult s2s_forecast(const S2SParams& model, const NormStats& stats,
                            std::span<const double> window_kw,
                            std::span<const Timestamp> window_ts,
                            std::span<const Timestamp> future_ts);

// Supervised one-step stream in the encoder's input convention: sample j
// has input [norm(y_j), calendar(j)] and target norm(y_{j+1}).
TrainingSeries build_encoder_supervised(const LoadSeries& series, const NormStats& stats);

// Phase one: trains the encoder alone as a one-step predictor with the
// standard fit loop. The decoder is untouched.
TrainLog pretrain_encoder(S2SParams& model, const LoadSeries& train, const NormStats& stats,
                          const TrainConfig& cfg, const EpochCallback& on_epoch = nullptr);

// Phase two: sliding (window_m, horizon_n) blocks in data order, advancing
// by cfg.window_stride (default: the smallest odd number >= n, so block
// phases sweep the daily cycle). The loss is the SSE over the horizon and
// its gradient flows from the decoder through the state handoff into every
// encoder parameter. With `freeze_encoder` (diagnostic), encoder gradients
// are zeroed and only the decoder learns.
TrainLog joint_train(S2SParams& model, const LoadSeries& train, const NormStats& stats,
                     const TrainConfig& cfg, std::size_t window_m, std::size_t horizon_n,
                     bool freeze_encoder = false, const EpochCallback& on_epoch = nullptr);

// One joint block: loss plus gradients for all encoder and decoder tensors.
// Exposed for gradient verification.
struct S2SBlockResult {
  double loss = 0.0;
  GradSet grads;
  std::vector<double> y_hat;
};

S2SBlockResult s2s_block_gradients(const S2SParams& model,
                                   std::span<const Matrix> encoder_inputs,
                                   std::span<const Matrix> decoder_inputs,
                                   std::span<const double> targets,
                                   const DropoutSpec& dropout, SeededRng& rng);

}  // namespace gridcast
