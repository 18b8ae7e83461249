#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gridcast/lstm.hpp"

namespace gridcast {

struct TrainConfig {
  std::size_t unroll_steps = 50;  // M, the fixed BPTT window length
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_threshold = 5.0;
  std::size_t epochs = 1;
  double dropout_rate = 0.0;
  bool dropout_reuse_mask = false;
  std::uint64_t seed = 0;
  std::size_t loss_report_stride = 1;
  std::size_t window_stride = 0;  // 0 means stride M (non-overlapping windows)
  bool carry_state = false;       // carry final states into the next window
                                  // (meaningful with the default stride; a
                                  // gap in the data always resets the state)

  void validate() const;
  DropoutSpec dropout() const { return DropoutSpec{dropout_rate, dropout_reuse_mask}; }
};

// One gradient tensor per parameter tensor, in param_tensors() order.
struct GradSet {
  std::vector<Matrix> tensors;

  static GradSet zeros_like(const std::vector<const Matrix*>& params);
  static GradSet zeros_like(const std::vector<Matrix*>& params);

  GradSet& operator+=(const GradSet& other);
  double norm() const { return global_l2_norm(tensors); }
};

// First/second ADAM moment accumulators plus the step counter.
struct AdamState {
  GradSet m;
  GradSet v;
  std::uint64_t t = 0;

  static AdamState init_for(const std::vector<const Matrix*>& params);
};

// Sum of squared differences, the training objective over a window.
double sse_loss(std::span<const double> y, std::span<const double> y_hat);

// Root mean square error.
double rmse(std::span<const double> y, std::span<const double> y_hat);

// Rescales every tensor by threshold/norm when the global L2 norm exceeds
// the threshold; identity otherwise.
GradSet clip_global_norm(GradSet g, double threshold);

// Bias-corrected ADAM update:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(const std::vector<Matrix*>& params, AdamState& adam, const GradSet& g,
               const TrainConfig& cfg);

// Central finite differences (L(th+h) - L(th-h)) / 2h for every coordinate
// of every tensor in `params`. The loss callable is evaluated with the
// parameters perturbed in place and must not cache them.
GradSet finite_diff_grad(const std::function<double()>& loss,
                         const std::vector<Matrix*>& params, double h);

// ---------------------------------------------------------------------------
// Window-level forward/backward, shared by the standard fit loop and the
// encoder/decoder training of the S2S model.

struct WindowForward {
  std::vector<double> y_hat;
  ForwardCache cache;
  std::vector<CellState> final_states;
};

WindowForward forward_window(const StackParams& model, std::span<const Matrix> inputs,
                             const DropoutSpec& dropout, bool training, SeededRng& rng,
                             const std::vector<CellState>* initial_states = nullptr);

// Per-layer gradients on a state boundary (d x, d o), 1 x hidden each.
struct StateGrads {
  std::vector<Matrix> d_x;
  std::vector<Matrix> d_o;

  static StateGrads zeros_like(const StackParams& model);
};

struct WindowBackward {
  GradSet grads;
  StateGrads initial_state_grads;
};

// Reverse pass over a recorded window. `d_y_hat[t]` is the loss gradient on
// the readout at step t (zero when the readout is unused at that step);
// `end_state_grads`, when given, injects gradients flowing into the final
// states from outside the window (the S2S encoder/decoder handoff).
WindowBackward backward_window(const StackParams& model, const ForwardCache& cache,
                               std::span<const double> d_y_hat,
                               const StateGrads* end_state_grads = nullptr);

// Forward + SSE loss + backward over one unrolled window. Parameters are
// shared across the unroll; gradients are the exact derivative of
// sum_t (y_t - y_hat_t)^2.
struct WindowResult {
  double loss = 0.0;
  GradSet grads;
  std::vector<CellState> final_states;
};

WindowResult bptt_window(const StackParams& model, std::span<const Matrix> inputs,
                         std::span<const double> targets, const DropoutSpec& dropout,
                         SeededRng& rng, const std::vector<CellState>* initial_states = nullptr);

// ---------------------------------------------------------------------------
// Epoch loop.

// Supervised step stream: one input row and one target per series index,
// with a validity flag. Windows containing any invalid sample are skipped.
struct TrainingSeries {
  std::vector<Matrix> inputs;
  std::vector<double> targets;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return targets.size(); }
  void check_consistent() const;
};

struct EpochEntry {
  std::size_t epoch = 0;  // 1-based
  double sse = 0.0;
  double rmse_train = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochEntry> epochs;
};

using EpochCallback = std::function<void(const EpochEntry&)>;

// Deterministic epoch loop: sequential windows (stride M by default),
// bptt_window -> clip_global_norm -> adam_step per window, zero initial
// state per window unless cfg.carry_state. rmse_train aggregates the
// training-pass predictions of the epoch.
TrainLog fit(StackParams& model, const TrainingSeries& series, const TrainConfig& cfg,
             const EpochCallback& on_epoch = nullptr);

}  // namespace gridcast
