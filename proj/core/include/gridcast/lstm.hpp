#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gridcast/matrix.hpp"

namespace gridcast {

// Which output equation the cell uses:
//   standard:    o_t = o_g . tanh(x_t)   (conventional LSTM)
//   tanh_update: o_t = o_g . tanh(u)     (output gate reads the update
//                                         signal instead of the state)
// Both share the gate and state equations
//   i_g = sigm(i_t W_ix + o_{t-1} W_im + b_i)
//   f_g = sigm(i_t W_fx + o_{t-1} W_fm + b_f)
//   o_g = sigm(i_t W_ox + o_{t-1} W_om + b_o)
//   u   = tanh(i_t W_ux + o_{t-1} W_um + b_u)
//   x_t = f_g . x_{t-1} + i_g . u
enum class CellVariant { standard, tanh_update };

std::string to_string(CellVariant v);
CellVariant cell_variant_from_string(const std::string& name);

// The twelve tensors of one cell. Inputs are 1 x input_dim rows, so the
// input weights are input_dim x hidden_dim and the recurrent weights
// hidden_dim x hidden_dim; biases are 1 x hidden_dim.
struct CellParams {
  Matrix w_ix, w_im, b_i;
  Matrix w_fx, w_fm, b_f;
  Matrix w_ox, w_om, b_o;
  Matrix w_ux, w_um, b_u;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  static CellParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  static CellParams init(std::size_t input_dim, std::size_t hidden_dim, double range,
                         SeededRng& rng);
  void validate() const;
};

// Memory state x and cell output o, both 1 x hidden.
struct CellState {
  Matrix x;
  Matrix o;

  static CellState zeros(std::size_t hidden_dim) {
    return CellState{Matrix(1, hidden_dim), Matrix(1, hidden_dim)};
  }
};

// Everything the backward pass needs about one (step, layer) evaluation.
struct CellCache {
  Matrix input;
  Matrix i_g, f_g, o_g, u;
  Matrix x_prev, o_prev;
  Matrix x, o;
};

// Gradients of the twelve cell tensors, shaped like CellParams.
struct CellGrads {
  Matrix w_ix, w_im, b_i;
  Matrix w_fx, w_fm, b_f;
  Matrix w_ox, w_om, b_o;
  Matrix w_ux, w_um, b_u;

  static CellGrads zeros(std::size_t input_dim, std::size_t hidden_dim);
};

struct CellBackward {
  CellGrads params;
  Matrix d_input;   // 1 x input_dim
  Matrix d_prev_x;  // 1 x hidden
  Matrix d_prev_o;  // 1 x hidden
};

// One cell step. Returns the new state and the cache entry for BPTT.
std::pair<CellState, CellCache> cell_forward(const Matrix& input, const CellState& prev,
                                             const CellParams& p, CellVariant v);

// Exact reverse-mode derivatives of one cached step. `grad_o` is the loss
// gradient on this step's output o_t, `grad_x_next` the gradient flowing
// back into x_t from the following step.
CellBackward cell_backward(const CellCache& cache, const Matrix& grad_o,
                           const Matrix& grad_x_next, const CellParams& p, CellVariant v);

// Inverted-dropout configuration. Masks are Bernoulli(1-rate)/(1-rate) and
// are applied to non-recurrent connections only: between stacked layers and
// before the readout. Recurrent paths are never masked.
struct DropoutSpec {
  double rate = 0.2;
  bool reuse_mask_across_steps = false;

  bool active() const { return rate > 0.0; }
  void validate() const;
};

// 1 x n inverted-dropout mask: each element 0 with probability `rate`,
// otherwise 1/(1-rate).
Matrix dropout_mask(std::size_t n, double rate, SeededRng& rng);

// A stack of cells plus the affine readout y = o_last W_y + b_y.
struct StackParams {
  std::vector<CellParams> layers;
  Matrix w_y;  // hidden x 1
  Matrix b_y;  // 1 x 1
  CellVariant variant = CellVariant::standard;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().input_dim; }
  std::size_t last_hidden_dim() const { return layers.empty() ? 0 : layers.back().hidden_dim; }
  std::vector<CellState> zero_states() const;

  static StackParams init(std::size_t input_dim, std::size_t num_layers,
                          std::size_t hidden_dim, double range, SeededRng& rng,
                          CellVariant variant = CellVariant::standard);
  static StackParams zeros(std::size_t input_dim, std::size_t num_layers,
                           std::size_t hidden_dim, CellVariant variant = CellVariant::standard);
  void validate() const;
};

// Fixed enumeration of every parameter tensor in a stack: per layer
// (w_ix, w_im, b_i, w_fx, w_fm, b_f, w_ox, w_om, b_o, w_ux, w_um, b_u),
// then w_y, b_y. All gradient/optimizer code relies on this order.
std::vector<Matrix*> param_tensors(StackParams& s);
std::vector<const Matrix*> param_tensors(const StackParams& s);
std::vector<std::string> param_names(const StackParams& s, const std::string& prefix = "");

// Per-step record for a whole stack: one CellCache per layer, the dropout
// masks applied to each layer's output on its way up (empty when not
// training or rate is zero), the masked readout input and the readout value.
struct StepCache {
  std::vector<CellCache> layers;
  std::vector<Matrix> masks;
  Matrix readout_in;
  double y_hat = 0.0;
};

// Per-window forward record consumed by BPTT.
struct ForwardCache {
  std::vector<StepCache> steps;
};

// One forward step through every layer plus the readout. When `training`
// is true and dropout.rate > 0, fresh masks are drawn from `rng` (or reused
// from `reuse_masks` when one mask set should persist across a whole
// window). In evaluation mode masks are never applied.
StepCache stack_step(const Matrix& input, std::vector<CellState>& states,
                     const StackParams& s, const DropoutSpec& dropout, bool training,
                     SeededRng& rng, const std::vector<Matrix>* reuse_masks = nullptr);

}  // namespace gridcast
