#include "gridcast/train.hpp"

#include <chrono>
#include <cmath>

namespace gridcast {

void TrainConfig::validate() const {
  std::vector<std::string> problems;
  if (!(learning_rate > 0.0)) problems.push_back("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) problems.push_back("beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) problems.push_back("beta2 must be in (0, 1)");
  if (!(epsilon > 0.0)) problems.push_back("epsilon must be > 0");
  if (!(clip_threshold > 0.0)) problems.push_back("clip_threshold must be > 0");
  if (unroll_steps == 0) problems.push_back("unroll_steps must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) problems.push_back("dropout must be in [0, 1)");
  if (!problems.empty()) {
    std::string msg = "invalid training config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ConfigError(msg);
  }
}

GradSet GradSet::zeros_like(const std::vector<const Matrix*>& params) {
  GradSet g;
  g.tensors.reserve(params.size());
  for (const Matrix* p : params) g.tensors.emplace_back(p->rows(), p->cols());
  return g;
}

GradSet GradSet::zeros_like(const std::vector<Matrix*>& params) {
  return zeros_like(std::vector<const Matrix*>(params.begin(), params.end()));
}

GradSet& GradSet::operator+=(const GradSet& other) {
  if (tensors.size() != other.tensors.size()) {
    throw ShapeError("gradient sets have " + std::to_string(tensors.size()) + " vs " +
                     std::to_string(other.tensors.size()) + " tensors");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i] += other.tensors[i];
  return *this;
}

AdamState AdamState::init_for(const std::vector<const Matrix*>& params) {
  AdamState s;
  s.m = GradSet::zeros_like(params);
  s.v = GradSet::zeros_like(params);
  s.t = 0;
  return s;
}

double sse_loss(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size() || y.empty()) {
    throw ShapeError("sse_loss over sequences of length " + std::to_string(y.size()) + " and " +
                     std::to_string(y_hat.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - y_hat[i];
    acc += d * d;
  }
  return acc;
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  return std::sqrt(sse_loss(y, y_hat) / static_cast<double>(y.size()));
}

GradSet clip_global_norm(GradSet g, double threshold) {
  if (!(threshold > 0.0)) {
    throw ConfigError("clip threshold must be positive, got " + std::to_string(threshold));
  }
  const double norm = g.norm();
  if (norm > threshold) {
    const double scale = threshold / norm;
    for (Matrix& t : g.tensors) t *= scale;
  }
  return g;
}

void adam_step(const std::vector<Matrix*>& params, AdamState& adam, const GradSet& g,
               const TrainConfig& cfg) {
  if (params.size() != g.tensors.size() || params.size() != adam.m.tensors.size()) {
    throw ShapeError("adam_step tensor count mismatch: params " +
                     std::to_string(params.size()) + ", grads " +
                     std::to_string(g.tensors.size()) + ", state " +
                     std::to_string(adam.m.tensors.size()));
  }
  adam.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto pv = params[i]->values();
    auto mv = adam.m.tensors[i].values();
    auto vv = adam.v.tensors[i].values();
    auto gv = g.tensors[i].values();
    for (std::size_t j = 0; j < pv.size(); ++j) {
      mv[j] = cfg.beta1 * mv[j] + (1.0 - cfg.beta1) * gv[j];
      vv[j] = cfg.beta2 * vv[j] + (1.0 - cfg.beta2) * gv[j] * gv[j];
      const double m_hat = mv[j] / bc1;
      const double v_hat = vv[j] / bc2;
      pv[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

GradSet finite_diff_grad(const std::function<double()>& loss,
                         const std::vector<Matrix*>& params, double h) {
  if (!(h > 0.0)) {
    throw ConfigError("finite difference step must be positive, got " + std::to_string(h));
  }
  GradSet g = GradSet::zeros_like(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto pv = params[i]->values();
    auto gv = g.tensors[i].values();
    for (std::size_t j = 0; j < pv.size(); ++j) {
      const double saved = pv[j];
      pv[j] = saved + h;
      const double up = loss();
      pv[j] = saved - h;
      const double down = loss();
      pv[j] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("non-finite loss during finite differences at tensor " +
                           std::to_string(i) + " coord " + std::to_string(j));
      }
      gv[j] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

WindowForward forward_window(const StackParams& model, std::span<const Matrix> inputs,
                             const DropoutSpec& dropout, bool training, SeededRng& rng,
                             const std::vector<CellState>* initial_states) {
  if (inputs.empty()) throw ShapeError("forward_window over an empty input window");

  WindowForward out;
  out.final_states = initial_states ? *initial_states : model.zero_states();
  out.y_hat.reserve(inputs.size());
  out.cache.steps.reserve(inputs.size());

  const std::vector<Matrix>* reuse = nullptr;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    StepCache step = stack_step(inputs[t], out.final_states, model, dropout, training, rng,
                                reuse);
    out.y_hat.push_back(step.y_hat);
    out.cache.steps.push_back(std::move(step));
    if (t == 0 && training && dropout.active() && dropout.reuse_mask_across_steps) {
      reuse = &out.cache.steps.front().masks;
    }
  }
  return out;
}

StateGrads StateGrads::zeros_like(const StackParams& model) {
  StateGrads s;
  s.d_x.reserve(model.layers.size());
  s.d_o.reserve(model.layers.size());
  for (const CellParams& l : model.layers) {
    s.d_x.emplace_back(1, l.hidden_dim);
    s.d_o.emplace_back(1, l.hidden_dim);
  }
  return s;
}

WindowBackward backward_window(const StackParams& model, const ForwardCache& cache,
                               std::span<const double> d_y_hat,
                               const StateGrads* end_state_grads) {
  const std::size_t steps = cache.steps.size();
  if (steps == 0 || d_y_hat.size() != steps) {
    throw ShapeError("backward_window: " + std::to_string(steps) + " cached steps but " +
                     std::to_string(d_y_hat.size()) + " readout gradients");
  }
  const std::size_t num_layers = model.layers.size();

  WindowBackward out;
  out.grads = GradSet::zeros_like(param_tensors(model));
  Matrix& g_w_y = out.grads.tensors[num_layers * 12];
  Matrix& g_b_y = out.grads.tensors[num_layers * 12 + 1];

  StateGrads flow = end_state_grads ? *end_state_grads : StateGrads::zeros_like(model);

  for (std::size_t ti = steps; ti-- > 0;) {
    const StepCache& step = cache.steps[ti];
    const double dy = d_y_hat[ti];

    // Readout: y = readout_in * w_y + b_y.
    Matrix d_above(1, model.layers.back().hidden_dim);
    if (dy != 0.0) {
      add_outer(g_w_y, step.readout_in, Matrix{{dy}});
      g_b_y.at(0, 0) += dy;
      for (std::size_t j = 0; j < d_above.cols(); ++j) {
        d_above.at(0, j) = dy * model.w_y.at(j, 0);
      }
    }

    for (std::size_t l = num_layers; l-- > 0;) {
      // Gradient on this layer's output: recurrent path from t+1 plus the
      // (mask-scaled) path from the consumer above.
      Matrix d_o = flow.d_o[l];
      if (!step.masks.empty()) d_above = hadamard(d_above, step.masks[l]);
      d_o += d_above;

      CellBackward back = cell_backward(step.layers[l], d_o, flow.d_x[l], model.layers[l],
                                        model.variant);
      const std::size_t base = l * 12;
      out.grads.tensors[base + 0] += back.params.w_ix;
      out.grads.tensors[base + 1] += back.params.w_im;
      out.grads.tensors[base + 2] += back.params.b_i;
      out.grads.tensors[base + 3] += back.params.w_fx;
      out.grads.tensors[base + 4] += back.params.w_fm;
      out.grads.tensors[base + 5] += back.params.b_f;
      out.grads.tensors[base + 6] += back.params.w_ox;
      out.grads.tensors[base + 7] += back.params.w_om;
      out.grads.tensors[base + 8] += back.params.b_o;
      out.grads.tensors[base + 9] += back.params.w_ux;
      out.grads.tensors[base + 10] += back.params.w_um;
      out.grads.tensors[base + 11] += back.params.b_u;

      flow.d_x[l] = std::move(back.d_prev_x);
      flow.d_o[l] = std::move(back.d_prev_o);
      d_above = std::move(back.d_input);
    }
  }
  out.initial_state_grads = std::move(flow);
  return out;
}

WindowResult bptt_window(const StackParams& model, std::span<const Matrix> inputs,
                         std::span<const double> targets, const DropoutSpec& dropout,
                         SeededRng& rng, const std::vector<CellState>* initial_states) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw ShapeError("bptt_window: " + std::to_string(inputs.size()) + " inputs vs " +
                     std::to_string(targets.size()) + " targets");
  }
  WindowForward fwd = forward_window(model, inputs, dropout, /*training=*/true, rng,
                                     initial_states);
  std::vector<double> d_y(targets.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double diff = fwd.y_hat[t] - targets[t];
    loss += diff * diff;
    d_y[t] = 2.0 * diff;
  }
  WindowBackward back = backward_window(model, fwd.cache, d_y);

  WindowResult out;
  out.loss = loss;
  out.grads = std::move(back.grads);
  out.final_states = std::move(fwd.final_states);
  return out;
}

void TrainingSeries::check_consistent() const {
  if (inputs.size() != targets.size() || inputs.size() != valid.size()) {
    throw ShapeError("training series arrays disagree: " + std::to_string(inputs.size()) +
                     " inputs, " + std::to_string(targets.size()) + " targets, " +
                     std::to_string(valid.size()) + " flags");
  }
}

TrainLog fit(StackParams& model, const TrainingSeries& series, const TrainConfig& cfg,
             const EpochCallback& on_epoch) {
  cfg.validate();
  series.check_consistent();
  const std::size_t m = cfg.unroll_steps;
  if (series.size() <= m) {
    throw DataError("training series has " + std::to_string(series.size()) +
                    " samples, need more than the unroll window " + std::to_string(m));
  }
  const std::size_t stride = cfg.window_stride == 0 ? m : cfg.window_stride;
  const DropoutSpec dropout = cfg.dropout();
  dropout.validate();

  SeededRng rng(cfg.seed);
  auto params = param_tensors(model);
  AdamState adam = AdamState::init_for(param_tensors(std::as_const(model)));

  TrainLog log;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double sse = 0.0;
    std::size_t n_targets = 0;
    std::vector<CellState> carried = model.zero_states();
    bool have_carried = false;

    std::size_t s = 0;
    while (s + m <= series.size()) {
      // A window must be fully valid; skip past the first invalid sample.
      std::size_t invalid_at = s + m;
      for (std::size_t j = s; j < s + m; ++j) {
        if (!series.valid[j]) {
          invalid_at = j;
          break;
        }
      }
      if (invalid_at < s + m) {
        s = invalid_at + 1;
        have_carried = false;
        continue;
      }

      const std::vector<CellState>* init =
          (cfg.carry_state && have_carried) ? &carried : nullptr;
      WindowResult res = bptt_window(
          model, std::span<const Matrix>(series.inputs.data() + s, m),
          std::span<const double>(series.targets.data() + s, m), dropout, rng, init);
      GradSet clipped = clip_global_norm(std::move(res.grads), cfg.clip_threshold);
      adam_step(params, adam, clipped, cfg);

      sse += res.loss;
      n_targets += m;
      carried = std::move(res.final_states);
      have_carried = true;
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
