#include "gridcast/lstm.hpp"

#include <cmath>

namespace gridcast {

std::string to_string(CellVariant v) {
  return v == CellVariant::standard ? "standard" : "tanh_update";
}

CellVariant cell_variant_from_string(const std::string& name) {
  if (name == "standard") return CellVariant::standard;
  if (name == "tanh_update") return CellVariant::tanh_update;
  throw ConfigError("unknown cell variant '" + name + "' (standard | tanh_update)");
}

CellParams CellParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  CellParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_ix = Matrix(input_dim, hidden_dim);
  p.w_fx = Matrix(input_dim, hidden_dim);
  p.w_ox = Matrix(input_dim, hidden_dim);
  p.w_ux = Matrix(input_dim, hidden_dim);
  p.w_im = Matrix(hidden_dim, hidden_dim);
  p.w_fm = Matrix(hidden_dim, hidden_dim);
  p.w_om = Matrix(hidden_dim, hidden_dim);
  p.w_um = Matrix(hidden_dim, hidden_dim);
  p.b_i = Matrix(1, hidden_dim);
  p.b_f = Matrix(1, hidden_dim);
  p.b_o = Matrix(1, hidden_dim);
  p.b_u = Matrix(1, hidden_dim);
  return p;
}

CellParams CellParams::init(std::size_t input_dim, std::size_t hidden_dim, double range,
                            SeededRng& rng) {
  CellParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_ix = uniform_init(input_dim, hidden_dim, range, rng);
  p.w_im = uniform_init(hidden_dim, hidden_dim, range, rng);
  p.b_i = uniform_init(1, hidden_dim, range, rng);
  p.w_fx = uniform_init(input_dim, hidden_dim, range, rng);
  p.w_fm = uniform_init(hidden_dim, hidden_dim, range, rng);
  p.b_f = uniform_init(1, hidden_dim, range, rng);
  p.w_ox = uniform_init(input_dim, hidden_dim, range, rng);
  p.w_om = uniform_init(hidden_dim, hidden_dim, range, rng);
  p.b_o = uniform_init(1, hidden_dim, range, rng);
  p.w_ux = uniform_init(input_dim, hidden_dim, range, rng);
  p.w_um = uniform_init(hidden_dim, hidden_dim, range, rng);
  p.b_u = uniform_init(1, hidden_dim, range, rng);
  return p;
}

void CellParams::validate() const {
  auto check = [this](const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ShapeError(std::string("cell tensor ") + name + " is " + m.shape() + ", expected " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  check(w_ix, input_dim, hidden_dim, "w_ix");
  check(w_fx, input_dim, hidden_dim, "w_fx");
  check(w_ox, input_dim, hidden_dim, "w_ox");
  check(w_ux, input_dim, hidden_dim, "w_ux");
  check(w_im, hidden_dim, hidden_dim, "w_im");
  check(w_fm, hidden_dim, hidden_dim, "w_fm");
  check(w_om, hidden_dim, hidden_dim, "w_om");
  check(w_um, hidden_dim, hidden_dim, "w_um");
  check(b_i, 1, hidden_dim, "b_i");
  check(b_f, 1, hidden_dim, "b_f");
  check(b_o, 1, hidden_dim, "b_o");
  check(b_u, 1, hidden_dim, "b_u");
}

CellGrads CellGrads::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  CellGrads g;
  g.w_ix = Matrix(input_dim, hidden_dim);
  g.w_fx = Matrix(input_dim, hidden_dim);
  g.w_ox = Matrix(input_dim, hidden_dim);
  g.w_ux = Matrix(input_dim, hidden_dim);
  g.w_im = Matrix(hidden_dim, hidden_dim);
  g.w_fm = Matrix(hidden_dim, hidden_dim);
  g.w_om = Matrix(hidden_dim, hidden_dim);
  g.w_um = Matrix(hidden_dim, hidden_dim);
  g.b_i = Matrix(1, hidden_dim);
  g.b_f = Matrix(1, hidden_dim);
  g.b_o = Matrix(1, hidden_dim);
  g.b_u = Matrix(1, hidden_dim);
  return g;
}

std::pair<CellState, CellCache> cell_forward(const Matrix& input, const CellState& prev,
                                             const CellParams& p, CellVariant v) {
  if (input.rows() != 1 || input.cols() != p.input_dim) {
    throw ShapeError("cell input is " + input.shape() + ", expected 1x" +
                     std::to_string(p.input_dim));
  }
  if (prev.x.cols() != p.hidden_dim || prev.o.cols() != p.hidden_dim) {
    throw ShapeError("cell state is " + prev.x.shape() + "/" + prev.o.shape() +
                     ", expected 1x" + std::to_string(p.hidden_dim));
  }

  CellCache c;
  c.input = input;
  c.x_prev = prev.x;
  c.o_prev = prev.o;
  c.i_g = map_sigmoid(matmul(input, p.w_ix) + matmul(prev.o, p.w_im) + p.b_i);
  c.f_g = map_sigmoid(matmul(input, p.w_fx) + matmul(prev.o, p.w_fm) + p.b_f);
  c.o_g = map_sigmoid(matmul(input, p.w_ox) + matmul(prev.o, p.w_om) + p.b_o);
  c.u = map_tanh(matmul(input, p.w_ux) + matmul(prev.o, p.w_um) + p.b_u);
  c.x = hadamard(c.f_g, prev.x) + hadamard(c.i_g, c.u);
  c.o = hadamard(c.o_g, map_tanh(v == CellVariant::standard ? c.x : c.u));
  return {CellState{c.x, c.o}, std::move(c)};
}

CellBackward cell_backward(const CellCache& cache, const Matrix& grad_o,
                           const Matrix& grad_x_next, const CellParams& p, CellVariant v) {
  if (cache.input.empty() || cache.i_g.empty() || cache.u.empty() || cache.x_prev.empty()) {
    throw ShapeError("cell_backward: incomplete forward cache entry");
  }

  const std::size_t h = p.hidden_dim;
  Matrix d_o_g(1, h), d_x_total(1, h), d_u(1, h);

  if (v == CellVariant::standard) {
    // o_t = o_g . tanh(x_t): the output path contributes to d x_t.
    for (std::size_t j = 0; j < h; ++j) {
      const double tx = std::tanh(cache.x.at(0, j));
      d_o_g.at(0, j) = grad_o.at(0, j) * tx;
      d_x_total.at(0, j) =
          grad_x_next.at(0, j) + grad_o.at(0, j) * cache.o_g.at(0, j) * (1.0 - tx * tx);
      d_u.at(0, j) = d_x_total.at(0, j) * cache.i_g.at(0, j);
    }
  } else {
    // o_t = o_g . tanh(u): the output path contributes to d u instead.
    for (std::size_t j = 0; j < h; ++j) {
      const double tu = std::tanh(cache.u.at(0, j));
      d_o_g.at(0, j) = grad_o.at(0, j) * tu;
      d_x_total.at(0, j) = grad_x_next.at(0, j);
      d_u.at(0, j) = d_x_total.at(0, j) * cache.i_g.at(0, j) +
                     grad_o.at(0, j) * cache.o_g.at(0, j) * (1.0 - tu * tu);
    }
  }

  Matrix d_i_g = hadamard(d_x_total, cache.u);
  Matrix d_f_g = hadamard(d_x_total, cache.x_prev);
  Matrix d_prev_x = hadamard(d_x_total, cache.f_g);

  // Back through the gate nonlinearities to pre-activation gradients.
  Matrix da_i(1, h), da_f(1, h), da_o(1, h), da_u(1, h);
  for (std::size_t j = 0; j < h; ++j) {
    const double ig = cache.i_g.at(0, j);
    const double fg = cache.f_g.at(0, j);
    const double og = cache.o_g.at(0, j);
    const double uu = cache.u.at(0, j);
    da_i.at(0, j) = d_i_g.at(0, j) * ig * (1.0 - ig);
    da_f.at(0, j) = d_f_g.at(0, j) * fg * (1.0 - fg);
    da_o.at(0, j) = d_o_g.at(0, j) * og * (1.0 - og);
    da_u.at(0, j) = d_u.at(0, j) * (1.0 - uu * uu);
  }

  CellBackward out;
  out.params = CellGrads::zeros(p.input_dim, p.hidden_dim);
  add_outer(out.params.w_ix, cache.input, da_i);
  add_outer(out.params.w_fx, cache.input, da_f);
  add_outer(out.params.w_ox, cache.input, da_o);
  add_outer(out.params.w_ux, cache.input, da_u);
  add_outer(out.params.w_im, cache.o_prev, da_i);
  add_outer(out.params.w_fm, cache.o_prev, da_f);
  add_outer(out.params.w_om, cache.o_prev, da_o);
  add_outer(out.params.w_um, cache.o_prev, da_u);
  out.params.b_i = da_i;
  out.params.b_f = da_f;
  out.params.b_o = da_o;
  out.params.b_u = da_u;

  out.d_input = matmul_bt(da_i, p.w_ix);
  out.d_input += matmul_bt(da_f, p.w_fx);
  out.d_input += matmul_bt(da_o, p.w_ox);
  out.d_input += matmul_bt(da_u, p.w_ux);

  out.d_prev_o = matmul_bt(da_i, p.w_im);
  out.d_prev_o += matmul_bt(da_f, p.w_fm);
  out.d_prev_o += matmul_bt(da_o, p.w_om);
  out.d_prev_o += matmul_bt(da_u, p.w_um);

  out.d_prev_x = std::move(d_prev_x);
  return out;
}

void DropoutSpec::validate() const {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
}

Matrix dropout_mask(std::size_t n, double rate, SeededRng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  Matrix m(1, n);
  const double keep = 1.0 - rate;
  for (double& v : m.values()) {
    v = rng.next_unit() < rate ? 0.0 : 1.0 / keep;
  }
  return m;
}

std::vector<CellState> StackParams::zero_states() const {
  std::vector<CellState> states;
  states.reserve(layers.size());
  for (const CellParams& l : layers) states.push_back(CellState::zeros(l.hidden_dim));
  return states;
}

StackParams StackParams::init(std::size_t input_dim, std::size_t num_layers,
                              std::size_t hidden_dim, double range, SeededRng& rng,
                              CellVariant variant) {
  StackParams s;
  s.variant = variant;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < num_layers; ++l) {
    s.layers.push_back(CellParams::init(in, hidden_dim, range, rng));
    in = hidden_dim;
  }
  s.w_y = uniform_init(hidden_dim, 1, range, rng);
  s.b_y = uniform_init(1, 1, range, rng);
  s.validate();
  return s;
}

StackParams StackParams::zeros(std::size_t input_dim, std::size_t num_layers,
                               std::size_t hidden_dim, CellVariant variant) {
  StackParams s;
  s.variant = variant;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < num_layers; ++l) {
    s.layers.push_back(CellParams::zeros(in, hidden_dim));
    in = hidden_dim;
  }
  s.w_y = Matrix(hidden_dim, 1);
  s.b_y = Matrix(1, 1);
  return s;
}

void StackParams::validate() const {
  if (layers.empty()) throw ShapeError("stack has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].input_dim != layers[l - 1].hidden_dim) {
      throw ShapeError("layer " + std::to_string(l) + " input dim " +
                       std::to_string(layers[l].input_dim) + " != layer " +
                       std::to_string(l - 1) + " hidden dim " +
                       std::to_string(layers[l - 1].hidden_dim));
    }
  }
  if (w_y.rows() != layers.back().hidden_dim || w_y.cols() != 1) {
    throw ShapeError("readout w_y is " + w_y.shape() + ", expected " +
                     std::to_string(layers.back().hidden_dim) + "x1");
  }
  if (b_y.rows() != 1 || b_y.cols() != 1) {
    throw ShapeError("readout b_y is " + b_y.shape() + ", expected 1x1");
  }
}

std::vector<Matrix*> param_tensors(StackParams& s) {
  std::vector<Matrix*> t;
  t.reserve(s.layers.size() * 12 + 2);
  for (CellParams& l : s.layers) {
    t.push_back(&l.w_ix);
    t.push_back(&l.w_im);
    t.push_back(&l.b_i);
    t.push_back(&l.w_fx);
    t.push_back(&l.w_fm);
    t.push_back(&l.b_f);
    t.push_back(&l.w_ox);
    t.push_back(&l.w_om);
    t.push_back(&l.b_o);
    t.push_back(&l.w_ux);
    t.push_back(&l.w_um);
    t.push_back(&l.b_u);
  }
  t.push_back(&s.w_y);
  t.push_back(&s.b_y);
  return t;
}

std::vector<const Matrix*> param_tensors(const StackParams& s) {
  auto mut = param_tensors(const_cast<StackParams&>(s));
  return {mut.begin(), mut.end()};
}

std::vector<std::string> param_names(const StackParams& s, const std::string& prefix) {
  static const char* kCellNames[] = {"w_ix", "w_im", "b_i", "w_fx", "w_fm", "b_f",
                                     "w_ox", "w_om", "b_o", "w_ux", "w_um", "b_u"};
  std::vector<std::string> names;
  names.reserve(s.layers.size() * 12 + 2);
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    for (const char* n : kCellNames) {
      names.push_back(prefix + "layer" + std::to_string(l) + "." + n);
    }
  }
  names.push_back(prefix + "w_y");
  names.push_back(prefix + "b_y");
  return names;
}

StepCache stack_step(const Matrix& input, std::vector<CellState>& states,
                     const StackParams& s, const DropoutSpec& dropout, bool training,
                     SeededRng& rng, const std::vector<Matrix>* reuse_masks) {
  if (states.size() != s.layers.size()) {
    throw ShapeError("stack has " + std::to_string(s.layers.size()) + " layers but " +
                     std::to_string(states.size()) + " states were supplied");
  }
  const bool masked = training && dropout.active();

  StepCache step;
  step.layers.reserve(s.layers.size());
  Matrix carried = input;
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    auto [state, cache] = cell_forward(carried, states[l], s.layers[l], s.variant);
    states[l] = std::move(state);
    carried = cache.o;
    if (masked) {
      Matrix mask = reuse_masks ? (*reuse_masks)[l]
                                : dropout_mask(carried.cols(), dropout.rate, rng);
      carried = hadamard(carried, mask);
      step.masks.push_back(std::move(mask));
    }
    step.layers.push_back(std::move(cache));
  }
  step.readout_in = carried;
  step.y_hat = matmul(carried, s.w_y).at(0, 0) + s.b_y.at(0, 0);
  return step;
}

}  // namespace gridcast
