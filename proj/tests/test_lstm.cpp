#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridcast/lstm.hpp"

using namespace gridcast;

namespace {

// Scalar-by-scalar re-derivation of the cell equations, written without the
// Matrix type so it cannot share a code path with the implementation.
struct ScalarCellOut {
  std::vector<double> i_g, f_g, o_g, u, x, o;
};

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

ScalarCellOut scalar_cell(const std::vector<double>& in, const std::vector<double>& x_prev,
                          const std::vector<double>& o_prev, const CellParams& p,
                          CellVariant v) {
  const std::size_t d = p.input_dim, h = p.hidden_dim;
  ScalarCellOut out;
  out.i_g.resize(h);
  out.f_g.resize(h);
  out.o_g.resize(h);
  out.u.resize(h);
  out.x.resize(h);
  out.o.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    double ai = p.b_i.at(0, j), af = p.b_f.at(0, j), ao = p.b_o.at(0, j), au = p.b_u.at(0, j);
    for (std::size_t k = 0; k < d; ++k) {
      ai += in[k] * p.w_ix.at(k, j);
      af += in[k] * p.w_fx.at(k, j);
      ao += in[k] * p.w_ox.at(k, j);
      au += in[k] * p.w_ux.at(k, j);
    }
    for (std::size_t k = 0; k < h; ++k) {
      ai += o_prev[k] * p.w_im.at(k, j);
      af += o_prev[k] * p.w_fm.at(k, j);
      ao += o_prev[k] * p.w_om.at(k, j);
      au += o_prev[k] * p.w_um.at(k, j);
    }
    out.i_g[j] = sig(ai);
    out.f_g[j] = sig(af);
    out.o_g[j] = sig(ao);
    out.u[j] = std::tanh(au);
    out.x[j] = out.f_g[j] * x_prev[j] + out.i_g[j] * out.u[j];
    out.o[j] = out.o_g[j] * std::tanh(v == CellVariant::standard ? out.x[j] : out.u[j]);
  }
  return out;
}

}  // namespace

TEST_CASE("zero cell analytic case, both variants") {
  CellParams p = CellParams::zeros(1, 1);
  CellState prev{Matrix{{2.0}}, Matrix{{0.0}}};
  const Matrix input{{0.7}};

  auto [st_std, cache_std] = cell_forward(input, prev, p, CellVariant::standard);
  CHECK(cache_std.i_g.at(0, 0) == 0.5);
  CHECK(cache_std.f_g.at(0, 0) == 0.5);
  CHECK(cache_std.o_g.at(0, 0) == 0.5);
  CHECK(cache_std.u.at(0, 0) == 0.0);
  CHECK(st_std.x.at(0, 0) == 1.0);
  CHECK(st_std.o.at(0, 0) == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-15));
  CHECK(st_std.o.at(0, 0) == doctest::Approx(0.380797).epsilon(1e-6));

  auto [st_pv, cache_pv] = cell_forward(input, prev, p, CellVariant::tanh_update);
  CHECK(st_pv.x.at(0, 0) == 1.0);
  CHECK(st_pv.o.at(0, 0) == 0.0);
}

TEST_CASE("saturated gates preserve the state") {
  CellParams p = CellParams::zeros(2, 3);
  p.b_f = Matrix::filled(1, 3, 20.0);
  p.b_i = Matrix::filled(1, 3, -20.0);
  CellState prev{Matrix{{0.4, -1.2, 2.5}}, Matrix{{0.1, 0.0, -0.3}}};
  const Matrix input{{0.3, -0.8}};
  auto [next, cache] = cell_forward(input, prev, p, CellVariant::standard);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(next.x.at(0, j) == doctest::Approx(prev.x.at(0, j)).epsilon(1e-8));
  }
}

TEST_CASE("random cell matches the scalar re-derivation oracle") {
  SeededRng rng(17);
  for (CellVariant v : {CellVariant::standard, CellVariant::tanh_update}) {
    CellParams p = CellParams::init(3, 4, 0.6, rng);
    std::vector<double> in, xp, op;
    for (int k = 0; k < 3; ++k) in.push_back(rng.uniform(-1, 1));
    for (int k = 0; k < 4; ++k) xp.push_back(rng.uniform(-1, 1));
    for (int k = 0; k < 4; ++k) op.push_back(rng.uniform(-1, 1));

    CellState prev{Matrix(1, 4, xp), Matrix(1, 4, op)};
    auto [next, cache] = cell_forward(Matrix(1, 3, in), prev, p, v);
    const ScalarCellOut oracle = scalar_cell(in, xp, op, p, v);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(cache.i_g.at(0, j) == doctest::Approx(oracle.i_g[j]).epsilon(1e-12));
      CHECK(cache.f_g.at(0, j) == doctest::Approx(oracle.f_g[j]).epsilon(1e-12));
      CHECK(cache.o_g.at(0, j) == doctest::Approx(oracle.o_g[j]).epsilon(1e-12));
      CHECK(cache.u.at(0, j) == doctest::Approx(oracle.u[j]).epsilon(1e-12));
      CHECK(next.x.at(0, j) == doctest::Approx(oracle.x[j]).epsilon(1e-12));
      CHECK(next.o.at(0, j) == doctest::Approx(oracle.o[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("standard-variant outputs stay inside (-1, 1)") {
  SeededRng rng(23);
  CellParams p = CellParams::init(2, 5, 1.5, rng);
  CellState state = CellState::zeros(5);
  for (int t = 0; t < 200; ++t) {
    Matrix in(1, 2);
    in.at(0, 0) = rng.uniform(-3, 3);
    in.at(0, 1) = rng.uniform(-3, 3);
    auto [next, cache] = cell_forward(in, state, p, CellVariant::standard);
    state = next;
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(std::fabs(state.o.at(0, j)) < 1.0);
    }
  }
}

TEST_CASE("cell_backward: zero upstream gradients give zero gradients") {
  SeededRng rng(29);
  CellParams p = CellParams::init(3, 2, 0.5, rng);
  Matrix in(1, 3);
  for (double& v : in.values()) v = rng.uniform(-1, 1);
  auto [next, cache] = cell_forward(in, CellState::zeros(2), p, CellVariant::standard);

  const Matrix zero(1, 2);
  CellBackward back = cell_backward(cache, zero, zero, p, CellVariant::standard);
  CHECK(back.params.w_ix == Matrix(3, 2));
  CHECK(back.params.w_um == Matrix(2, 2));
  CHECK(back.params.b_f == Matrix(1, 2));
  CHECK(back.d_input == Matrix(1, 3));
  CHECK(back.d_prev_x == Matrix(1, 2));
  CHECK(back.d_prev_o == Matrix(1, 2));
}

TEST_CASE("cell_backward matches finite differences per parameter") {
  // Loss L = sum(o) + sum(x_new): upstream gradients are all ones.
  SeededRng rng(31);
  for (CellVariant v : {CellVariant::standard, CellVariant::tanh_update}) {
    CellParams p = CellParams::init(3, 2, 0.5, rng);
    std::vector<double> in_v, xp_v, op_v;
    for (int k = 0; k < 3; ++k) in_v.push_back(rng.uniform(-1, 1));
    for (int k = 0; k < 2; ++k) xp_v.push_back(rng.uniform(-1, 1));
    for (int k = 0; k < 2; ++k) op_v.push_back(rng.uniform(-1, 1));
    const Matrix input(1, 3, in_v);
    const CellState prev{Matrix(1, 2, xp_v), Matrix(1, 2, op_v)};

    auto [next, cache] = cell_forward(input, prev, p, v);
    const Matrix ones = Matrix::filled(1, 2, 1.0);
    CellBackward back = cell_backward(cache, ones, ones, p, v);

    auto loss = [&]() {
      auto [st, ch] = cell_forward(input, prev, p, v);
      double acc = 0.0;
      for (double x : st.o.values()) acc += x;
      for (double x : st.x.values()) acc += x;
      return acc;
    };
    const double h = 1e-5;
    std::vector<std::pair<Matrix*, const Matrix*>> pairs = {
        {&p.w_ix, &back.params.w_ix}, {&p.w_im, &back.params.w_im},
        {&p.b_i, &back.params.b_i},   {&p.w_fx, &back.params.w_fx},
        {&p.w_fm, &back.params.w_fm}, {&p.b_f, &back.params.b_f},
        {&p.w_ox, &back.params.w_ox}, {&p.w_om, &back.params.w_om},
        {&p.b_o, &back.params.b_o},   {&p.w_ux, &back.params.w_ux},
        {&p.w_um, &back.params.w_um}, {&p.b_u, &back.params.b_u},
    };
    for (auto& [param, grad] : pairs) {
      auto pv = param->values();
      for (std::size_t i = 0; i < pv.size(); ++i) {
        const double saved = pv[i];
        pv[i] = saved + h;
        const double up = loss();
        pv[i] = saved - h;
        const double down = loss();
        pv[i] = saved;
        const double fd = (up - down) / (2 * h);
        const double an = grad->values()[i];
        const double rel = std::fabs(an - fd) / std::max({1.0, std::fabs(an), std::fabs(fd)});
        CHECK(rel < 1e-6);
      }
    }
  }
}

TEST_CASE("state pass-through: f_g one, i_g zero routes grad_x_next unchanged") {
  CellParams p = CellParams::zeros(2, 2);
  CellCache cache;
  cache.input = Matrix{{0.3, -0.1}};
  cache.x_prev = Matrix{{0.7, -0.4}};
  cache.o_prev = Matrix(1, 2);
  cache.i_g = Matrix(1, 2);                    // forced 0
  cache.f_g = Matrix::filled(1, 2, 1.0);       // forced 1
  cache.o_g = Matrix::filled(1, 2, 0.5);
  cache.u = Matrix(1, 2);
  cache.x = cache.x_prev;                      // f=1, i=0 passes the state through
  cache.o = Matrix(1, 2);

  const Matrix grad_x_next{{0.9, -1.3}};
  const Matrix zero(1, 2);
  CellBackward back = cell_backward(cache, zero, grad_x_next, p, CellVariant::standard);
  CHECK(back.d_prev_x == grad_x_next);
}

TEST_CASE("variant equivalence when the new state equals the update signal") {
  // Saturate i_g to 1 and f_g to 0 from a zero prior state: x_t == u, so
  // tanh(x_t) == tanh(u) and both output equations agree.
  SeededRng rng(37);
  CellParams p = CellParams::init(2, 3, 0.4, rng);
  p.b_i = Matrix::filled(1, 3, 40.0);
  p.b_f = Matrix::filled(1, 3, -40.0);
  const Matrix input{{0.5, -0.2}};
  auto [std_state, c1] = cell_forward(input, CellState::zeros(3), p, CellVariant::standard);
  auto [pv_state, c2] =
      cell_forward(input, CellState::zeros(3), p, CellVariant::tanh_update);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std_state.o.at(0, j) == doctest::Approx(pv_state.o.at(0, j)).epsilon(1e-9));
  }
}

TEST_CASE("stack_step with one layer and no dropout equals cell_forward plus readout") {
  SeededRng rng(41);
  StackParams s = StackParams::init(4, 1, 3, 0.4, rng);
  Matrix input(1, 4);
  for (double& v : input.values()) v = rng.uniform(-1, 1);

  std::vector<CellState> states = s.zero_states();
  SeededRng step_rng(0);
  const StepCache step =
      stack_step(input, states, s, DropoutSpec{0.0, false}, true, step_rng);

  auto [cell_state, cache] = cell_forward(input, CellState::zeros(3), s.layers[0], s.variant);
  const double y = matmul(cell_state.o, s.w_y).at(0, 0) + s.b_y.at(0, 0);
  CHECK(step.y_hat == doctest::Approx(y).epsilon(1e-15));
  CHECK(states[0].o == cell_state.o);
}

TEST_CASE("evaluation mode never applies dropout masks") {
  SeededRng rng(43);
  StackParams s = StackParams::init(4, 2, 3, 0.4, rng);
  Matrix input(1, 4);
  for (double& v : input.values()) v = rng.uniform(-1, 1);

  auto run_eval = [&]() {
    std::vector<CellState> states = s.zero_states();
    SeededRng r(99);
    return stack_step(input, states, s, DropoutSpec{0.5, false}, /*training=*/false, r);
  };
  const StepCache a = run_eval();
  const StepCache b = run_eval();
  CHECK(a.y_hat == b.y_hat);
  CHECK(a.masks.empty());
}

TEST_CASE("zero stack with constant readout bias emits the constant") {
  StackParams s = StackParams::zeros(4, 2, 3);
  s.b_y.at(0, 0) = 1.25;
  SeededRng rng(0);
  for (double x : {-2.0, 0.0, 3.5}) {
    std::vector<CellState> states = s.zero_states();
    const StepCache step = stack_step(Matrix{{x, 0.1, 0.2, 0.3}}, states, s,
                                      DropoutSpec{0.0, false}, true, rng);
    CHECK(step.y_hat == doctest::Approx(1.25).epsilon(1e-15));
  }
}

TEST_CASE("inverted dropout mask: eval identity and unbiased expectation") {
  SeededRng rng(47);
  const double rate = 0.3;
  const std::size_t n = 10000;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix m = dropout_mask(1, rate, rng);
    sum += m.at(0, 0);
  }
  // E[mask] = 1, so a masked activation is unbiased. 2% band per the contract.
  CHECK(std::fabs(sum / static_cast<double>(n) - 1.0) < 0.02);

  CHECK_THROWS_AS(dropout_mask(3, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(dropout_mask(3, -0.1, rng), ConfigError);
}

TEST_CASE("mask reuse across steps is configurable, fresh is the default") {
  SeededRng rng(53);
  StackParams s = StackParams::init(4, 1, 8, 0.4, rng);
  std::vector<Matrix> inputs;
  for (int t = 0; t < 3; ++t) {
    Matrix in(1, 4);
    for (double& v : in.values()) v = rng.uniform(-1, 1);
    inputs.push_back(in);
  }

  auto masks_of = [&](bool reuse) {
    std::vector<CellState> states = s.zero_states();
    SeededRng r(5);
    std::vector<Matrix> first, third;
    const DropoutSpec spec{0.5, reuse};
    StepCache s0 = stack_step(inputs[0], states, s, spec, true, r);
    StepCache s1 = stack_step(inputs[1], states, s, spec, true, r,
                              reuse ? &s0.masks : nullptr);
    return std::pair{s0.masks[0], s1.masks[0]};
  };
  auto [fresh0, fresh1] = masks_of(false);
  CHECK_FALSE(fresh0 == fresh1);
  auto [reuse0, reuse1] = masks_of(true);
  CHECK(reuse0 == reuse1);
}

TEST_CASE("stack and cell validation name the offending tensor") {
  SeededRng rng(59);
  StackParams s = StackParams::init(4, 2, 3, 0.4, rng);
  s.layers[1].w_ix = Matrix(5, 3);  // breaks the chained dimension
  CHECK_THROWS_AS(s.validate(), ShapeError);

  CellParams p = CellParams::zeros(2, 2);
  p.w_fm = Matrix(3, 2);
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("w_fm"), ShapeError);

  CHECK_THROWS_AS(
      cell_forward(Matrix(1, 3), CellState::zeros(2), CellParams::zeros(2, 2),
                   CellVariant::standard),
      ShapeError);
}
