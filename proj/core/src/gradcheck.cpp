#include "gridcast/gradcheck.hpp"

#include <cmath>

namespace gridcast {

namespace {

double tensor_rel_err(const Matrix& analytic, const Matrix& fd) {
  double max_diff = 0.0, max_a = 0.0, max_f = 0.0;
  auto av = analytic.values();
  auto fv = fd.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    max_diff = std::max(max_diff, std::fabs(av[i] - fv[i]));
    max_a = std::max(max_a, std::fabs(av[i]));
    max_f = std::max(max_f, std::fabs(fv[i]));
  }
  return max_diff / std::max(1.0, std::max(max_a, max_f));
}

GradCheckReport compare(const GradSet& analytic, const GradSet& fd,
                        const std::vector<std::string>& names) {
  GradCheckReport report;
  for (std::size_t i = 0; i < analytic.tensors.size(); ++i) {
    const double e = tensor_rel_err(analytic.tensors[i], fd.tensors[i]);
    report.tensors.push_back({names[i], e});
    report.worst = std::max(report.worst, e);
  }
  return report;
}

Matrix random_row(std::size_t n, SeededRng& rng) {
  Matrix m(1, n);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

GradCheckReport gradcheck_stack(std::size_t layers, std::size_t units, std::size_t steps,
                                CellVariant variant, std::uint64_t seed, double fd_step,
                                bool corrupt_backward) {
  SeededRng rng(seed);
  StackParams model = StackParams::init(4, layers, units, 0.4, rng, variant);

  std::vector<Matrix> inputs;
  std::vector<double> targets;
  for (std::size_t t = 0; t < steps; ++t) {
    inputs.push_back(random_row(4, rng));
    targets.push_back(rng.uniform(-1.0, 1.0));
  }

  const DropoutSpec no_dropout{0.0, false};
  SeededRng unused(0);
  GradSet analytic = bptt_window(model, inputs, targets, no_dropout, unused).grads;
  if (corrupt_backward) analytic.tensors.front().at(0, 0) += 0.5;

  auto loss = [&]() {
    SeededRng r(0);
    WindowForward fwd = forward_window(model, inputs, no_dropout, /*training=*/false, r);
    return sse_loss(targets, fwd.y_hat);
  };
  GradSet fd = finite_diff_grad(loss, param_tensors(model), fd_step);

  return compare(analytic, fd, param_names(model));
}

GradCheckReport gradcheck_s2s(std::size_t layers, std::size_t units, std::size_t window,
                              std::size_t horizon, CellVariant variant, std::uint64_t seed,
                              double fd_step) {
  SeededRng rng(seed);
  S2SParams model = S2SParams::init(layers, units, 0.4, rng, variant);

  std::vector<Matrix> enc_inputs, dec_inputs;
  std::vector<double> targets;
  for (std::size_t t = 0; t < window; ++t) enc_inputs.push_back(random_row(4, rng));
  for (std::size_t t = 0; t < horizon; ++t) {
    dec_inputs.push_back(random_row(3, rng));
    targets.push_back(rng.uniform(-1.0, 1.0));
  }

  const DropoutSpec no_dropout{0.0, false};
  SeededRng unused(0);
  GradSet analytic =
      s2s_block_gradients(model, enc_inputs, dec_inputs, targets, no_dropout, unused).grads;

  auto loss = [&]() {
    SeededRng r(0);
    WindowForward enc = forward_window(model.encoder, enc_inputs, no_dropout,
                                       /*training=*/false, r);
    WindowForward dec = forward_window(model.decoder, dec_inputs, no_dropout,
                                       /*training=*/false, r, &enc.final_states);
    return sse_loss(targets, dec.y_hat);
  };
  GradSet fd = finite_diff_grad(loss, param_tensors(model), fd_step);

  return compare(analytic, fd, param_names(model));
}

}  // namespace gridcast
