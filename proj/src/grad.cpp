#include "gitnet/grad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gitnet/flops.hpp"

namespace gitnet {

namespace {

Tensor flat(const Tensor& t) { return t.reshaped({t.extent(0) * t.extent(1), t.extent(2)}); }

// Adjoints of out[b,c,k] = Σ_d D[d,c,k]·α[b,d,k] for upstream G[b,c,k]:
//   ∂D[d,c,k] = Σ_b α[b,d,k]·G[b,c,k]      ∂α[b,d,k] = Σ_c D[d,c,k]·G[b,c,k]
void hybrid_product_adjoint(const Tensor& alpha, const Tensor& d, const Tensor& g, Tensor& d_d, Tensor& d_alpha) {
  const std::size_t batch = alpha.extent(0), c = alpha.extent(1), k = alpha.extent(2);
  d_alpha = Tensor({batch, c, k});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t di = 0; di < c; ++di) {
      const double* arow = alpha.raw() + (b * c + di) * k;
      double* darow = d_alpha.raw() + (b * c + di) * k;
      for (std::size_t co = 0; co < c; ++co) {
        const double* grow = g.raw() + (b * c + co) * k;
        const double* drow = d.raw() + (di * c + co) * k;
        double* ddrow = d_d.raw() + (di * c + co) * k;
        for (std::size_t j = 0; j < k; ++j) {
          ddrow[j] += arow[j] * grow[j];
          darow[j] += drow[j] * grow[j];
        }
      }
    }
  }
  detail::add_flops(4 * batch * c * c * k);
}

void require_tape(const GitNetParams& m, const GradTape& tape) {
  if (tape.layers.size() != m.layers.size() || tape.coefficients.rank() != 3 ||
      tape.coefficients.extent(0) != tape.batch || tape.projected_in.rank() != 3 ||
      tape.projected_in.extent(1) != m.shape.channels || tape.projected_in.extent(2) != m.shape.modes) {
    throw ShapeError("backward: tape does not match the parameter record");
  }
}

}  // namespace

TapedForward forward_with_tape(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                               const Tensor& f) {
  const auto& s = m.shape;
  if (f.rank() != 3 || f.extent(1) != s.d_in || f.extent(2) != basis_u.n_points) {
    throw ShapeError("forward_with_tape: input " + shape_string(f.shape()) + " does not match the network");
  }
  if (basis_u.size() != s.p_u || basis_v.size() != s.p_v) {
    throw ShapeError("forward_with_tape: PCA sizes do not match the network");
  }
  const std::size_t batch = f.extent(0);
  TapedForward out;
  GradTape& tape = out.tape;
  tape.batch = batch;
  tape.coefficients =
      encode(basis_u, f.reshaped({batch * s.d_in, basis_u.n_points})).reshaped({batch, s.d_in, s.p_u});

  // Same kernels, same order as lift()/git_layer_forward()/project().
  tape.lifted_left = left_multiply_batched(m.lift_left, tape.coefficients);
  Tensor z = matmul(flat(tape.lifted_left), m.lift_right).reshaped({batch, s.channels, s.modes});

  tape.layers.reserve(m.layers.size());
  for (const auto& layer : m.layers) {
    LayerTape lt;
    lt.input = std::move(z);
    lt.basis_changed = matmul(flat(lt.input), layer.p).reshaped({batch, s.channels, s.modes});
    lt.mixed = hybrid_product(lt.basis_changed, layer.d);
    Tensor transformed = matmul(flat(lt.mixed), layer.q).reshaped({batch, s.channels, s.modes});
    const Tensor skip = left_multiply_batched(layer.t, lt.input);
    if (m.variant == Variant::standard) {
      lt.pre_activation = skip + transformed;
      z = activate(layer.activation, lt.pre_activation);
    } else {
      lt.pre_activation = std::move(transformed);
      z = skip + activate(layer.activation, lt.pre_activation);
    }
    tape.layers.push_back(std::move(lt));
  }

  tape.projected_in = std::move(z);
  tape.projected_left = left_multiply_batched(m.proj_left, tape.projected_in);
  const Tensor beta = matmul(flat(tape.projected_left), m.proj_right);
  out.predictions = decode(basis_v, beta).reshaped({batch, s.d_out, basis_v.n_points});
  return out;
}

GitNetGrads backward(const GitNetParams& m, const PcaBasis& basis_v, const GradTape& tape,
                     const Tensor& d_predictions) {
  require_tape(m, tape);
  const auto& s = m.shape;
  const std::size_t batch = tape.batch;
  if (d_predictions.shape() != Shape{batch, s.d_out, basis_v.n_points}) {
    throw ShapeError("backward: upstream gradient " + shape_string(d_predictions.shape()) +
                     " does not match predictions");
  }
  GitNetGrads g = zeros_like(m);

  // decode: pred = β·E + mean
  const Tensor d_beta = matmul_nt(d_predictions.reshaped({batch * s.d_out, basis_v.n_points}), basis_v.components);

  // project: β = (L↓·z)·R↓
  g.proj_right = matmul_tn(flat(tape.projected_left), d_beta);
  const Tensor d_left = matmul_nt(d_beta, m.proj_right).reshaped({batch, s.d_out, s.modes});
  g.proj_left = sum_outer_batched(d_left, tape.projected_in);
  Tensor d_z = left_multiply_batched(transpose(m.proj_left), d_left);

  for (std::size_t l = m.layers.size(); l-- > 0;) {
    const auto& layer = m.layers[l];
    const auto& lt = tape.layers[l];
    auto& gl = g.layers[l];
    const bool linear = layer.activation == Activation::identity;

    Tensor d_pre;  // gradient at the activation argument
    Tensor d_skip;  // gradient at T·α
    if (m.variant == Variant::standard) {
      d_pre = linear ? std::move(d_z) : hadamard(d_z, activate_grad(layer.activation, lt.pre_activation));
      d_skip = d_pre;
    } else {
      d_pre = linear ? d_z : hadamard(d_z, activate_grad(layer.activation, lt.pre_activation));
      d_skip = std::move(d_z);
    }

    gl.t = sum_outer_batched(d_skip, lt.input);
    Tensor d_alpha = left_multiply_batched(transpose(layer.t), d_skip);

    gl.q = matmul_tn(flat(lt.mixed), flat(d_pre));
    const Tensor d_mixed = matmul_nt(flat(d_pre), layer.q).reshaped({batch, s.channels, s.modes});

    Tensor d_changed;
    hybrid_product_adjoint(lt.basis_changed, layer.d, d_mixed, gl.d, d_changed);

    gl.p = matmul_tn(flat(lt.input), flat(d_changed));
    d_alpha = d_alpha + matmul_nt(flat(d_changed), layer.p).reshaped({batch, s.channels, s.modes});
    d_z = std::move(d_alpha);
  }

  // lift: z = (L↑·α)·R↑
  g.lift_right = matmul_tn(flat(tape.lifted_left), flat(d_z));
  const Tensor d_lifted = matmul_nt(flat(d_z), m.lift_right).reshaped({batch, s.channels, s.p_u});
  g.lift_left = sum_outer_batched(d_lifted, tape.coefficients);
  return g;
}

PcaNetTapedForward forward_with_tape(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                                     const Tensor& f) {
  if (f.rank() != 3 || f.extent(1) != m.d_in || f.extent(2) != basis_u.n_points) {
    throw ShapeError("forward_with_tape: input " + shape_string(f.shape()) + " does not match the network");
  }
  if (basis_u.size() != m.p_u || basis_v.size() != m.p_v) {
    throw ShapeError("forward_with_tape: PCA sizes do not match the network");
  }
  const std::size_t batch = f.extent(0);
  PcaNetTapedForward out;
  out.tape.batch = batch;
  Tensor h = encode(basis_u, f.reshaped({batch * m.d_in, basis_u.n_points})).reshaped({batch, m.d_in * m.p_u});
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    out.tape.inputs.push_back(h);
    h = matmul(h, m.weights[l]);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < h.cols(); ++j) h(b, j) += m.biases[l][j];
    if (l + 1 < m.weights.size()) {
      out.tape.pre_activations.push_back(h);
      h = activate(m.activation, h);
    }
  }
  out.predictions =
      decode(basis_v, h.reshaped({batch * m.d_out, m.p_v})).reshaped({batch, m.d_out, basis_v.n_points});
  return out;
}

PcaNetGrads backward(const PcaNetParams& m, const PcaBasis& basis_v, const PcaNetTape& tape,
                     const Tensor& d_predictions) {
  const std::size_t batch = tape.batch;
  if (tape.inputs.size() != m.weights.size() || d_predictions.shape() != Shape{batch, m.d_out, basis_v.n_points}) {
    throw ShapeError("backward: tape or upstream gradient does not match the PCA-Net");
  }
  PcaNetGrads g = zeros_like(m);
  Tensor d_h = matmul_nt(d_predictions.reshaped({batch * m.d_out, basis_v.n_points}), basis_v.components)
                   .reshaped({batch, m.d_out * m.p_v});
  for (std::size_t l = m.weights.size(); l-- > 0;) {
    if (l + 1 < m.weights.size()) d_h = hadamard(d_h, activate_grad(m.activation, tape.pre_activations[l]));
    g.weights[l] = matmul_tn(tape.inputs[l], d_h);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < d_h.cols(); ++j) g.biases[l][j] += d_h(b, j);
    if (l > 0) d_h = matmul_nt(d_h, m.weights[l]);
  }
  return g;
}

double finite_diff_check(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                         const Tensor& f_batch, const Tensor& g_batch, double h, LossKind loss) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw std::invalid_argument("finite_diff_check: h must lie in [1e-7, 1e-3]");
  const TapedForward fwd = forward_with_tape(m, basis_u, basis_v, f_batch);
  const GitNetGrads analytic =
      backward(m, basis_v, fwd.tape, loss_gradient(fwd.predictions, g_batch, loss));

  GitNetParams probe = m;
  const auto probe_tensors = parameter_tensors(probe);
  const auto analytic_tensors = parameter_tensors(analytic);
  auto loss_at = [&] { return empirical_loss(gitnet_forward_batch(probe, basis_u, basis_v, f_batch), g_batch, loss); };

  double worst = 0.0;
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    Tensor& param = *probe_tensors[t];
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double saved = param[i];
      param[i] = saved + h;
      const double plus = loss_at();
      param[i] = saved - h;
      const double minus = loss_at();
      param[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = (*analytic_tensors[t])[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace gitnet
