#include "gitnet/pcanet.hpp"

#include <cmath>
#include <string>

#include "gitnet/rng.hpp"

namespace gitnet {

std::vector<std::size_t> pcanet_widths(std::size_t d_in, std::size_t p_u, std::size_t d_out, std::size_t p_v,
                                       std::size_t hidden_width, std::size_t layers) {
  if (layers == 0) throw std::invalid_argument("pcanet_widths: need at least one layer");
  std::vector<std::size_t> widths{d_in * p_u};
  for (std::size_t l = 1; l < layers; ++l) widths.push_back(hidden_width);
  widths.push_back(d_out * p_v);
  return widths;
}

PcaNetParams init_pcanet(std::size_t d_in, std::size_t p_u, std::size_t d_out, std::size_t p_v,
                         std::vector<std::size_t> widths, std::uint64_t seed, Activation activation) {
  PcaNetParams m;
  m.d_in = d_in;
  m.d_out = d_out;
  m.p_u = p_u;
  m.p_v = p_v;
  m.widths = std::move(widths);
  m.activation = activation;
  if (m.widths.size() < 2) throw ShapeError("init_pcanet: widths need at least input and output entries");
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < m.widths.size(); ++l) {
    Tensor w({m.widths[l], m.widths[l + 1]});
    fill_uniform(w, std::sqrt(6.0 / static_cast<double>(m.widths[l] + m.widths[l + 1])), rng);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(Shape{m.widths[l + 1]});
  }
  validate(m);
  return m;
}

std::vector<Tensor*> parameter_tensors(PcaNetParams& m) {
  std::vector<Tensor*> out;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    out.push_back(&m.weights[l]);
    out.push_back(&m.biases[l]);
  }
  return out;
}

std::vector<const Tensor*> parameter_tensors(const PcaNetParams& m) {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    out.push_back(&m.weights[l]);
    out.push_back(&m.biases[l]);
  }
  return out;
}

std::size_t parameter_count(const PcaNetParams& m) {
  std::size_t n = 0;
  for (const Tensor* t : parameter_tensors(m)) n += t->size();
  return n;
}

PcaNetParams zeros_like(const PcaNetParams& m) {
  PcaNetParams z = m;
  for (Tensor* t : parameter_tensors(z)) t->fill(0.0);
  return z;
}

void validate(const PcaNetParams& m) {
  if (m.widths.size() < 2 || m.widths.front() != m.d_in * m.p_u || m.widths.back() != m.d_out * m.p_v) {
    throw ShapeError("PcaNetParams: widths must run from d_in·P_u to d_out·P_v");
  }
  if (m.weights.size() + 1 != m.widths.size() || m.biases.size() != m.weights.size()) {
    throw ShapeError("PcaNetParams: expected " + std::to_string(m.widths.size() - 1) + " weight/bias pairs");
  }
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    if (m.weights[l].shape() != Shape{m.widths[l], m.widths[l + 1]} || m.biases[l].shape() != Shape{m.widths[l + 1]}) {
      throw ShapeError("PcaNetParams: layer " + std::to_string(l) + " has shape " +
                       shape_string(m.weights[l].shape()));
    }
    require_finite(m.weights[l], "PcaNetParams weights");
    require_finite(m.biases[l], "PcaNetParams biases");
  }
}

Tensor pcanet_coefficients(const PcaNetParams& m, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != m.widths.front()) {
    throw ShapeError("pcanet: expected [Bx" + std::to_string(m.widths.front()) + "] input, got " +
                     shape_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    h = matmul(h, m.weights[l]);
    for (std::size_t b = 0; b < h.rows(); ++b)
      for (std::size_t j = 0; j < h.cols(); ++j) h(b, j) += m.biases[l][j];
    if (l + 1 < m.weights.size()) h = activate(m.activation, h);
  }
  return h;
}

Tensor pcanet_forward_batch(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                            const Tensor& f) {
  if (f.rank() != 3 || f.extent(1) != m.d_in || f.extent(2) != basis_u.n_points) {
    throw ShapeError("pcanet_forward: input " + shape_string(f.shape()) + " does not match the network");
  }
  if (basis_u.size() != m.p_u || basis_v.size() != m.p_v) {
    throw ShapeError("pcanet_forward: PCA sizes do not match the network");
  }
  const std::size_t batch = f.extent(0);
  const Tensor alpha = encode(basis_u, f.reshaped({batch * m.d_in, basis_u.n_points})).reshaped({batch, m.d_in * m.p_u});
  const Tensor beta = pcanet_coefficients(m, alpha);
  return decode(basis_v, beta.reshaped({batch * m.d_out, m.p_v})).reshaped({batch, m.d_out, basis_v.n_points});
}

Tensor pcanet_forward(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v, const Tensor& f) {
  if (f.rank() != 2) throw ShapeError("pcanet_forward: expected [d_in×N_u], got " + shape_string(f.shape()));
  Tensor out = pcanet_forward_batch(m, basis_u, basis_v, f.reshaped({1, f.rows(), f.cols()}));
  return std::move(out).reshaped({out.extent(1), out.extent(2)});
}

}  // namespace gitnet
