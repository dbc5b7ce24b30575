#include "gitnet/gitnet.hpp"

#include <cmath>
#include <string>

#include "gitnet/flops.hpp"
#include "gitnet/rng.hpp"

namespace gitnet {

namespace {

// Views a single-sample [r×c] array as a batch of one.
Tensor as_batch(const Tensor& x) {
  if (x.rank() == 2) return x.reshaped({1, x.rows(), x.cols()});
  if (x.rank() == 3) return x;
  throw ShapeError("expected [r×c] or [B×r×c], got " + shape_string(x.shape()));
}

Tensor restore_rank(Tensor x, std::size_t rank) {
  if (rank == 2) return std::move(x).reshaped({x.extent(1), x.extent(2)});
  return x;
}

void require_extent(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(expected) + ", got " + shape_string(t.shape()));
  }
}

void glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  fill_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template <class Params, class Ptr>
std::vector<Ptr> collect(Params& m) {
  std::vector<Ptr> out{&m.lift_left, &m.lift_right};
  for (auto& layer : m.layers) {
    out.push_back(&layer.t);
    out.push_back(&layer.p);
    out.push_back(&layer.d);
    out.push_back(&layer.q);
  }
  out.push_back(&m.proj_left);
  out.push_back(&m.proj_right);
  return out;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::gelu: return "gelu";
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
  }
  return "?";
}

std::string_view to_string(Variant v) {
  return v == Variant::standard ? "standard" : "pre_residual";
}

Activation parse_activation(std::string_view s) {
  if (s == "gelu") return Activation::gelu;
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "' (gelu|identity|relu)");
}

Variant parse_variant(std::string_view s) {
  if (s == "standard") return Variant::standard;
  if (s == "pre_residual") return Variant::pre_residual;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "' (standard|pre_residual)");
}

Tensor activate(Activation a, const Tensor& x) {
  switch (a) {
    case Activation::gelu: return gelu(x);
    case Activation::identity: return x;
    case Activation::relu: {
      Tensor y = x;
      for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
      return y;
    }
  }
  return x;
}

Tensor activate_grad(Activation a, const Tensor& x) {
  switch (a) {
    case Activation::gelu: return gelu_grad(x);
    case Activation::identity: return Tensor(x.shape(), 1.0);
    case Activation::relu: {
      Tensor y = x;
      for (double& v : y.data()) v = v > 0.0 ? 1.0 : 0.0;
      return y;
    }
  }
  return x;
}

std::vector<Tensor*> parameter_tensors(GitNetParams& m) { return collect<GitNetParams, Tensor*>(m); }

std::vector<const Tensor*> parameter_tensors(const GitNetParams& m) {
  return collect<const GitNetParams, const Tensor*>(m);
}

std::size_t parameter_count(const GitNetParams& m) {
  std::size_t n = 0;
  for (const Tensor* t : parameter_tensors(m)) n += t->size();
  return n;
}

GitNetParams zeros_like(const GitNetParams& m) {
  GitNetParams z = m;
  for (Tensor* t : parameter_tensors(z)) t->fill(0.0);
  return z;
}

void validate(const GitNetParams& m) {
  const auto& s = m.shape;
  if (s.d_in == 0 || s.d_out == 0 || s.p_u == 0 || s.p_v == 0 || s.channels == 0 || s.modes == 0) {
    throw ShapeError("GitNetParams: all sizes must be >= 1");
  }
  if (m.layers.empty() || m.layers.size() != s.layers) {
    throw ShapeError("GitNetParams: expected " + std::to_string(s.layers) + " layers (>= 1), found " +
                     std::to_string(m.layers.size()));
  }
  const std::size_t c = s.channels, k = s.modes;
  require_extent(m.lift_left, {c, s.d_in}, "lift_left");
  require_extent(m.lift_right, {s.p_u, k}, "lift_right");
  require_extent(m.proj_left, {s.d_out, c}, "proj_left");
  require_extent(m.proj_right, {k, s.p_v}, "proj_right");
  for (const auto& layer : m.layers) {
    require_extent(layer.t, {c, c}, "layer T");
    require_extent(layer.p, {k, k}, "layer P");
    require_extent(layer.d, {c, c, k}, "layer D");
    require_extent(layer.q, {k, k}, "layer Q");
  }
  if (m.layers.back().activation != Activation::identity) {
    throw ShapeError("GitNetParams: the last layer must use the identity activation");
  }
  for (const Tensor* t : parameter_tensors(m)) require_finite(*t, "GitNetParams");
}

Tensor hybrid_product(const Tensor& alpha, const Tensor& d) {
  const Tensor a = as_batch(alpha);
  const std::size_t batch = a.extent(0), c = a.extent(1), k = a.extent(2);
  if (d.shape() != Shape{c, c, k}) {
    throw ShapeError("hybrid_product: alpha " + shape_string(alpha.shape()) + " incompatible with D " +
                     shape_string(d.shape()));
  }
  Tensor out({batch, c, k});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < c; ++co) {
      double* orow = out.raw() + (b * c + co) * k;
      for (std::size_t ci = 0; ci < c; ++ci) {
        const double* drow = d.raw() + (ci * c + co) * k;
        const double* arow = a.raw() + (b * c + ci) * k;
        for (std::size_t j = 0; j < k; ++j) orow[j] += drow[j] * arow[j];
      }
    }
  }
  detail::add_flops(2 * batch * c * c * k);
  return restore_rank(std::move(out), alpha.rank());
}

Tensor git_layer_forward(const GitLayerParams& p, const Tensor& alpha, Variant variant) {
  const Tensor a = as_batch(alpha);
  const std::size_t batch = a.extent(0), c = a.extent(1), k = a.extent(2);
  if (p.t.shape() != Shape{c, c} || p.p.shape() != Shape{k, k} || p.q.shape() != Shape{k, k}) {
    throw ShapeError("git_layer_forward: layer parameters do not match input " + shape_string(alpha.shape()));
  }
  const Tensor alpha_p = matmul(a.reshaped({batch * c, k}), p.p).reshaped({batch, c, k});
  const Tensor mixed = hybrid_product(alpha_p, p.d);
  Tensor transformed = matmul(mixed.reshaped({batch * c, k}), p.q).reshaped({batch, c, k});
  const Tensor skip = left_multiply_batched(p.t, a);
  Tensor out = variant == Variant::standard ? activate(p.activation, skip + transformed)
                                            : skip + activate(p.activation, transformed);
  return restore_rank(std::move(out), alpha.rank());
}

Tensor lift(const GitNetParams& m, const Tensor& alpha) {
  const Tensor a = as_batch(alpha);
  const std::size_t batch = a.extent(0);
  if (a.extent(1) != m.shape.d_in || a.extent(2) != m.shape.p_u) {
    throw ShapeError("lift: expected [" + std::to_string(m.shape.d_in) + "x" + std::to_string(m.shape.p_u) +
                     "] coefficients, got " + shape_string(alpha.shape()));
  }
  const Tensor left = left_multiply_batched(m.lift_left, a);
  Tensor out = matmul(left.reshaped({batch * m.shape.channels, m.shape.p_u}), m.lift_right)
                   .reshaped({batch, m.shape.channels, m.shape.modes});
  return restore_rank(std::move(out), alpha.rank());
}

Tensor project(const GitNetParams& m, const Tensor& z) {
  const Tensor a = as_batch(z);
  const std::size_t batch = a.extent(0);
  if (a.extent(1) != m.shape.channels || a.extent(2) != m.shape.modes) {
    throw ShapeError("project: expected [" + std::to_string(m.shape.channels) + "x" +
                     std::to_string(m.shape.modes) + "], got " + shape_string(z.shape()));
  }
  const Tensor left = left_multiply_batched(m.proj_left, a);
  Tensor out = matmul(left.reshaped({batch * m.shape.d_out, m.shape.modes}), m.proj_right)
                   .reshaped({batch, m.shape.d_out, m.shape.p_v});
  return restore_rank(std::move(out), z.rank());
}

Tensor gitnet_coefficients(const GitNetParams& m, const Tensor& alpha) {
  Tensor z = lift(m, alpha);
  for (const auto& layer : m.layers) z = git_layer_forward(layer, z, m.variant);
  return project(m, z);
}

Tensor gitnet_forward_batch(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                            const Tensor& f) {
  if (f.rank() != 3 || f.extent(1) != m.shape.d_in || f.extent(2) != basis_u.n_points) {
    throw ShapeError("gitnet_forward: expected [Bx" + std::to_string(m.shape.d_in) + "x" +
                     std::to_string(basis_u.n_points) + "] input, got " + shape_string(f.shape()));
  }
  if (basis_u.size() != m.shape.p_u || basis_v.size() != m.shape.p_v) {
    throw ShapeError("gitnet_forward: PCA sizes (" + std::to_string(basis_u.size()) + ", " +
                     std::to_string(basis_v.size()) + ") do not match the network (" + std::to_string(m.shape.p_u) +
                     ", " + std::to_string(m.shape.p_v) + ")");
  }
  const std::size_t batch = f.extent(0);
  const Tensor alpha = encode(basis_u, f.reshaped({batch * m.shape.d_in, basis_u.n_points}))
                           .reshaped({batch, m.shape.d_in, m.shape.p_u});
  const Tensor beta = gitnet_coefficients(m, alpha);
  return decode(basis_v, beta.reshaped({batch * m.shape.d_out, m.shape.p_v}))
      .reshaped({batch, m.shape.d_out, basis_v.n_points});
}

Tensor gitnet_forward(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v, const Tensor& f) {
  if (f.rank() != 2) throw ShapeError("gitnet_forward: expected [d_in×N_u], got " + shape_string(f.shape()));
  Tensor out = gitnet_forward_batch(m, basis_u, basis_v, f.reshaped({1, f.rows(), f.cols()}));
  return std::move(out).reshaped({out.extent(1), out.extent(2)});
}

GitNetParams init_params(const GitNetShape& shape, Variant variant, std::uint64_t seed, Activation hidden) {
  if (shape.d_in == 0 || shape.d_out == 0 || shape.p_u == 0 || shape.p_v == 0 || shape.channels == 0 ||
      shape.modes == 0 || shape.layers == 0) {
    throw ShapeError("init_params: all sizes must be >= 1");
  }
  const std::size_t c = shape.channels, k = shape.modes;
  Rng rng(seed);
  GitNetParams m;
  m.shape = shape;
  m.variant = variant;
  m.lift_left = Tensor({c, shape.d_in});
  glorot(m.lift_left, shape.d_in, c, rng);
  m.lift_right = Tensor({shape.p_u, k});
  glorot(m.lift_right, shape.p_u, k, rng);
  m.layers.resize(shape.layers);
  for (std::size_t l = 0; l < shape.layers; ++l) {
    auto& layer = m.layers[l];
    layer.t = Tensor({c, c});
    glorot(layer.t, c, c, rng);
    layer.p = Tensor({k, k});
    glorot(layer.p, k, k, rng);
    layer.d = Tensor({c, c, k});
    glorot(layer.d, c, c, rng);
    layer.q = Tensor({k, k});
    glorot(layer.q, k, k, rng);
    layer.activation = l + 1 == shape.layers ? Activation::identity : hidden;
  }
  m.proj_left = Tensor({shape.d_out, c});
  glorot(m.proj_left, c, shape.d_out, rng);
  m.proj_right = Tensor({k, shape.p_v});
  glorot(m.proj_right, k, shape.p_v, rng);
  return m;
}

}  // namespace gitnet
