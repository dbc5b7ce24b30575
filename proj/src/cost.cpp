#include "gitnet/cost.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gitnet/flops.hpp"

namespace gitnet {

namespace {

constexpr const char* kColumns =
    "architecture,n_points,d_in,d_out,p_u,p_v,channels,modes,layers,encode,lift,layer_flops,project,decode,flops";

std::uint64_t activation_flops(Activation a) { return a == Activation::gelu ? kGeluFlops : 0; }

}  // namespace

CostReport flops_gitnet_exact(std::size_t n_points, std::size_t d_in, std::size_t d_out, std::size_t p_u,
                              std::size_t p_v, std::size_t channels, std::size_t modes, std::size_t layers,
                              Activation hidden) {
  const std::uint64_t np = n_points, di = d_in, dout = d_out, pu = p_u, pv = p_v, c = channels, k = modes;
  CostReport r;
  r.architecture = "gitnet";
  r.n_points = n_points;
  r.channels = channels;
  r.modes = modes;
  r.layers = layers;
  r.p_u = p_u;
  r.p_v = p_v;
  r.d_in = d_in;
  r.d_out = d_out;
  r.breakdown.encode = 2 * di * pu * np;
  r.breakdown.lift = 2 * (c * di * pu + c * pu * k);
  const std::uint64_t linear_layer = 2 * (c * k * k + c * c * k + c * k * k + c * c * k) + c * k;
  for (std::size_t l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    r.breakdown.layers += linear_layer + (last ? 0 : activation_flops(hidden) * c * k);
  }
  r.breakdown.project = 2 * (dout * c * k + dout * k * pv);
  r.breakdown.decode = 2 * dout * pv * np;
  r.flops = r.breakdown.total();
  return r;
}

CostReport flops_gitnet_exact(const GitNetParams& m, std::size_t n_points_in, std::size_t n_points_out) {
  const auto& s = m.shape;
  CostReport r = flops_gitnet_exact(n_points_in, s.d_in, s.d_out, s.p_u, s.p_v, s.channels, s.modes, 0);
  r.layers = m.layers.size();
  const std::uint64_t c = s.channels, k = s.modes;
  for (const auto& layer : m.layers) {
    r.breakdown.layers += 2 * (c * k * k + c * c * k + c * k * k + c * c * k) + c * k +
                          activation_flops(layer.activation) * c * k;
  }
  r.breakdown.decode = 2 * std::uint64_t{s.d_out} * s.p_v * n_points_out;
  r.flops = r.breakdown.total();
  return r;
}

CostReport flops_pcanet_exact(std::size_t n_points, std::size_t d_in, std::size_t d_out, std::size_t p_u,
                              std::size_t p_v, const std::vector<std::size_t>& widths, Activation activation) {
  if (widths.size() < 2) throw std::invalid_argument("flops_pcanet_exact: need at least two widths");
  CostReport r;
  r.architecture = "pcanet";
  r.n_points = n_points;
  r.layers = widths.size() - 1;
  r.p_u = p_u;
  r.p_v = p_v;
  r.d_in = d_in;
  r.d_out = d_out;
  r.breakdown.encode = 2 * std::uint64_t{d_in} * p_u * n_points;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    r.breakdown.layers += 2 * std::uint64_t{widths[l]} * widths[l + 1];
    if (l + 2 < widths.size()) r.breakdown.layers += activation_flops(activation) * widths[l + 1];
  }
  r.breakdown.decode = 2 * std::uint64_t{d_out} * p_v * n_points;
  r.flops = r.breakdown.total();
  return r;
}

double flops_fno_scaling(std::size_t n_points, std::size_t channels, std::size_t layers, std::size_t /*modes*/) {
  const double np = static_cast<double>(n_points), c = static_cast<double>(channels);
  const double fft = np > 1.0 ? kFftFlopsPerPoint * c * np * std::log2(np) * 2.0 : 0.0;
  return static_cast<double>(layers) * (fft + 2.0 * np * c * c);
}

double flops_pod_deeponet_scaling(std::size_t n_points, std::size_t channels, std::size_t modes,
                                  std::size_t layers) {
  const double np = static_cast<double>(n_points), c = static_cast<double>(channels);
  return static_cast<double>(layers) * 2.0 * np * c * c + 2.0 * c * static_cast<double>(modes) * np + np;
}

CostReport scaling_report(std::string architecture, double flops, std::size_t n_points, std::size_t channels,
                          std::size_t modes, std::size_t layers) {
  CostReport r;
  r.architecture = std::move(architecture);
  r.n_points = n_points;
  r.channels = channels;
  r.modes = modes;
  r.layers = layers;
  r.breakdown.layers = static_cast<std::uint64_t>(std::llround(flops));
  r.flops = r.breakdown.total();
  return r;
}

std::uint64_t instrumented_flops(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v) {
  const Tensor f({m.shape.d_in, basis_u.n_points});
  FlopScope scope;
  (void)gitnet_forward(m, basis_u, basis_v, f);
  return scope.count();
}

std::uint64_t instrumented_flops(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v) {
  const Tensor f({m.d_in, basis_u.n_points});
  FlopScope scope;
  (void)pcanet_forward(m, basis_u, basis_v, f);
  return scope.count();
}

std::string cost_csv_header(bool instrumented) {
  return std::string(kColumns) + (instrumented ? ",instrumented" : "");
}

std::string cost_csv_row(const CostReport& r, std::optional<std::uint64_t> instrumented) {
  std::ostringstream os;
  os << r.architecture << ',' << r.n_points << ',' << r.d_in << ',' << r.d_out << ',' << r.p_u << ',' << r.p_v
     << ',' << r.channels << ',' << r.modes << ',' << r.layers << ',' << r.breakdown.encode << ','
     << r.breakdown.lift << ',' << r.breakdown.layers << ',' << r.breakdown.project << ',' << r.breakdown.decode
     << ',' << r.flops;
  if (instrumented) os << ',' << *instrumented;
  return os.str();
}

std::vector<CostCsvRow> parse_cost_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("cost csv: empty input");
  bool with_instrumented;
  if (line == cost_csv_header(false)) {
    with_instrumented = false;
  } else if (line == cost_csv_header(true)) {
    with_instrumented = true;
  } else {
    throw std::invalid_argument("cost csv: unexpected header '" + line + "'");
  }
  std::vector<CostCsvRow> rows;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    const std::size_t want = with_instrumented ? 16 : 15;
    if (cells.size() != want) {
      throw std::invalid_argument("cost csv line " + std::to_string(lineno) + ": expected " + std::to_string(want) +
                                  " fields");
    }
    auto u = [&](std::size_t i) { return static_cast<std::uint64_t>(std::stoull(cells[i])); };
    CostCsvRow row;
    CostReport& r = row.report;
    r.architecture = cells[0];
    r.n_points = u(1);
    r.d_in = u(2);
    r.d_out = u(3);
    r.p_u = u(4);
    r.p_v = u(5);
    r.channels = u(6);
    r.modes = u(7);
    r.layers = u(8);
    r.breakdown = {u(9), u(10), u(11), u(12), u(13)};
    r.flops = u(14);
    if (r.flops != r.breakdown.total()) {
      throw std::invalid_argument("cost csv line " + std::to_string(lineno) + ": flops != sum of stages");
    }
    if (with_instrumented && !cells[15].empty()) row.instrumented = u(15);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gitnet
