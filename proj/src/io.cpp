#include "gitnet/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gitnet {

namespace {

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint64_t v) {
    if (v > 0xffffffffULL) throw IoError("value " + std::to_string(v) + " does not fit a u32 field");
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void tensor(const Tensor& t) {
    for (double v : t.data()) f64(v);
  }
  void pad_to(std::size_t n) { out_.resize(std::max(out_.size(), n), '\0'); }
  std::string take() && { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& in, const char* what) : in_(in), what_(what) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Tensor tensor(Shape shape) {
    std::size_t count = 1;
    for (std::size_t e : shape) {
      if (e != 0 && count > (in_.size() - pos_) / e) throw IoError(std::string(what_) + ": unexpected end of data");
      count *= e;
    }
    need(8 * count);
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = f64();
    return t;
  }
  void magic(const char* m) {
    need(4);
    if (in_.compare(pos_, 4, m) != 0) throw IoError(std::string(what_) + ": bad magic, expected '" + m + "'");
    pos_ += 4;
  }
  void seek(std::size_t p) {
    if (p > in_.size()) throw IoError(std::string(what_) + ": truncated header");
    pos_ = p;
  }
  void finish() const {
    if (pos_ != in_.size()) {
      throw IoError(std::string(what_) + ": " + std::to_string(in_.size() - pos_) + " trailing bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw IoError(std::string(what_) + ": unexpected end of data");
  }
  const std::string& in_;
  const char* what_;
  std::size_t pos_ = 0;
};

constexpr std::uint8_t kVersion = 1;

void write_basis(Writer& w, const PcaBasis& b) {
  w.u32(b.n_points);
  w.u32(b.size());
  w.u8(b.centered ? 1 : 0);
  w.u8(b.degenerate ? 1 : 0);
  w.u32(b.p_cap);
  w.f64(b.energy_threshold);
  w.f64(b.tail_energy);
  w.tensor(b.mean);
  w.tensor(b.singular_values);
  w.tensor(b.components);
}

PcaBasis read_basis(Reader& r) {
  PcaBasis b;
  b.n_points = r.u32();
  const std::size_t p = r.u32();
  b.centered = r.u8() != 0;
  b.degenerate = r.u8() != 0;
  b.p_cap = r.u32();
  b.energy_threshold = r.f64();
  b.tail_energy = r.f64();
  b.mean = r.tensor({b.n_points});
  b.singular_values = r.tensor({p});
  b.components = r.tensor({p, b.n_points});
  return b;
}

Activation read_activation(Reader& r) {
  const std::uint8_t a = r.u8();
  if (a > 2) throw IoError("checkpoint: unknown activation code " + std::to_string(a));
  return static_cast<Activation>(a);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dataset_to_bytes(const Dataset& ds) {
  ds.validate();
  Writer w;
  w.bytes("OPDS", 4);
  w.u8(kVersion);
  w.u32(ds.size());
  w.u32(ds.d_in());
  w.u32(ds.n_points_in());
  w.u32(ds.d_out());
  w.u32(ds.n_points_out());
  w.u64(ds.seed);
  w.pad_to(kOpdsHeaderBytes);
  w.tensor(ds.inputs);
  w.tensor(ds.outputs);
  return std::move(w).take();
}

Dataset dataset_from_bytes(const std::string& bytes) {
  Reader r(bytes, "OPDS1");
  r.magic("OPDS");
  if (const auto v = r.u8(); v != kVersion) throw IoError("OPDS1: unsupported version " + std::to_string(v));
  const std::size_t n = r.u32(), d_in = r.u32(), pts_u = r.u32(), d_out = r.u32(), pts_v = r.u32();
  Dataset ds;
  ds.seed = r.u64();
  r.seek(kOpdsHeaderBytes);
  const std::size_t expected = kOpdsHeaderBytes + 8 * n * (d_in * pts_u + d_out * pts_v);
  if (bytes.size() != expected) {
    throw IoError("OPDS1: header describes " + std::to_string(expected) + " bytes, file has " +
                  std::to_string(bytes.size()));
  }
  ds.inputs = r.tensor({n, d_in, pts_u});
  ds.outputs = r.tensor({n, d_out, pts_v});
  r.finish();
  return ds;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) { write_file(path, dataset_to_bytes(ds)); }

Dataset read_dataset(const std::filesystem::path& path) {
  try {
    return dataset_from_bytes(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string checkpoint_to_bytes(const Checkpoint& c) {
  Writer w;
  w.bytes("GITN", 4);
  w.u8(kVersion);
  if (const auto* m = std::get_if<GitNetParams>(&c.model)) {
    validate(*m);
    const auto& s = m->shape;
    w.u8(0);
    for (std::size_t v : {s.d_in, s.d_out, s.p_u, s.p_v, s.channels, s.modes, s.layers}) w.u32(v);
    w.u8(static_cast<std::uint8_t>(m->variant));
    for (const auto& layer : m->layers) w.u8(static_cast<std::uint8_t>(layer.activation));
  } else {
    const auto& net = std::get<PcaNetParams>(c.model);
    validate(net);
    w.u8(1);
    for (std::size_t v : {net.d_in, net.d_out, net.p_u, net.p_v, net.widths.size()}) w.u32(v);
    for (std::size_t v : net.widths) w.u32(v);
    w.u8(static_cast<std::uint8_t>(net.activation));
  }
  write_basis(w, c.basis_u);
  write_basis(w, c.basis_v);
  std::visit(
      [&](const auto& m) {
        for (const Tensor* t : parameter_tensors(m)) w.tensor(*t);
      },
      c.model);
  return std::move(w).take();
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  Reader r(bytes, "GITN1");
  r.magic("GITN");
  if (const auto v = r.u8(); v != kVersion) throw IoError("GITN1: unsupported version " + std::to_string(v));
  Checkpoint c;
  const std::uint8_t arch = r.u8();
  if (arch == 0) {
    GitNetShape s;
    s.d_in = r.u32();
    s.d_out = r.u32();
    s.p_u = r.u32();
    s.p_v = r.u32();
    s.channels = r.u32();
    s.modes = r.u32();
    s.layers = r.u32();
    const std::uint8_t variant = r.u8();
    if (variant > 1) throw IoError("GITN1: unknown variant code " + std::to_string(variant));
    if (s.layers == 0 || s.layers > 1024) throw IoError("GITN1: implausible layer count");
    const double ch = static_cast<double>(s.channels), k = static_cast<double>(s.modes);
    const double scalars = ch * static_cast<double>(s.d_in + s.d_out) + k * static_cast<double>(s.p_u + s.p_v) +
                           static_cast<double>(s.layers) * (2 * k * k + k * ch * ch + ch * ch);
    if (8.0 * scalars > static_cast<double>(bytes.size())) throw IoError("GITN1: unexpected end of data");
    GitNetParams m;
    m.shape = s;
    m.variant = static_cast<Variant>(variant);
    m.lift_left = Tensor({s.channels, s.d_in});
    m.lift_right = Tensor({s.p_u, s.modes});
    for (std::size_t l = 0; l < s.layers; ++l) {
      GitLayerParams layer;
      layer.activation = read_activation(r);
      layer.t = Tensor({s.channels, s.channels});
      layer.p = Tensor({s.modes, s.modes});
      layer.d = Tensor({s.channels, s.channels, s.modes});
      layer.q = Tensor({s.modes, s.modes});
      m.layers.push_back(std::move(layer));
    }
    m.proj_left = Tensor({s.d_out, s.channels});
    m.proj_right = Tensor({s.modes, s.p_v});
    c.model = std::move(m);
  } else if (arch == 1) {
    PcaNetParams m;
    m.d_in = r.u32();
    m.d_out = r.u32();
    m.p_u = r.u32();
    m.p_v = r.u32();
    const std::size_t nw = r.u32();
    if (nw < 2 || nw > 1024) throw IoError("GITN1: implausible PCA-Net depth");
    for (std::size_t i = 0; i < nw; ++i) m.widths.push_back(r.u32());
    m.activation = read_activation(r);
    double scalars = 0.0;
    for (std::size_t l = 0; l + 1 < nw; ++l)
      scalars += static_cast<double>(m.widths[l] + 1) * static_cast<double>(m.widths[l + 1]);
    if (8.0 * scalars > static_cast<double>(bytes.size())) throw IoError("GITN1: unexpected end of data");
    for (std::size_t l = 0; l + 1 < nw; ++l) {
      m.weights.emplace_back(Shape{m.widths[l], m.widths[l + 1]});
      m.biases.emplace_back(Shape{m.widths[l + 1]});
    }
    c.model = std::move(m);
  } else {
    throw IoError("GITN1: unknown architecture code " + std::to_string(arch));
  }
  c.basis_u = read_basis(r);
  c.basis_v = read_basis(r);
  std::visit(
      [&](auto& m) {
        for (Tensor* t : parameter_tensors(m)) *t = r.tensor(t->shape());
      },
      c.model);
  r.finish();
  try {
    validate(c.basis_u);
    validate(c.basis_v);
    std::visit([](const auto& m) { validate(m); }, c.model);
  } catch (const std::exception& e) {
    throw IoError(std::string("GITN1: inconsistent checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file(path, checkpoint_to_bytes(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_bytes(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace gitnet
