#include "sslhop/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sslhop {

namespace {

constexpr char kModelMagic[8] = {'S', 'S', 'L', 'H', 'O', 'P', '0', '1'};
constexpr char kFeatureMagic[8] = {'S', 'S', 'L', 'F', 'E', 'A', '0', '1'};
constexpr char kConfigTag[8] = {'C', 'O', 'N', 'F', 'I', 'G', ' ', ' '};
constexpr char kTreeTag[8] = {'H', 'O', 'P', 'T', 'R', 'E', 'E', ' '};
constexpr char kHeadTag[8] = {'L', 'L', 'S', 'R', 'H', 'E', 'A', 'D'};

using Bytes = std::vector<std::uint8_t>;

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_i64(Bytes& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_vector(Bytes& out, const Vector& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

void put_matrix(Bytes& out, const Matrix& m) {
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

struct Cursor {
  const Bytes& buf;
  std::size_t at;
  std::size_t end;

  void need(std::size_t n) const {
    if (at + n > end) throw std::runtime_error("truncated model file");
  }
  std::uint8_t get_u8() {
    need(1);
    return buf[at++];
  }
  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[at + static_cast<std::size_t>(i)]) << (8 * i);
    at += 8;
    return v;
  }
  std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }
  double get_f64() { return std::bit_cast<double>(get_u64()); }
  Vector get_vector() {
    const auto n = get_u64();
    need(8 * n);
    Vector v(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = get_f64();
    return v;
  }
  Matrix get_matrix() {
    const auto rows = get_u64();
    const auto cols = get_u64();
    need(8 * rows * cols);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::uint64_t c = 0; c < cols; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_f64();
    return m;
  }
  void finish() const {
    if (at != end) throw std::runtime_error("trailing bytes in model section");
  }
};

Bytes encode_config(const HopConfig& c) {
  Bytes out;
  put_u64(out, static_cast<std::uint64_t>(c.num_levels));
  put_u64(out, static_cast<std::uint64_t>(c.window));
  put_u64(out, static_cast<std::uint64_t>(c.stride));
  put_u64(out, static_cast<std::uint64_t>(c.pool));
  put_f64(out, c.energy_forward);
  put_f64(out, c.energy_cutoff);
  put_u64(out, static_cast<std::uint64_t>(c.aggregation));
  put_u64(out, static_cast<std::uint64_t>(c.patch_cap));
  return out;
}

HopConfig decode_config(Cursor cur) {
  HopConfig c;
  c.num_levels = static_cast<int>(cur.get_u64());
  c.window = static_cast<int>(cur.get_u64());
  c.stride = static_cast<int>(cur.get_u64());
  c.pool = static_cast<int>(cur.get_u64());
  c.energy_forward = cur.get_f64();
  c.energy_cutoff = cur.get_f64();
  const auto agg = cur.get_u64();
  if (agg > 2) throw std::runtime_error("invalid aggregation in model file");
  c.aggregation = static_cast<Aggregation>(agg);
  c.patch_cap = static_cast<std::size_t>(cur.get_u64());
  cur.finish();
  validate(c);
  return c;
}

Bytes encode_tree(const HopTree& tree) {
  Bytes out;
  put_u64(out, static_cast<std::uint64_t>(tree.input_height));
  put_u64(out, static_cast<std::uint64_t>(tree.input_width));
  put_u64(out, static_cast<std::uint64_t>(tree.input_channels));
  put_u64(out, tree.units.size());
  for (const SaabUnit& u : tree.units) {
    put_u64(out, static_cast<std::uint64_t>(u.level));
    put_i64(out, u.parent_unit);
    put_i64(out, u.parent_kernel);
    put_u64(out, static_cast<std::uint64_t>(u.in_height));
    put_u64(out, static_cast<std::uint64_t>(u.in_width));
    put_u64(out, static_cast<std::uint64_t>(u.in_channels));
    put_u64(out, static_cast<std::uint64_t>(u.out_height));
    put_u64(out, static_cast<std::uint64_t>(u.out_width));
    put_u64(out, static_cast<std::uint64_t>(u.kernels.dim()));
    put_vector(out, u.kernels.residual_mean);
    put_matrix(out, u.kernels.ac_kernels);
    put_vector(out, u.kernels.energies);
  }
  put_u64(out, tree.channels.size());
  for (const ChannelNode& ch : tree.channels) {
    put_u64(out, static_cast<std::uint64_t>(ch.level));
    put_u64(out, static_cast<std::uint64_t>(ch.unit_id));
    put_u64(out, static_cast<std::uint64_t>(ch.kernel_index));
    out.push_back(static_cast<std::uint8_t>(ch.status));
    put_i64(out, ch.child_unit);
    put_f64(out, ch.local_ratio);
    put_f64(out, ch.global_ratio);
  }
  return out;
}

HopTree decode_tree(Cursor cur, const HopConfig& config) {
  HopTree tree;
  tree.config = config;
  tree.input_height = static_cast<int>(cur.get_u64());
  tree.input_width = static_cast<int>(cur.get_u64());
  tree.input_channels = static_cast<int>(cur.get_u64());
  const auto n_units = cur.get_u64();
  tree.units.reserve(n_units);
  for (std::uint64_t i = 0; i < n_units; ++i) {
    SaabUnit u;
    u.level = static_cast<int>(cur.get_u64());
    u.parent_unit = static_cast<int>(cur.get_i64());
    u.parent_kernel = static_cast<int>(cur.get_i64());
    u.in_height = static_cast<int>(cur.get_u64());
    u.in_width = static_cast<int>(cur.get_u64());
    u.in_channels = static_cast<int>(cur.get_u64());
    u.out_height = static_cast<int>(cur.get_u64());
    u.out_width = static_cast<int>(cur.get_u64());
    const auto dim = cur.get_u64();
    if (dim < 1) throw std::runtime_error("invalid unit dimension in model file");
    u.kernels.dc_kernel = Vector::Constant(static_cast<Eigen::Index>(dim),
                                           1.0 / std::sqrt(static_cast<double>(dim)));
    u.kernels.residual_mean = cur.get_vector();
    u.kernels.ac_kernels = cur.get_matrix();
    u.kernels.energies = cur.get_vector();
    if (u.kernels.residual_mean.size() != static_cast<Eigen::Index>(dim) ||
        (u.kernels.ac_kernels.rows() > 0 &&
         u.kernels.ac_kernels.cols() != static_cast<Eigen::Index>(dim)) ||
        u.kernels.energies.size() != 1 + u.kernels.ac_kernels.rows())
      throw std::runtime_error("inconsistent unit data in model file");
    if (u.kernels.ac_kernels.rows() == 0)
      u.kernels.ac_kernels.resize(0, static_cast<Eigen::Index>(dim));
    tree.units.push_back(std::move(u));
  }
  const auto n_channels = cur.get_u64();
  tree.channels.reserve(n_channels);
  for (std::uint64_t i = 0; i < n_channels; ++i) {
    ChannelNode ch;
    ch.level = static_cast<int>(cur.get_u64());
    ch.unit_id = static_cast<int>(cur.get_u64());
    ch.kernel_index = static_cast<int>(cur.get_u64());
    const auto status = cur.get_u8();
    if (status > 2) throw std::runtime_error("invalid channel status in model file");
    ch.status = static_cast<ChannelStatus>(status);
    ch.child_unit = static_cast<int>(cur.get_i64());
    ch.local_ratio = cur.get_f64();
    ch.global_ratio = cur.get_f64();
    if (ch.unit_id < 0 || static_cast<std::uint64_t>(ch.unit_id) >= n_units)
      throw std::runtime_error("inconsistent channel data in model file");
    tree.channels.push_back(ch);
  }
  cur.finish();
  tree.rebuild_layout();
  return tree;
}

Bytes encode_head(const LLSRModel& head) {
  Bytes out;
  put_u64(out, static_cast<std::uint64_t>(head.n_features));
  put_u64(out, static_cast<std::uint64_t>(head.n_classes));
  put_f64(out, head.ridge);
  put_matrix(out, head.weights);
  put_vector(out, head.intercept);
  put_vector(out, head.feature_mean);
  put_vector(out, head.feature_scale);
  return out;
}

LLSRModel decode_head(Cursor cur) {
  LLSRModel head;
  head.n_features = static_cast<int>(cur.get_u64());
  head.n_classes = static_cast<int>(cur.get_u64());
  head.ridge = cur.get_f64();
  head.weights = cur.get_matrix();
  head.intercept = cur.get_vector();
  head.feature_mean = cur.get_vector();
  head.feature_scale = cur.get_vector();
  if (head.weights.rows() != head.n_classes || head.weights.cols() != head.n_features ||
      head.intercept.size() != head.n_classes || head.feature_mean.size() != head.n_features ||
      head.feature_scale.size() != head.n_features)
    throw std::runtime_error("inconsistent head data in model file");
  cur.finish();
  return head;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  std::vector<Bytes> payloads;
  std::vector<const char*> tags;
  payloads.push_back(encode_config(model.tree.config));
  tags.push_back(kConfigTag);
  payloads.push_back(encode_tree(model.tree));
  tags.push_back(kTreeTag);
  if (model.head) {
    payloads.push_back(encode_head(*model.head));
    tags.push_back(kHeadTag);
  }

  Bytes out(kModelMagic, kModelMagic + 8);
  put_u64(out, payloads.size());
  std::size_t offset = out.size() + payloads.size() * 24;  // table entry = tag + offset + size
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    out.insert(out.end(), tags[i], tags[i] + 8);
    put_u64(out, offset);
    put_u64(out, payloads[i].size());
    offset += payloads[i].size();
  }
  for (const Bytes& p : payloads) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic, 8) != 0)
    throw std::runtime_error("not a model file");
  Cursor header{bytes, 8, bytes.size()};
  const auto n_sections = header.get_u64();

  struct Section {
    char tag[8];
    std::size_t offset;
    std::size_t size;
  };
  std::vector<Section> sections;
  for (std::uint64_t i = 0; i < n_sections; ++i) {
    Section s{};
    header.need(8);
    std::memcpy(s.tag, bytes.data() + header.at, 8);
    header.at += 8;
    s.offset = static_cast<std::size_t>(header.get_u64());
    s.size = static_cast<std::size_t>(header.get_u64());
    if (s.offset > bytes.size() || s.size > bytes.size() - s.offset)
      throw std::runtime_error("truncated model file");
    sections.push_back(s);
  }

  auto find = [&](const char* tag) -> const Section* {
    for (const Section& s : sections)
      if (std::memcmp(s.tag, tag, 8) == 0) return &s;
    return nullptr;
  };

  const Section* config_section = find(kConfigTag);
  const Section* tree_section = find(kTreeTag);
  if (!config_section || !tree_section)
    throw std::runtime_error("missing section in model file");

  Model model;
  const HopConfig config = decode_config(
      Cursor{bytes, config_section->offset, config_section->offset + config_section->size});
  model.tree = decode_tree(
      Cursor{bytes, tree_section->offset, tree_section->offset + tree_section->size}, config);
  if (const Section* head_section = find(kHeadTag))
    model.head = decode_head(
        Cursor{bytes, head_section->offset, head_section->offset + head_section->size});
  return model;
}

void save_model(const Model& model, const std::string& path) {
  const Bytes bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

void save_features(const Matrix& features, const std::string& path) {
  Bytes out(kFeatureMagic, kFeatureMagic + 8);
  put_matrix(out, features);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open file: " + path);
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("write failed: " + path);
}

Matrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kFeatureMagic, 8) != 0)
    throw std::runtime_error("not a feature file");
  Cursor cur{bytes, 8, bytes.size()};
  Matrix m = cur.get_matrix();
  cur.finish();
  return m;
}

}  // namespace sslhop
