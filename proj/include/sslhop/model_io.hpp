#pragma once

#include "sslhop/hoptree.hpp"
#include "sslhop/llsr.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sslhop {

struct Model {
  HopTree tree;
  std::optional<LLSRModel> head;
};

// Binary model container: 8-byte magic "SSLHOP01", a section table of
// (tag, offset, size) entries, then the section payloads. All integers are
// little-endian unsigned 64-bit, reals IEEE-754 binary64, vectors
// length-prefixed. Serialization is deterministic: equal models produce
// equal bytes, and deserialize(serialize(m)) round-trips bit-identically.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Feature matrix container: magic "SSLFEA01", u64 rows, u64 cols, then
// row-major binary64 values.
void save_features(const Matrix& features, const std::string& path);
Matrix load_features(const std::string& path);

}  // namespace sslhop
