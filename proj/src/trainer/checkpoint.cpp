#include "sparsescale/trainer/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::trainer {
namespace {

constexpr char kMagic[4] = {'S', 'S', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw SchemaError("checkpoint is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(std::ostream& out, const TinyLM& model) {
  const TinyLMConfig& c = model.config();
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  for (int dim : {c.vocab, c.context, c.embed, c.hidden}) put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  const auto params = model.params();
  put<std::uint64_t>(out, params.size());
  for (double p : params) put<double>(out, p);
  const auto mask = model.mask();
  put<std::uint64_t>(out, mask.size());
  for (std::size_t i = 0; i < mask.size(); i += 8) {
    unsigned char byte = 0;
    for (std::size_t b = 0; b < 8 && i + b < mask.size(); ++b)
      if (mask[i + b]) byte |= static_cast<unsigned char>(1u << b);
    out.put(static_cast<char>(byte));
  }
  if (!out) throw SchemaError("failed to write checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const TinyLM& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open '" + path.string() + "' for writing");
  save_checkpoint(out, model);
}

TinyLM load_checkpoint(std::istream& in, const kernels::KernelTable& kt) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw SchemaError("not a checkpoint (bad magic bytes)");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw SchemaError("unsupported checkpoint version " + std::to_string(version));
  TinyLMConfig cfg;
  cfg.vocab = static_cast<int>(get<std::uint32_t>(in));
  cfg.context = static_cast<int>(get<std::uint32_t>(in));
  cfg.embed = static_cast<int>(get<std::uint32_t>(in));
  cfg.hidden = static_cast<int>(get<std::uint32_t>(in));
  TinyLM model(cfg, 0, kt);
  const auto n = get<std::uint64_t>(in);
  if (n != model.params().size()) throw SchemaError("checkpoint parameter count mismatch");
  std::vector<double> params(n);
  for (double& p : params) p = get<double>(in);
  const auto m = get<std::uint64_t>(in);
  if (m != model.mask().size()) throw SchemaError("checkpoint mask length mismatch");
  std::vector<std::uint8_t> mask(m);
  for (std::size_t i = 0; i < m; i += 8) {
    const int byte = in.get();
    if (byte == std::char_traits<char>::eof()) throw SchemaError("checkpoint is truncated");
    for (std::size_t b = 0; b < 8 && i + b < m; ++b) mask[i + b] = (byte >> b) & 1u;
  }
  model.assign(std::move(params), std::move(mask));
  return model;
}

TinyLM load_checkpoint(const std::filesystem::path& path, const kernels::KernelTable& kt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in, kt);
}

}  // namespace sparsescale::trainer
