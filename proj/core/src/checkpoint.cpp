#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rlp/error.hpp"
#include "rlp/model.hpp"

namespace rlp {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'L', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::ostream& os, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError("truncated checkpoint " + path.string());
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

std::filesystem::path manifest_path_for(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".json";
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  params.validate();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& l : params.layers) {
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in()));
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out()));
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.activation));
    }
    for (double v : flatten(params)) put_le<double>(out, v);
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params.layers) {
    layers.push_back({{"in", l.in()}, {"out", l.out()}, {"activation", std::string(to_string(l.activation))}});
  }
  const nlohmann::json manifest{{"format", "RLPM"},
                                {"version", kVersion},
                                {"payload", path.filename().string()},
                                {"parameter_count", params.parameter_count()},
                                {"layers", layers}};
  std::ofstream side(manifest_path_for(path));
  if (!side) throw DataError("cannot write checkpoint manifest for " + path.string());
  side << manifest.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError(path.string() + " is not a model checkpoint (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(in, path);
  ModelParams params;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto n_in = get_le<std::uint32_t>(in, path);
    const auto n_out = get_le<std::uint32_t>(in, path);
    const auto act = get_le<std::uint32_t>(in, path);
    if (act > static_cast<std::uint32_t>(Activation::tanh)) throw FormatError("unknown activation code in checkpoint");
    params.layers.push_back(Layer{Matrix(n_out, n_in), std::vector<double>(n_out), static_cast<Activation>(act)});
  }
  params.validate();
  std::vector<double> values(params.parameter_count());
  for (double& v : values) v = get_le<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint " + path.string());
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("non-finite parameter in checkpoint " + path.string());
  }
  unflatten(values, params);
  return params;
}

}  // namespace rlp
