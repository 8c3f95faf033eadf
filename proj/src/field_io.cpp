#include "hwlab/field_io.hpp"

#include "hwlab/error.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace hwlab::io {

namespace {

constexpr std::array<char, 4> kMagic{'H', 'W', 'F', 'D'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "field container is little-endian; add byte swapping for this platform");

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), ErrorCode::io, "truncated field container");
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string() + " for writing");
  const Grid& g = f.grid();
  os.write(kMagic.data(), kMagic.size());
  put(os, kVersion);
  put(os, static_cast<std::uint32_t>(g.dim()));
  put(os, static_cast<std::uint32_t>(g.points_per_axis()));
  put(os, g.half_length());
  put(os, static_cast<std::uint32_t>(f.time() ? 1 : 0));
  put(os, f.time().value_or(0.0));
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(complex)));
  require(static_cast<bool>(os), ErrorCode::io, "write failed for " + path.string());

  nlohmann::json meta = {
      {"format", "hwlab-field"},
      {"version", kVersion},
      {"dim", g.dim()},
      {"half_length", g.half_length()},
      {"points_per_axis", g.points_per_axis()},
      {"samples", g.size()},
      {"layout", "row-major, last axis fastest"},
      {"scalar", "complex128 little-endian (re, im)"},
      {"header_bytes", 36},
  };
  if (f.time()) meta["time"] = *f.time();
  std::ofstream js(path.string() + ".json");
  js << meta.dump(2) << '\n';
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  require(magic == kMagic, ErrorCode::io, path.string() + " is not a field container");
  const auto version = get<std::uint32_t>(is);
  require(version == kVersion, ErrorCode::incompatible_version,
          "unsupported field container version " + std::to_string(version));
  const auto dim = get<std::uint32_t>(is);
  const auto n = get<std::uint32_t>(is);
  const auto half_length = get<double>(is);
  const auto has_time = get<std::uint32_t>(is);
  const auto time = get<double>(is);
  Grid grid(static_cast<int>(dim), half_length, static_cast<int>(n));
  Eigen::ArrayXcd values(grid.size());
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(complex)));
  require(static_cast<bool>(is), ErrorCode::io, "truncated field data in " + path.string());
  return Field(grid, std::move(values), has_time ? std::optional<double>(time) : std::nullopt);
}

}  // namespace hwlab::io
