#pragma once

// On-disk formats.
//
// Field: "LGF1", u32 version (1), u32 n, u32 k, u64 seed, u8 kind, then N²
// little-endian doubles row-major with x fastest.
// Mask: text header "MASK n mode" followed by N lines of N characters in {0,1}.
// Path: one "x y" pair per line.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include "lcf/field.hpp"
#include "lcf/grid.hpp"
#include "lcf/path.hpp"
#include "lcf/percolation.hpp"

namespace lcf {

inline constexpr char kFieldMagic[4] = {'L', 'G', 'F', '1'};
inline constexpr std::uint32_t kFieldVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const char* what) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error(std::string("field file truncated in ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

inline std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  return is;
}

}  // namespace detail

inline void write_field(std::ostream& os, const FieldSample& field) {
  os.write(kFieldMagic, 4);
  detail::put_le<std::uint32_t>(os, kFieldVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.spec().n));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.spec().k));
  detail::put_le<std::uint64_t>(os, field.seed());
  detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(field.kind()));
  for (double x : field.values().data()) detail::put_le<double>(os, x);
  if (!os) throw Error("field write failed");
}

inline FieldSample read_field(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw Error("field file truncated in magic");
  if (std::memcmp(magic, kFieldMagic, 4) != 0) throw Error("field file: bad magic (expected LGF1)");
  const auto version = detail::get_le<std::uint32_t>(is, "version");
  if (version != kFieldVersion) throw Error("field file: unsupported version " + std::to_string(version));
  const auto n = detail::get_le<std::uint32_t>(is, "header");
  const auto k = detail::get_le<std::uint32_t>(is, "header");
  const auto seed = detail::get_le<std::uint64_t>(is, "header");
  const auto kind = detail::get_le<std::uint8_t>(is, "header");
  if (kind > 2) throw Error("field file: unknown field kind " + std::to_string(kind));
  if (n == 0 || n > 16) throw Error("field file: n out of range");
  const GridSpec spec = build_grid_spec(static_cast<int>(n), static_cast<int>(k));
  std::vector<double> values(spec.vertex_count());
  for (auto& x : values) {
    x = detail::get_le<double>(is, "values");
    if (!std::isfinite(x)) throw Error("field file: non-finite value");
  }
  return FieldSample(spec, seed, static_cast<FieldKind>(kind), Grid<double>(spec.N, spec.N, std::move(values)));
}

inline void save_field(const std::string& path, const FieldSample& field) {
  auto os = detail::open_out(path, true);
  write_field(os, field);
}

inline FieldSample load_field(const std::string& path) {
  auto is = detail::open_in(path, true);
  return read_field(is);
}

inline void write_mask(std::ostream& os, const SiteMask& mask) {
  const std::int64_t N = mask.width();
  if (N != mask.height() || N <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(N)))
    throw Error("mask write: mask must be N x N with N a power of two");
  if (mask.provenance.find_first_of(" \t\n") != std::string::npos)
    throw Error("mask write: provenance must be a single token");
  os << "MASK " << std::countr_zero(static_cast<std::uint64_t>(N)) << ' ' << mask.provenance << '\n';
  std::string line(static_cast<std::size_t>(N), '0');
  for (std::int64_t y = 0; y < N; ++y) {
    for (std::int64_t x = 0; x < N; ++x) line[static_cast<std::size_t>(x)] = mask.open(x, y) ? '1' : '0';
    os << line << '\n';
  }
  if (!os) throw Error("mask write failed");
}

inline SiteMask read_mask(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error("mask file: missing header");
  std::istringstream hs(header);
  std::string magic, mode;
  int n = -1;
  if (!(hs >> magic >> n >> mode) || magic != "MASK") throw Error("mask file: bad header (expected 'MASK n mode')");
  if (n < 0 || n > 16) throw Error("mask file: n out of range");
  const std::int64_t N = std::int64_t{1} << n;
  SiteMask mask;
  mask.provenance = mode;
  mask.open = Grid<std::uint8_t>(N, N);
  std::string line;
  for (std::int64_t y = 0; y < N; ++y) {
    if (!std::getline(is, line)) throw Error("mask file truncated at row " + std::to_string(y));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<std::int64_t>(line.size()) != N) throw Error("mask file: row " + std::to_string(y) + " has wrong length");
    for (std::int64_t x = 0; x < N; ++x) {
      const char c = line[static_cast<std::size_t>(x)];
      if (c != '0' && c != '1') throw Error("mask file: invalid character in row " + std::to_string(y));
      mask.open(x, y) = c == '1';
    }
  }
  return mask;
}

inline void save_mask(const std::string& path, const SiteMask& mask) {
  auto os = detail::open_out(path, false);
  write_mask(os, mask);
}

inline SiteMask load_mask(const std::string& path) {
  auto is = detail::open_in(path, false);
  return read_mask(is);
}

inline void write_path(std::ostream& os, const LatticePath& path) {
  for (const auto& v : path.vertices()) os << v.x << ' ' << v.y << '\n';
  if (!os) throw Error("path write failed");
}

inline LatticePath read_path(std::istream& is, bool require_self_avoiding = false) {
  std::vector<Vertex> vs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Vertex v;
    std::string rest;
    if (!(ls >> v.x >> v.y) || (ls >> rest)) throw Error("path file: malformed line " + std::to_string(lineno));
    vs.push_back(v);
  }
  return LatticePath(std::move(vs), require_self_avoiding);
}

inline void save_path(const std::string& path, const LatticePath& p) {
  auto os = detail::open_out(path, false);
  write_path(os, p);
}

inline LatticePath load_path(const std::string& path, bool require_self_avoiding = false) {
  auto is = detail::open_in(path, false);
  return read_path(is, require_self_avoiding);
}

}  // namespace lcf
