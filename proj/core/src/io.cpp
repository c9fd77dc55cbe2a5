#include "uqband/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace uqband {

namespace {

// Skips PGM whitespace and '#' comment lines, then reads one unsigned int.
long read_pnm_int(std::istream &in, const std::string &path) {
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#') {
      while (c != '\n' && c != EOF) c = in.get();
    }
    c = in.get();
  }
  long value = -1;
  if (std::isdigit(c)) {
    value = 0;
    while (std::isdigit(c)) {
      value = value * 10 + (c - '0');
      c = in.get();
    }
  }
  if (value < 0) throw IoError("malformed PGM header in " + path);
  return value;
}

void write_u32_le(std::ostream &out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char *>(b), 4);
}

std::uint32_t read_u32_le(std::istream &in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char *>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

ImageGrid load_pgm(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') throw IoError("not a binary PGM (P5): " + path.string());
  const long width = read_pnm_int(in, path.string());
  const long height = read_pnm_int(in, path.string());
  const long maxval = read_pnm_int(in, path.string());
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError("bad PGM dimensions/maxval in " + path.string());
  // read_pnm_int already consumed the single whitespace byte after maxval,
  // so the stream sits at the first pixel byte.
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * bytes);
  in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("truncated PGM pixel data in " + path.string());

  ImageGrid g(static_cast<int>(height), static_cast<int>(width));
  const double scale = 1.0 / static_cast<double>(maxval);
  if (bytes == 1) {
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = raw[k] * scale;
  } else {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const unsigned v = (static_cast<unsigned>(raw[2 * k]) << 8) | raw[2 * k + 1];
      g[k] = v * scale;
    }
  }
  return g;
}

void save_pgm(const ImageGrid &grid, const std::filesystem::path &path, int bit_depth) {
  if (grid.empty()) throw IoError("refusing to write empty grid to " + path.string());
  if (bit_depth != 8 && bit_depth != 16)
    throw ConfigError("PGM bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const int maxval = bit_depth == 8 ? 255 : 65535;
  out << "P5\n" << grid.width() << " " << grid.height() << "\n" << maxval << "\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double clipped = std::clamp(grid[k], 0.0, 1.0);
    const unsigned v = static_cast<unsigned>(std::lround(clipped * maxval));
    if (bit_depth == 8) {
      out.put(static_cast<char>(v));
    } else {
      out.put(static_cast<char>((v >> 8) & 0xff));
      out.put(static_cast<char>(v & 0xff));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ImageGrid load_cif(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "CIF1", 4) != 0)
    throw IoError("bad CIF1 magic in " + path.string());
  const std::uint32_t height = read_u32_le(in);
  const std::uint32_t width = read_u32_le(in);
  read_u32_le(in);  // reserved
  if (!in || height == 0 || width == 0)
    throw IoError("bad CIF1 header in " + path.string());
  ImageGrid g(static_cast<int>(height), static_cast<int>(width));
  static_assert(sizeof(double) == 8);
  in.read(reinterpret_cast<char *>(g.data().data()),
          static_cast<std::streamsize>(g.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(g.size() * sizeof(double)))
    throw IoError("truncated CIF1 payload in " + path.string());
  return g;
}

void save_cif(const ImageGrid &grid, const std::filesystem::path &path) {
  if (grid.empty()) throw IoError("refusing to write empty grid to " + path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("CIF1", 4);
  write_u32_le(out, static_cast<std::uint32_t>(grid.height()));
  write_u32_le(out, static_cast<std::uint32_t>(grid.width()));
  write_u32_le(out, 0);
  out.write(reinterpret_cast<const char *>(grid.data().data()),
            static_cast<std::streamsize>(grid.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

ImageGrid load_image(const std::filesystem::path &path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return load_pgm(path);
  if (ext == ".cif") return load_cif(path);
  throw IoError("unknown image extension '" + ext + "' for " + path.string());
}

void save_image(const ImageGrid &grid, const std::filesystem::path &path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") {
    save_pgm(grid, path);
  } else if (ext == ".cif") {
    save_cif(grid, path);
  } else {
    throw IoError("unknown image extension '" + ext + "' for " + path.string());
  }
}

}  // namespace uqband
