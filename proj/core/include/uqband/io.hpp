#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "uqband/image.hpp"

namespace uqband {

// Grid file formats.
//
// PGM: binary P5, maxval 255 (1 byte/pixel) or 65535 (2 bytes, big-endian).
// Values are scaled by maxval so pixels land in [0,1]; export clips to [0,1]
// and quantizes. Lossy by construction.
//
// CIF1: lossless raw float64 exchange format. 16-byte header:
//   bytes 0..3   magic "CIF1"
//   bytes 4..7   u32 height, little-endian
//   bytes 8..11  u32 width, little-endian
//   bytes 12..15 reserved, zero
// followed by height*width float64 little-endian, row-major.

ImageGrid load_pgm(const std::filesystem::path &path);
void save_pgm(const ImageGrid &grid, const std::filesystem::path &path, int bit_depth = 8);

ImageGrid load_cif(const std::filesystem::path &path);
void save_cif(const ImageGrid &grid, const std::filesystem::path &path);

/// Dispatch on extension: .pgm -> PGM, .cif -> CIF1.
ImageGrid load_image(const std::filesystem::path &path);
void save_image(const ImageGrid &grid, const std::filesystem::path &path);

}  // namespace uqband
