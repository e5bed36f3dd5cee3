#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace skewlab {

/// Minimal 8-bit RGB PNG writer (stored deflate blocks, fully
/// deterministic output). rgb is row-major, 3 bytes per pixel.
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& rgb);

}  // namespace skewlab
