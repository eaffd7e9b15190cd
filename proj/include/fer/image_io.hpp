#pragma once

#include <string>

#include "fer/imaging.hpp"

namespace fer {

/// Reads PNG or binary PGM (P5), sniffed by magic bytes. Colour input is
/// reduced to luminance. Throws Error(Io) on missing or malformed files.
GrayImage read_image(const std::string& path);

GrayImage read_pgm(const std::string& path);
GrayImage read_png(const std::string& path);

/// Writes an 8-bit binary PGM.
void write_pgm(const std::string& path, const GrayImage& img);

}  // namespace fer
