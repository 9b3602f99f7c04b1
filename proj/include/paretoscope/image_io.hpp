#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace paretoscope {

struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height

  bool empty() const noexcept { return pixels.empty(); }
};

/// Binary PGM (P5) with maxval <= 255. Throws Error(invalid_input).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Every *.pgm in `dir`, in lexicographic filename order.
std::vector<GrayImage> read_pgm_directory(const std::filesystem::path& dir);

/// Raw frame stack: an ASCII header line "<width> <height> <frames>\n"
/// followed by width*height*frames bytes, frame after frame.
std::vector<GrayImage> read_raw_frames(const std::filesystem::path& path);
void write_raw_frames(const std::filesystem::path& path, const std::vector<GrayImage>& frames);

}  // namespace paretoscope
