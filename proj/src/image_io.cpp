#include "paretoscope/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "paretoscope/error.hpp"

namespace paretoscope {

namespace {

/// Next PGM header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

std::uint32_t parse_dim(const std::string& tok, const std::filesystem::path& path, const char* what) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw invalid_input(path.string() + ": bad " + what + " '" + tok + "'");
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot read image " + path.string());
  if (header_token(in) != "P5") throw invalid_input(path.string() + ": not a binary PGM (P5) image");
  GrayImage img;
  img.width = parse_dim(header_token(in), path, "width");
  img.height = parse_dim(header_token(in), path, "height");
  const std::uint32_t maxval = parse_dim(header_token(in), path, "maxval");
  if (maxval == 0 || maxval > 255) throw invalid_input(path.string() + ": only 8-bit PGM images are supported");
  // header_token consumed exactly one whitespace byte after maxval.
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw invalid_input(path.string() + ": truncated pixel data");
  if (img.pixels.empty()) throw invalid_input(path.string() + ": empty image");
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write image " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

std::vector<GrayImage> read_pgm_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw invalid_input(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  std::vector<GrayImage> frames;
  for (const auto& f : files) frames.push_back(read_pgm(f));
  return frames;
}

std::vector<GrayImage> read_raw_frames(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot read raw frames " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::uint64_t w = 0, h = 0, n = 0;
  if (!(hs >> w >> h >> n) || w == 0 || h == 0)
    throw invalid_input(path.string() + ": raw header must be '<width> <height> <frames>'");
  std::vector<GrayImage> frames(n);
  for (auto& f : frames) {
    f.width = static_cast<std::uint32_t>(w);
    f.height = static_cast<std::uint32_t>(h);
    f.pixels.resize(w * h);
    in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(f.pixels.size()))
      throw invalid_input(path.string() + ": truncated raw frame data");
  }
  return frames;
}

void write_raw_frames(const std::filesystem::path& path, const std::vector<GrayImage>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write raw frames " + path.string());
  const std::uint32_t w = frames.empty() ? 0 : frames.front().width;
  const std::uint32_t h = frames.empty() ? 0 : frames.front().height;
  out << w << ' ' << h << ' ' << frames.size() << '\n';
  for (const auto& f : frames) {
    if (f.width != w || f.height != h) throw invalid_input("raw frame stacks need equally sized frames");
    out.write(reinterpret_cast<const char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  }
}

}  // namespace paretoscope
