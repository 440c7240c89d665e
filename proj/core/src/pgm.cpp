#include "despeckle/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "despeckle/error.hpp"

namespace despeckle {

namespace {

// Reads an unsigned decimal literal (no sign, no leading zeros beyond "0").
bool parse_dim(std::istream& in, int& out) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c >= '0' && c <= '9') {
      tok.push_back(c);
    } else {
      in.unget();
      break;
    }
  }
  if (tok.empty() || tok.size() > 9) return false;
  if (tok.size() > 1 && tok[0] == '0') return false;
  out = std::stoi(tok);
  return out >= 1;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError(PgmError::Kind::IoFailure, "cannot open " + path);

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    throw PgmError(PgmError::Kind::MalformedHeader, path + ": not a binary P5 PGM");
  if (in.get() != '\n')
    throw PgmError(PgmError::Kind::MalformedHeader, path + ": expected newline after magic");

  int width = 0, height = 0;
  if (!parse_dim(in, width) || in.get() != ' ' || !parse_dim(in, height) || in.get() != '\n')
    throw PgmError(PgmError::Kind::MalformedHeader, path + ": bad dimensions line");

  std::string maxval;
  char c;
  while (in.get(c) && c != '\n') maxval.push_back(c);
  if (!in) throw PgmError(PgmError::Kind::MalformedHeader, path + ": truncated header");
  if (maxval != "255")
    throw PgmError(PgmError::Kind::UnsupportedMaxval, path + ": maxval '" + maxval + "' (only 255 supported)");

  Image img(height, width, Domain::Byte255);
  std::vector<uint8_t> bytes(img.size());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<size_t>(in.gcount()) != bytes.size())
    throw PgmError(PgmError::Kind::TruncatedPayload, path + ": payload shorter than width*height");

  std::copy(bytes.begin(), bytes.end(), img.pixels.begin());
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  if (img.domain != Domain::Byte255) throw DomainError("write_pgm expects a Byte255 image");
  if (img.height < 1 || img.width < 1) throw Error("write_pgm: empty image");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PgmError(PgmError::Kind::IoFailure, "cannot open " + path + " for writing");

  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<uint8_t> bytes(img.size());
  for (size_t i = 0; i < img.size(); ++i) {
    // round half-up, then clamp
    double v = std::floor(img.pixels[i] + 0.5);
    bytes[i] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PgmError(PgmError::Kind::IoFailure, "short write to " + path);
}

}  // namespace despeckle
