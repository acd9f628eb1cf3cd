#include "caustic/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace caustic {
namespace {

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path);
  out.exceptions(std::ios::badbit);
  return out;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot read " + path);
  return in;
}

/// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] != '#') return tok;
    std::string rest;
    std::getline(in, rest);
  }
  throw IoError("truncated image header");
}

int header_int(std::istream& in) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw IoError("bad header field " + tok);
    return v;
  } catch (const std::logic_error&) {
    throw IoError("bad header field " + tok);
  }
}

std::uint32_t swap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

}  // namespace

int quantize(double g, int maxval) {
  const double x = std::clamp(g, 0.0, 1.0) * maxval;
  return static_cast<int>(std::floor(x + 0.5));
}

void write_pgm(const std::string& path, const GrayImage& img, int bits) {
  if (bits != 8 && bits != 16) throw ConfigError("PGM depth must be 8 or 16 bits");
  const int maxval = bits == 8 ? 255 : 65535;
  auto out = open_out(path, true);
  out << "P5\n" << img.res_w << ' ' << img.res_h << '\n' << maxval << '\n';
  std::vector<unsigned char> row(static_cast<std::size_t>(img.res_w) * (bits / 8));
  for (int v = img.res_h - 1; v >= 0; --v) {
    for (int u = 0; u < img.res_w; ++u) {
      const int q = quantize(img.at(u, v), maxval);
      if (bits == 8) {
        row[u] = static_cast<unsigned char>(q);
      } else {
        row[2 * u] = static_cast<unsigned char>(q >> 8);
        row[2 * u + 1] = static_cast<unsigned char>(q & 0xff);
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

GrayImage read_pgm(const std::string& path) {
  auto in = open_in(path, true);
  if (header_token(in) != "P5") throw IoError(path + ": not a binary PGM");
  const int w = header_int(in), h = header_int(in), maxval = header_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path + ": bad PGM header");
  in.get();  // single whitespace before the raster
  const int bytes = maxval < 256 ? 1 : 2;
  GrayImage img(w, h);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * bytes);
  for (int v = h - 1; v >= 0; --v) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size())))
      throw IoError(path + ": truncated PGM raster");
    for (int u = 0; u < w; ++u) {
      const int q = bytes == 1 ? row[u] : (row[2 * u] << 8) | row[2 * u + 1];
      img.at(u, v) = double(q) / maxval;
    }
  }
  return img;
}

void write_pfm(const std::string& path, const ImageGrid& img) {
  auto out = open_out(path, true);
  out << "Pf\n" << img.res_w << ' ' << img.res_h << "\n-1.0\n";
  std::vector<float> row(img.res_w);
  for (int v = 0; v < img.res_h; ++v) {
    for (int u = 0; u < img.res_w; ++u) row[u] = static_cast<float>(img.at(u, v));
    if constexpr (std::endian::native == std::endian::big) {
      for (float& f : row) f = std::bit_cast<float>(swap32(std::bit_cast<std::uint32_t>(f)));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

FluxImage read_pfm(const std::string& path) {
  auto in = open_in(path, true);
  if (header_token(in) != "Pf") throw IoError(path + ": not a grayscale PFM");
  const int w = header_int(in), h = header_int(in);
  const std::string scale_tok = header_token(in);
  double scale = 0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::logic_error&) {
    throw IoError(path + ": bad PFM scale");
  }
  if (w <= 0 || h <= 0 || scale == 0) throw IoError(path + ": bad PFM header");
  in.get();
  const bool little = scale < 0;
  FluxImage img(w, h);
  std::vector<std::uint32_t> row(w);
  for (int v = 0; v < h; ++v) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4)))
      throw IoError(path + ": truncated PFM raster");
    for (int u = 0; u < w; ++u) {
      std::uint32_t bits = row[u];
      if (little != (std::endian::native == std::endian::little)) bits = swap32(bits);
      img.at(u, v) = std::bit_cast<float>(bits);
    }
  }
  return img;
}

void write_obj(const std::string& path, const LensSurface& lens) {
  auto out = open_out(path, false);
  out << std::setprecision(9);
  out << "# lens grid " << lens.grid_w << ' ' << lens.grid_h << " extent " << lens.width << ' ' << lens.height
      << " front_z " << lens.front_z << " eta " << lens.refractive_index << '\n';
  for (std::size_t v = 0; v < lens.num_vertices(); ++v) {
    const Vec3 p = lens.vertex(static_cast<int>(v));
    out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  }
  for (const auto& t : lens.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

LensSurface read_obj(const std::string& path) {
  auto in = open_in(path, false);
  std::string line;
  bool have_header = false;
  int gw = 0, gh = 0;
  double width = 0, height = 0, front_z = 0, eta = 0;
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "#") {
      std::string k1, k2, k3, k4;
      if (ls >> k1 && k1 == "lens" && ls >> k2 >> gw >> gh >> k2 >> width >> height >> k3 >> front_z >> k4 >> eta)
        have_header = true;
    } else if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) throw IoError(path + ": bad vertex line");
      verts.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int& idx : f) {
        std::string tok;
        if (!(ls >> tok)) throw IoError(path + ": bad face line");
        idx = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      faces.push_back(f);
    }
  }
  if (!have_header) throw IoError(path + ": missing '# lens grid ...' header");
  LensSurface lens = build_grid_lens(gw, gh, width, height, front_z, front_z + 1.0, eta);
  if (verts.size() != lens.num_vertices()) throw IoError(path + ": vertex count does not match grid");
  const double tol = 1e-6 * std::max(width, height);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    const int idx = static_cast<int>(v);
    if (std::abs(verts[v].x - lens.vertex_x(idx)) > tol || std::abs(verts[v].y - lens.vertex_y(idx)) > tol)
      throw IoError(path + ": vertices are not on the lens grid");
    lens.heights[v] = verts[v].z;
  }
  if (faces != lens.triangles) throw IoError(path + ": triangulation differs from the grid split");
  lens.validate();
  return lens;
}

void write_source_table(const std::string& path, const PointSourceSet& set) {
  auto out = open_out(path, false);
  out << std::setprecision(17) << set.count() << ' ' << set.size << '\n';
  for (const auto& e : set.emitters) out << e.x << ' ' << e.y << ' ' << e.q << '\n';
}

PointSourceSet read_source_table(const std::string& path) {
  auto in = open_in(path, false);
  std::size_t n = 0;
  PointSourceSet set;
  if (!(in >> n >> set.size)) throw IoError(path + ": bad source table header");
  set.emitters.resize(n);
  for (auto& e : set.emitters)
    if (!(in >> e.x >> e.y >> e.q)) throw IoError(path + ": truncated source table");
  return set;
}

void write_sidecar(const std::string& path, const KeyValues& entries) {
  auto out = open_out(path, false);
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

}  // namespace caustic
