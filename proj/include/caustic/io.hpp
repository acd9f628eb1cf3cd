#pragma once

// File formats: binary PGM (8 and 16 bit), little-endian PFM, Wavefront OBJ
// for lens meshes, plain-text emitter tables and key-value sidecars.
//
// Images are stored with pixel (0, 0) at the min corner of the plane, so
// PGM rows are flipped on the way out (the first file row is max y). PFM
// already stores rows bottom to top and needs no flip.

#include <string>
#include <utility>
#include <vector>

#include "caustic/geometry.hpp"
#include "caustic/image.hpp"
#include "caustic/sources.hpp"

namespace caustic {

/// Rounds clamp(g, 0, 1) * maxval half away from zero.
int quantize(double g, int maxval);

void write_pgm(const std::string& path, const GrayImage& img, int bits = 8);
GrayImage read_pgm(const std::string& path);

void write_pfm(const std::string& path, const ImageGrid& img);
FluxImage read_pfm(const std::string& path);

/// Back-surface mesh. A leading comment records the grid and lens
/// parameters so read_obj can rebuild the LensSurface.
void write_obj(const std::string& path, const LensSurface& lens);
LensSurface read_obj(const std::string& path);

/// First line "N B", then one "x y q" line per emitter.
void write_source_table(const std::string& path, const PointSourceSet& set);
PointSourceSet read_source_table(const std::string& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;
/// "key = value" lines.
void write_sidecar(const std::string& path, const KeyValues& entries);

}  // namespace caustic
