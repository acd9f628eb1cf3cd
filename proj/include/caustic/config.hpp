#pragma once

// Run configuration: an INI file with sections. Missing keys keep the
// defaults of the selected profile ("paper" or "desk").

#include <string>
#include <vector>

#include "caustic/fluxrender.hpp"
#include "caustic/geometry.hpp"
#include "caustic/lbfgs.hpp"
#include "caustic/objectives.hpp"
#include "caustic/pipeline.hpp"
#include "caustic/sources.hpp"

namespace caustic {

struct LensConfig {
  double width = 10.0;
  double height = 10.0;
  int grid_w = 641;
  int grid_h = 641;
  double front_z = 120.0;
  double initial_height = 121.0;  ///< flat back surface at start
  double eta = 1.49;
  bool pin_boundary = false;
};

struct PlaneConfig {
  double z = 150.0;
  double width = 9.9;
  double height = 9.9;
  int res_w = 640;
  int res_h = 640;

  ImagePlane plane() const { return {z, width, height, res_w, res_h}; }
};

struct SourceModelConfig {
  double size = 1.0;  ///< B
  int count = 36;     ///< N
  InitMode init = InitMode::Grid;
  bool contraction = true;
};

struct ReferencePaths {
  std::string lens_obj;
  std::string image_pgm;
};

struct RunConfig {
  std::string profile = "paper";
  LensConfig lens;
  PlaneConfig fit_plane;                                  ///< light-source fitting scene
  PlaneConfig design_plane{240.0, 20.0, 20.0, 640, 640};  ///< caustic design scene
  SourceModelConfig sources;
  SourceFitWeights fit_weights;
  LensDesignWeights design_weights;
  SolverConfig fit_solver;
  SolverConfig design_solver;
  DesignSchedule design_schedule;  ///< [design_solver] levels, level_iters
  RenderOptions render;
  double gamma = 2.2;
  int oracle_grid = 32;
  bool quantized_metrics = false;
  std::string output_dir = "out";
  std::vector<ReferencePaths> references;

  LensSurface initial_lens() const;
  /// Throws ConfigError on any invalid value.
  void validate() const;
};

RunConfig paper_profile();
/// 65 x 65 lens grid, 128 x 128 images, N = 16.
RunConfig desk_profile();

RunConfig load_config(const std::string& path);
/// Profile named by [run] profile, then the file's overrides.
RunConfig parse_config(const std::string& text);
/// Every resolved value, in the same format load_config reads.
std::string format_config(const RunConfig& cfg);

}  // namespace caustic
