#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "caustic/io.hpp"
#include "caustic/oracle.hpp"
#include "support.hpp"

using namespace caustic;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "caustic_cli_test";

int run(const std::string& args, std::string* out = nullptr) {
  const std::string log = (kDir / "stdout.txt").string();
  const int status = std::system((std::string(CAUSTIC_CLI) + " " + args + " > " + log + " 2>&1").c_str());
  if (out) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(status);
}

std::string p(const std::string& name) { return (kDir / name).string(); }

void write_scene() {
  fs::remove_all(kDir);
  fs::create_directories(kDir);
  std::ofstream(kDir / "run.ini") << "[run]\nprofile = desk\noutput_dir = out\n"
                                     "[lens]\ngrid_w = 9\ngrid_h = 9\n"
                                     "[fit_plane]\nres_w = 16\nres_h = 16\n"
                                     "[design_plane]\nres_w = 16\nres_h = 16\n"
                                     "[sources]\ncount = 4\n"
                                     "[fit_solver]\nmax_iters = 15\n[design_solver]\nmax_iters = 5\nlevel_iters = 5\n"
                                     "[references]\nref1 = lens.obj, ref.pgm\n";
  const LensSurface lens = test::bumpy_lens(9, 10, 120, 121.6, 0.3);
  write_obj(p("lens.obj"), lens);
  // Render from the lens as stored, so the CLI sees exactly the same heights.
  write_pgm(p("ref.pgm"), dense_grid_render(6, 1.0, read_obj(p("lens.obj")), {150, 9.9, 9.9, 16, 16}), 16);
  GrayImage disk(16, 16);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 16; ++u) disk.at(u, v) = (u - 7.5) * (u - 7.5) + (v - 7.5) * (v - 7.5) < 25 ? 0.8 : 0.1;
  write_pgm(p("disk.pgm"), disk);
  write_pgm(p("small.pgm"), GrayImage(8, 8, 0.5));
}

}  // namespace

TEST_CASE("command line front end") {
  write_scene();
  const std::string cfg = "-c " + p("run.ini");

  SUBCASE("fit, then design with the fitted table") {
    const int fit = run("fit-source " + cfg);
    CHECK((fit == 0 || fit == 2));
    for (const char* f : {"config.ini", "sources.txt", "fit_trace.csv", "render_1.pgm", "error_1.pgm", "fit_report.txt"})
      CHECK(fs::exists(kDir / "out" / f));
    CHECK(read_source_table(p("out/sources.txt")).count() == 4);

    const int design = run("design-lens " + cfg + " --sources " + p("out/sources.txt") + " --target " + p("disk.pgm"));
    CHECK(design == 2);  // five iterations cannot reach the tolerance
    for (const char* f :
         {"lens.obj", "render.pgm", "error.pgm", "design_trace.csv", "design_trace_level5.csv", "design_report.txt"})
      CHECK(fs::exists(kDir / "out" / f));
    CHECK(read_obj(p("out/lens.obj")).grid_w == 9);

    CHECK(run("render " + cfg + " --lens " + p("out/lens.obj") + " --sources " + p("out/sources.txt") +
              " --plane design --match " + p("disk.pgm") + " --flux " + p("r.pfm") + " " + p("r.pgm")) == 0);
    CHECK(read_pgm(p("r.pgm")).res_w == 16);
    CHECK(read_pfm(p("r.pfm")).res_w == 16);
  }

  SUBCASE("sweep writes one table per count") {
    CHECK(run("fit-source " + cfg + " -n 1 4 --out-dir " + p("sweep")) != 1);
    CHECK(fs::exists(kDir / "sweep" / "sources_n1.txt"));
    CHECK(fs::exists(kDir / "sweep" / "sources_n4.txt"));
  }

  SUBCASE("oracle render and metrics") {
    CHECK(run("oracle-render " + cfg + " --lens " + p("lens.obj") + " --grid 6 " + p("o.pgm")) == 0);
    CHECK(fs::exists(kDir / "o.txt"));
    std::string out;
    CHECK(run("metrics " + p("o.pgm") + " " + p("ref.pgm"), &out) == 0);
    CHECK(out.find("MAE 0\n") != std::string::npos);
    CHECK(out.find("PSNR inf dB") != std::string::npos);
    CHECK(run("errormap " + p("o.pgm") + " " + p("disk.pgm") + " " + p("e.pgm")) == 0);
    CHECK(fs::exists(kDir / "e.txt"));
  }

  SUBCASE("input errors exit with 1") {
    std::ofstream(kDir / "norefs.ini") << "[run]\nprofile = desk\n";
    CHECK(run("fit-source -c " + p("norefs.ini")) == 1);
    CHECK(run("metrics " + p("ref.pgm") + " " + p("small.pgm")) == 1);
    CHECK(run("design-lens " + cfg + " --sources " + p("missing.txt") + " --target " + p("disk.pgm")) == 1);
    std::ofstream(kDir / "s.txt") << "1 1.0\n0 0 1\n";
    CHECK(run("design-lens " + cfg + " --sources " + p("s.txt") + " --target " + p("small.pgm")) == 1);
    CHECK(run("render") == 1);
    CHECK(run("bogus") == 1);
  }
}
