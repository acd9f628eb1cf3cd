#include "caustic/config.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace caustic {
namespace {

namespace pt = boost::property_tree;

const char* init_name(InitMode m) { return m == InitMode::Grid ? "grid" : "quadrant"; }

InitMode parse_init(const std::string& s) {
  if (s == "grid") return InitMode::Grid;
  if (s == "quadrant") return InitMode::QuadrantSymmetric;
  throw ConfigError("sources.init must be 'grid' or 'quadrant', got '" + s + "'");
}

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& value) {
  if (auto v = tree.get_optional<std::string>(key)) {
    try {
      value = tree.get<T>(key);
    } catch (const pt::ptree_bad_data&) {
      throw ConfigError("bad value for " + key + ": '" + *v + "'");
    }
  }
}

void read_plane(const pt::ptree& t, const std::string& s, PlaneConfig& p) {
  read(t, s + ".z", p.z);
  read(t, s + ".width", p.width);
  read(t, s + ".height", p.height);
  read(t, s + ".res_w", p.res_w);
  read(t, s + ".res_h", p.res_h);
}

void read_solver(const pt::ptree& t, const std::string& s, SolverConfig& c) {
  read(t, s + ".history", c.history);
  read(t, s + ".c1", c.c1);
  read(t, s + ".c2", c.c2);
  read(t, s + ".max_iters", c.max_iters);
  read(t, s + ".grad_tol", c.grad_tol);
  read(t, s + ".max_line_search_steps", c.max_line_search_steps);
  read(t, s + ".max_line_search_failures", c.max_line_search_failures);
}

void write_plane(std::ostream& o, const char* name, const PlaneConfig& p) {
  o << '[' << name << "]\nz = " << p.z << "\nwidth = " << p.width << "\nheight = " << p.height
    << "\nres_w = " << p.res_w << "\nres_h = " << p.res_h << "\n\n";
}

void write_solver(std::ostream& o, const char* name, const SolverConfig& c) {
  o << '[' << name << "]\nhistory = " << c.history << "\nc1 = " << c.c1 << "\nc2 = " << c.c2
    << "\nmax_iters = " << c.max_iters << "\ngrad_tol = " << c.grad_tol
    << "\nmax_line_search_steps = " << c.max_line_search_steps
    << "\nmax_line_search_failures = " << c.max_line_search_failures << '\n';
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      levels.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("design_solver.levels: '" + tok + "' is not an integer");
    }
  }
  return levels;
}

}  // namespace

LensSurface RunConfig::initial_lens() const {
  return build_grid_lens(lens.grid_w, lens.grid_h, lens.width, lens.height, lens.front_z, lens.initial_height,
                         lens.eta);
}

void RunConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(lens.width, "lens.width");
  positive(lens.height, "lens.height");
  positive(sources.size, "sources.size");
  if (lens.grid_w < 2 || lens.grid_h < 2) throw ConfigError("lens grid needs at least 2 x 2 vertices");
  if (!(lens.eta > 1)) throw ConfigError("lens.eta must exceed 1");
  if (!(lens.front_z > 0)) throw ConfigError("lens.front_z must be positive (source plane is z = 0)");
  if (!(lens.initial_height > lens.front_z)) throw ConfigError("lens.initial_height must exceed lens.front_z");
  for (const PlaneConfig* p : {&fit_plane, &design_plane}) {
    positive(p->width, "plane width");
    positive(p->height, "plane height");
    if (p->res_w < 1 || p->res_h < 1) throw ConfigError("plane resolution must be positive");
    if (!(p->z > lens.initial_height)) throw ConfigError("receiving plane must lie behind the lens");
  }
  if (sources.count < 1) throw ConfigError("sources.count must be positive");
  positive(gamma, "gamma");
  if (oracle_grid < 1) throw ConfigError("oracle.grid must be positive");
  if (render.threads < 1) throw ConfigError("render.threads must be positive");
  fit_solver.validate();
  design_solver.validate();
  design_schedule.validate();
}

RunConfig paper_profile() {
  RunConfig c;
  c.fit_solver.grad_tol = 1e-2;
  c.design_solver.grad_tol = 1e-4;
  c.design_solver.max_iters = 300000;
  return c;
}

RunConfig desk_profile() {
  RunConfig c = paper_profile();
  c.profile = "desk";
  c.lens.grid_w = c.lens.grid_h = 65;
  c.fit_plane.res_w = c.fit_plane.res_h = 128;
  c.design_plane.res_w = c.design_plane.res_h = 128;
  c.sources.count = 16;
  c.fit_solver.max_iters = 2000;
  c.design_solver.max_iters = 2000;
  c.design_schedule.levels = {5, 9, 17, 33};
  return c;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree t;
  std::istringstream in(text);
  try {
    pt::read_ini(in, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const std::string profile = t.get("run.profile", std::string("paper"));
  RunConfig c;
  if (profile == "paper") c = paper_profile();
  else if (profile == "desk") c = desk_profile();
  else throw ConfigError("run.profile must be 'paper' or 'desk'");

  read(t, "run.output_dir", c.output_dir);
  read(t, "run.gamma", c.gamma);
  read(t, "run.threads", c.render.threads);
  read(t, "run.deterministic", c.render.deterministic);
  read(t, "run.quantized_metrics", c.quantized_metrics);

  read(t, "lens.width", c.lens.width);
  read(t, "lens.height", c.lens.height);
  read(t, "lens.grid_w", c.lens.grid_w);
  read(t, "lens.grid_h", c.lens.grid_h);
  read(t, "lens.front_z", c.lens.front_z);
  read(t, "lens.initial_height", c.lens.initial_height);
  read(t, "lens.eta", c.lens.eta);
  read(t, "lens.pin_boundary", c.lens.pin_boundary);

  read_plane(t, "fit_plane", c.fit_plane);
  read_plane(t, "design_plane", c.design_plane);

  read(t, "sources.size", c.sources.size);
  read(t, "sources.count", c.sources.count);
  read(t, "sources.contraction", c.sources.contraction);
  if (auto init = t.get_optional<std::string>("sources.init")) c.sources.init = parse_init(*init);

  read(t, "fit_weights.flux", c.fit_weights.flux);
  read(t, "fit_weights.position", c.fit_weights.position);
  read(t, "fit_weights.intensity", c.fit_weights.intensity);
  read(t, "design_weights.image", c.design_weights.image);
  read(t, "design_weights.gradient", c.design_weights.gradient);
  read(t, "design_weights.out", c.design_weights.out);
  read(t, "design_weights.smooth", c.design_weights.smooth);

  read_solver(t, "fit_solver", c.fit_solver);
  read_solver(t, "design_solver", c.design_solver);
  if (auto levels = t.get_optional<std::string>("design_solver.levels")) c.design_schedule.levels = parse_levels(*levels);
  read(t, "design_solver.level_iters", c.design_schedule.level_iters);
  read(t, "oracle.grid", c.oracle_grid);

  if (auto refs = t.get_child_optional("references")) {
    for (const auto& [key, node] : *refs) {
      const std::string v = node.get_value<std::string>();
      const auto comma = v.find(',');
      if (comma == std::string::npos) throw ConfigError("references." + key + " must be 'lens.obj, image.pgm'");
      ReferencePaths r{boost::algorithm::trim_copy(v.substr(0, comma)),
                       boost::algorithm::trim_copy(v.substr(comma + 1))};
      c.references.push_back(r);
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str());
  // Relative paths are taken relative to the config file.
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.output_dir);
  for (auto& r : c.references) {
    resolve(r.lens_obj);
    resolve(r.image_pgm);
  }
  return c;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << std::boolalpha;
  o << "[run]\nprofile = " << c.profile << "\noutput_dir = " << c.output_dir << "\ngamma = " << c.gamma
    << "\nthreads = " << c.render.threads << "\ndeterministic = " << c.render.deterministic
    << "\nquantized_metrics = " << c.quantized_metrics << "\n\n";
  o << "[lens]\nwidth = " << c.lens.width << "\nheight = " << c.lens.height << "\ngrid_w = " << c.lens.grid_w
    << "\ngrid_h = " << c.lens.grid_h << "\nfront_z = " << c.lens.front_z
    << "\ninitial_height = " << c.lens.initial_height << "\neta = " << c.lens.eta
    << "\npin_boundary = " << c.lens.pin_boundary << "\n\n";
  write_plane(o, "fit_plane", c.fit_plane);
  write_plane(o, "design_plane", c.design_plane);
  o << "[sources]\nsize = " << c.sources.size << "\ncount = " << c.sources.count
    << "\ninit = " << init_name(c.sources.init) << "\ncontraction = " << c.sources.contraction << "\n\n";
  o << "[fit_weights]\nflux = " << c.fit_weights.flux << "\nposition = " << c.fit_weights.position
    << "\nintensity = " << c.fit_weights.intensity << "\n\n";
  o << "[design_weights]\nimage = " << c.design_weights.image << "\ngradient = " << c.design_weights.gradient
    << "\nout = " << c.design_weights.out << "\nsmooth = " << c.design_weights.smooth << "\n\n";
  write_solver(o, "fit_solver", c.fit_solver);
  o << '\n';
  write_solver(o, "design_solver", c.design_solver);
  o << "levels =";
  for (int m : c.design_schedule.levels) o << ' ' << m;
  o << "\nlevel_iters = " << c.design_schedule.level_iters << "\n\n";
  o << "[oracle]\ngrid = " << c.oracle_grid << "\n";
  if (!c.references.empty()) {
    o << "\n[references]\n";
    for (std::size_t i = 0; i < c.references.size(); ++i)
      o << "ref" << i + 1 << " = " << c.references[i].lens_obj << ", " << c.references[i].image_pgm << '\n';
  }
  return o.str();
}

}  // namespace caustic
