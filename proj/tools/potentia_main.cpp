// Command-line front end.  All computation goes through the C API in
// potentia/potentia.h; this file only parses flags, moves bytes, and writes
// artifacts plus a run manifest.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "potentia/potentia.h"

namespace {

struct SceneHandle {
  potentia_scene* ptr = nullptr;
  ~SceneHandle() { potentia_scene_free(ptr); }
};

struct ApiString {
  char* ptr = nullptr;
  ~ApiString() { potentia_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

int exit_code_of(int status) {
  switch (status) {
    case POTENTIA_OK: return 0;
    case POTENTIA_E_USAGE: return 2;
    case POTENTIA_E_JSON: return 3;
    case POTENTIA_E_SCHEMA: return 4;
    case POTENTIA_E_OVERLAP: return 5;
    case POTENTIA_E_DIMENSION: return 6;
    default: return 1;  // computation and I/O failures
  }
}

int report_failure(int status) {
  std::fprintf(stderr, "{\"error\": \"%s\", \"status\": %d}\n",
               json_escape(potentia_last_error()).c_str(), status);
  return exit_code_of(status);
}

bool parse_csv_doubles(const std::string& text, std::vector<double>* out) {
  out->clear();
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) {
        ++used;
      }
      if (used != token.size()) return false;
      out->push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out->empty();
}

bool read_points_file(const std::string& path, std::vector<double>* flat, int* dim) {
  std::ifstream in(path);
  if (!in) return false;
  *dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',' || c == '\t') c = ' ';
    }
    std::istringstream row(line);
    std::vector<double> coords;
    double v = 0.0;
    while (row >> v) coords.push_back(v);
    if (coords.empty()) continue;  // blank line
    if (*dim == 0) {
      *dim = static_cast<int>(coords.size());
    } else if (static_cast<int>(coords.size()) != *dim) {
      return false;
    }
    flat->insert(flat->end(), coords.begin(), coords.end());
  }
  return *dim > 0;
}

bool write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  return static_cast<bool>(out);
}

/// Writes artifacts + manifest.json into out_dir and prints the primary
/// artifacts to stdout.  Artifact names are fixed per subcommand, so a rerun
/// with identical inputs reproduces every byte.
int finish_run(const std::string& cmdline, const SceneHandle& scene,
               unsigned long long seed, const std::string& out_dir,
               const std::vector<std::pair<std::string, std::string>>& artifacts) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "{\"error\": \"cannot create output directory %s\", \"status\": %d}\n",
                 json_escape(out_dir).c_str(), POTENTIA_E_IO);
    return 1;
  }
  std::vector<std::string> paths;
  for (const auto& [name, bytes] : artifacts) {
    const std::string path = out_dir + "/" + name;
    if (!write_file(path, bytes)) {
      std::fprintf(stderr, "{\"error\": \"cannot write %s\", \"status\": %d}\n",
                   json_escape(path).c_str(), POTENTIA_E_IO);
      return 1;
    }
    paths.push_back(path);
  }
  std::vector<const char*> cpaths;
  for (const auto& p : paths) cpaths.push_back(p.c_str());
  ApiString manifest;
  const int rc = potentia_manifest(cmdline.c_str(), scene.ptr, seed, cpaths.data(),
                                   static_cast<int>(cpaths.size()), &manifest.ptr);
  if (rc != POTENTIA_OK) return report_failure(rc);
  if (!write_file(out_dir + "/manifest.json", manifest.str())) {
    std::fprintf(stderr, "{\"error\": \"cannot write manifest.json\", \"status\": %d}\n",
                 POTENTIA_E_IO);
    return 1;
  }
  for (const auto& [name, bytes] : artifacts) {
    (void)name;
    std::fwrite(bytes.data(), 1, bytes.size(), stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"avoidability toolkit: capacities, shell series, hitting simulation"};
  app.require_subcommand(1);

  std::string scene_path;
  std::string out_dir = ".";
  long long seed = -1;
  app.add_option("--scene", scene_path, "scene JSON file")->required();
  app.add_option("--out", out_dir, "output directory for artifacts + manifest");
  app.add_option("--seed", seed, "seed override (>= 0)");

  auto* kc = app.add_subcommand("kernel-check", "kernel constants and triangle scan");
  unsigned long long kc_points = 24;
  kc->add_option("--sample-points", kc_points, "points for the triangle scan");

  auto* cap = app.add_subcommand("capacity", "inner capacity LP over the scene balls");
  long long grid_boundary = 0, grid_layers = 0;
  cap->add_option("--grid-boundary", grid_boundary, "support points per ball");
  cap->add_option("--grid-layers", grid_layers, "radial layers (alpha < 2)");

  auto* cls = app.add_subcommand("classify", "avoidable/unavoidable verdict");
  auto* wnr = app.add_subcommand("wiener", "shell capacity series table + verdict");
  double gamma = 0.0, radius_base = 0.0;
  int n_shells = 0;
  std::string format = "csv";
  for (CLI::App* sub : {cls, wnr}) {
    sub->add_option("--gamma", gamma, "shell ratio (> 1, default 2)");
    sub->add_option("--R", radius_base, "base shell radius (default 1)");
    sub->add_option("--n-shells", n_shells, "number of shells (default 8)");
    sub->add_option("--grid-boundary", grid_boundary, "support points per shell");
    sub->add_option("--grid-layers", grid_layers, "radial layers (alpha < 2)");
  }
  wnr->add_option("--format", format, "table format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* sim = app.add_subcommand("simulate", "hitting probability from a start point");
  std::string start_csv;
  long long paths = 0;
  double r_esc = 0.0;
  sim->add_option("--start", start_csv, "start point, comma-separated")->required();
  sim->add_option("--paths", paths, "number of sample paths");
  sim->add_option("--r-esc", r_esc, "escape radius");

  auto* prb = app.add_subcommand("probe", "zero-one probe over start distances");
  std::string distances_csv;
  prb->add_option("--distances", distances_csv, "start distances, comma-separated")
      ->required();
  prb->add_option("--paths", paths, "number of sample paths per distance");
  prb->add_option("--r-esc", r_esc, "escape radius");
  prb->add_option("--format", format, "table format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* met = app.add_subcommand("metrize", "metrize the kernel quasimetric on points");
  std::string points_path;
  bool with_matrix = false;
  met->add_option("--points", points_path, "points file (one point per line)")
      ->required();
  met->add_option("--gamma", gamma, "snowflake exponent (default d - alpha)");
  met->add_flag("--matrix", with_matrix, "include the full metric matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  std::string cmdline;
  for (int i = 0; i < argc; ++i) {
    cmdline += argv[i];
    if (i + 1 < argc) cmdline += ' ';
  }

  SceneHandle scene;
  if (const int rc = potentia_scene_load(scene_path.c_str(), &scene.ptr);
      rc != POTENTIA_OK) {
    return report_failure(rc);
  }

  const unsigned long long eff_seed = seed >= 0 ? static_cast<unsigned long long>(seed) : 0;
  const int fmt = format == "json" ? POTENTIA_FORMAT_JSON : POTENTIA_FORMAT_CSV;

  if (*kc) {
    ApiString out;
    const int rc = potentia_kernel_check(scene.ptr, kc_points, eff_seed, &out.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    return finish_run(cmdline, scene, eff_seed, out_dir, {{"kernel-check.json", out.str()}});
  }
  if (*cap) {
    ApiString out;
    const int rc = potentia_capacity(scene.ptr, grid_boundary, grid_layers, &out.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    return finish_run(cmdline, scene, eff_seed, out_dir, {{"capacity.json", out.str()}});
  }
  if (*cls) {
    ApiString out;
    const int rc = potentia_classify(scene.ptr, radius_base, gamma, n_shells,
                                     grid_boundary, grid_layers, &out.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    return finish_run(cmdline, scene, eff_seed, out_dir, {{"classify.json", out.str()}});
  }
  if (*wnr) {
    ApiString table, verdict;
    const int rc = potentia_wiener(scene.ptr, radius_base, gamma, n_shells, grid_boundary,
                                   grid_layers, fmt, &table.ptr, &verdict.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    const std::string table_name = fmt == POTENTIA_FORMAT_CSV ? "wiener.csv" : "wiener.json";
    return finish_run(cmdline, scene, eff_seed, out_dir,
                      {{table_name, table.str()}, {"wiener-verdict.json", verdict.str()}});
  }
  if (*sim) {
    std::vector<double> start;
    if (!parse_csv_doubles(start_csv, &start)) {
      std::fprintf(stderr, "{\"error\": \"--start must be comma-separated numbers\", \"status\": 2}\n");
      return 2;
    }
    ApiString out;
    const int rc = potentia_simulate(scene.ptr, start.data(),
                                     static_cast<int>(start.size()), paths, r_esc, seed,
                                     &out.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    return finish_run(cmdline, scene, eff_seed, out_dir, {{"simulate.json", out.str()}});
  }
  if (*prb) {
    std::vector<double> distances;
    if (!parse_csv_doubles(distances_csv, &distances)) {
      std::fprintf(stderr, "{\"error\": \"--distances must be comma-separated numbers\", \"status\": 2}\n");
      return 2;
    }
    ApiString out;
    const int rc = potentia_probe(scene.ptr, distances.data(),
                                  static_cast<int>(distances.size()), paths, r_esc, seed,
                                  fmt, &out.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    const std::string name = fmt == POTENTIA_FORMAT_CSV ? "probe.csv" : "probe.json";
    return finish_run(cmdline, scene, eff_seed, out_dir, {{name, out.str()}});
  }
  if (*met) {
    std::vector<double> flat;
    int dim = 0;
    if (!read_points_file(points_path, &flat, &dim)) {
      std::fprintf(stderr, "{\"error\": \"cannot read points file %s\", \"status\": %d}\n",
                   json_escape(points_path).c_str(), POTENTIA_E_IO);
      return 1;
    }
    ApiString out;
    const int rc = potentia_metrize(scene.ptr, flat.data(),
                                    static_cast<int>(flat.size()) / dim, dim, gamma,
                                    with_matrix ? 1 : 0, &out.ptr);
    if (rc != POTENTIA_OK) return report_failure(rc);
    return finish_run(cmdline, scene, eff_seed, out_dir, {{"metrize.json", out.str()}});
  }
  std::fprintf(stderr, "{\"error\": \"unknown subcommand\", \"status\": 2}\n");
  return 2;
}
