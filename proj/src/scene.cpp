#include "potentia/scene.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "potentia/errors.hpp"
#include "potentia/version.hpp"

namespace potentia {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& msg) {
  throw Error(ErrorCode::scene_schema, "scene schema: " + msg);
}

void check_keys(const json& obj, const char* ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) schema_error(std::string(ctx) + ": unknown key \"" + item.key() + "\"");
  }
}

double need_number(const json& obj, const char* key, const char* ctx) {
  if (!obj.contains(key)) schema_error(std::string(ctx) + ": missing \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_number()) schema_error(std::string(ctx) + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

std::int64_t need_integer(const json& obj, const char* key, const char* ctx) {
  if (!obj.contains(key)) schema_error(std::string(ctx) + ": missing \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    schema_error(std::string(ctx) + ": \"" + key + "\" must be an integer");
  }
  return v.get<std::int64_t>();
}

Point need_point(const json& obj, const char* key, const char* ctx) {
  if (!obj.contains(key)) schema_error(std::string(ctx) + ": missing \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) {
    schema_error(std::string(ctx) + ": \"" + key + "\" must be a non-empty array");
  }
  Point p;
  for (const json& e : v) {
    if (!e.is_number()) {
      schema_error(std::string(ctx) + ": \"" + key + "\" entries must be numbers");
    }
    p.push_back(e.get<double>());
  }
  return p;
}

GridSpec parse_grid(const json& g) {
  GridSpec spec;
  check_keys(g, "defaults.grid",
             {"boundary_points", "radial_layers", "audit_refinement", "seed"});
  if (g.contains("boundary_points")) {
    spec.boundary_points =
        static_cast<std::uint64_t>(need_integer(g, "boundary_points", "defaults.grid"));
  }
  if (g.contains("radial_layers")) {
    spec.radial_layers =
        static_cast<std::uint64_t>(need_integer(g, "radial_layers", "defaults.grid"));
  }
  if (g.contains("audit_refinement")) {
    spec.audit_refinement =
        static_cast<std::uint64_t>(need_integer(g, "audit_refinement", "defaults.grid"));
  }
  if (g.contains("seed")) {
    spec.seed = static_cast<std::uint64_t>(need_integer(g, "seed", "defaults.grid"));
  }
  return spec;
}

SimParams parse_sim(const json& s) {
  SimParams p;
  check_keys(s, "defaults.sim",
             {"paths", "r_esc", "seed", "max_steps", "step_scale", "truncation_radius",
              "self_check"});
  if (s.contains("paths")) {
    p.paths = static_cast<std::uint64_t>(need_integer(s, "paths", "defaults.sim"));
  }
  if (s.contains("r_esc")) p.r_esc = need_number(s, "r_esc", "defaults.sim");
  if (s.contains("seed")) {
    p.seed = static_cast<std::uint64_t>(need_integer(s, "seed", "defaults.sim"));
  }
  if (s.contains("max_steps")) {
    p.max_steps = static_cast<std::uint64_t>(need_integer(s, "max_steps", "defaults.sim"));
  }
  if (s.contains("step_scale")) p.step_scale = need_number(s, "step_scale", "defaults.sim");
  if (s.contains("truncation_radius")) {
    p.truncation_radius = need_number(s, "truncation_radius", "defaults.sim");
  }
  if (s.contains("self_check")) {
    if (!s.at("self_check").is_boolean()) {
      schema_error("defaults.sim: \"self_check\" must be a boolean");
    }
    p.self_check = s.at("self_check").get<bool>();
  }
  return p;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::compute, "sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Scene parse_scene(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::scene_json, std::string("scene JSON: ") + e.what());
  }
  if (!j.is_object()) schema_error("top level must be an object");
  check_keys(j, "scene", {"kernel", "x0", "balls", "generator", "defaults"});

  if (!j.contains("kernel") || !j.at("kernel").is_object()) {
    schema_error("missing \"kernel\" object");
  }
  const json& jk = j.at("kernel");
  check_keys(jk, "kernel", {"d", "alpha", "amplitude"});
  const std::int64_t d = need_integer(jk, "d", "kernel");
  const double alpha = need_number(jk, "alpha", "kernel");
  const double amplitude =
      jk.contains("amplitude") ? need_number(jk, "amplitude", "kernel") : 1.0;

  Point x0 = need_point(j, "x0", "scene");

  const bool has_balls = j.contains("balls");
  const bool has_generator = j.contains("generator");
  if (has_balls == has_generator) {
    schema_error("exactly one of \"balls\" and \"generator\" must be present");
  }

  Kernel kernel = [&] {
    try {
      return Kernel(static_cast<int>(d), alpha, amplitude);
    } catch (const std::exception& e) {
      schema_error(std::string("kernel: ") + e.what());
    }
  }();
  if (static_cast<int>(x0.size()) != kernel.d()) {
    throw Error(ErrorCode::scene_dimension,
                "scene: x0 has dimension " + std::to_string(x0.size()) +
                    ", kernel.d is " + std::to_string(kernel.d()));
  }

  auto build_config = [&]() -> BallConfig {
    try {
      if (has_balls) {
        const json& jb = j.at("balls");
        if (!jb.is_array()) schema_error("\"balls\" must be an array");
        std::vector<Ball> balls;
        for (const json& e : jb) {
          if (!e.is_object()) schema_error("ball entries must be objects");
          check_keys(e, "ball", {"center", "radius"});
          balls.push_back(
              Ball{need_point(e, "center", "ball"), need_number(e, "radius", "ball")});
        }
        return BallConfig::explicit_config(x0, std::move(balls));
      }
      const json& jg = j.at("generator");
      if (!jg.is_object()) schema_error("\"generator\" must be an object");
      check_keys(jg, "generator", {"type", "spacing", "phi", "n_max"});
      if (!jg.contains("type") || !jg.at("type").is_string() ||
          jg.at("type").get<std::string>() != "lattice") {
        schema_error("generator: \"type\" must be \"lattice\"");
      }
      if (!jg.contains("phi") || !jg.at("phi").is_object()) {
        schema_error("generator: missing \"phi\" object");
      }
      const json& jp = jg.at("phi");
      check_keys(jp, "generator.phi", {"c", "beta"});
      GeneratorSpec spec;
      spec.spacing = need_number(jg, "spacing", "generator");
      spec.phi = RadiusLaw{need_number(jp, "c", "generator.phi"),
                           need_number(jp, "beta", "generator.phi")};
      const std::int64_t n_max = need_integer(jg, "n_max", "generator");
      if (n_max < 0) schema_error("generator: \"n_max\" must be >= 0");
      spec.n_max = static_cast<int>(n_max);
      return BallConfig::lattice_config(x0, spec);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::scene_overlap || e.code() == ErrorCode::scene_dimension ||
          e.code() == ErrorCode::scene_schema) {
        throw;
      }
      schema_error(e.what());  // value constraints surface as schema violations
    }
  };

  Scene scene{kernel, build_config(), GridSpec{}, SimParams{}, {}, {}};
  if (j.contains("defaults")) {
    const json& jd = j.at("defaults");
    if (!jd.is_object()) schema_error("\"defaults\" must be an object");
    check_keys(jd, "defaults", {"grid", "sim"});
    if (jd.contains("grid")) scene.grid = parse_grid(jd.at("grid"));
    if (jd.contains("sim")) scene.sim = parse_sim(jd.at("sim"));
  }
  scene.canonical = j.dump();  // nlohmann objects iterate sorted by key
  scene.digest = sha256_hex(scene.canonical);
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open scene file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::io, "read failure on scene file: " + path);
  }
  return parse_scene(buf.str());
}

std::string manifest_json(const RunManifest& manifest) {
  json j;
  j["command"] = manifest.command;
  j["scene_digest"] = manifest.scene_digest;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version.empty() ? std::string(kVersion) : manifest.version;
  j["outputs"] = manifest.outputs;
  return j.dump(2) + "\n";
}

}  // namespace potentia
