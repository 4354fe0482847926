#include "potentia/potentia.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "json.hpp"
#include "potentia/capacity.hpp"
#include "potentia/config.hpp"
#include "potentia/errors.hpp"
#include "potentia/kernel.hpp"
#include "potentia/montecarlo.hpp"
#include "potentia/rng.hpp"
#include "potentia/scene.hpp"
#include "potentia/version.hpp"
#include "potentia/wiener.hpp"

using nlohmann::json;

struct potentia_scene {
  potentia::Scene scene;
};

namespace {

thread_local std::string g_last_error;

int status_of(const potentia::Error& e) {
  using potentia::ErrorCode;
  switch (e.code()) {
    case ErrorCode::scene_json: return POTENTIA_E_JSON;
    case ErrorCode::scene_schema: return POTENTIA_E_SCHEMA;
    case ErrorCode::scene_overlap: return POTENTIA_E_OVERLAP;
    case ErrorCode::scene_dimension: return POTENTIA_E_DIMENSION;
    case ErrorCode::io: return POTENTIA_E_IO;
    default: return POTENTIA_E_COMPUTE;
  }
}

template <typename Fn>
int wrap(Fn&& fn) {
  try {
    fn();
    return POTENTIA_OK;
  } catch (const potentia::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return POTENTIA_E_COMPUTE;
  } catch (...) {
    g_last_error = "unknown failure";
    return POTENTIA_E_COMPUTE;
  }
}

int usage_error(const char* msg) {
  g_last_error = msg;
  return POTENTIA_E_USAGE;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

int emit(char** out, const std::string& s) {
  *out = dup_string(s);
  if (*out == nullptr) {
    g_last_error = "out of memory";
    return POTENTIA_E_COMPUTE;
  }
  return POTENTIA_OK;
}

json estimate_json(const potentia::HittingEstimate& est) {
  json j;
  j["p_hat"] = est.p_hat;
  j["stderr"] = est.std_err;
  j["escape_bias_bound"] = est.escape_bias_bound;
  j["paths"] = est.paths;
  j["hits"] = est.hits;
  j["unresolved"] = est.unresolved;
  j["seed"] = est.seed;
  j["r_esc"] = est.r_esc;
  j["warnings"] = est.warnings;
  if (est.self_check_limit > 0.0) {
    j["self_check_delta"] = est.self_check_delta;
    j["self_check_limit"] = est.self_check_limit;
  }
  return j;
}

potentia::SimParams resolve_sim(const potentia::Scene& scene, long long paths,
                                double r_esc, long long seed) {
  potentia::SimParams p = scene.sim;
  if (paths > 0) p.paths = static_cast<std::uint64_t>(paths);
  if (r_esc > 0.0) p.r_esc = r_esc;
  if (seed >= 0) p.seed = static_cast<std::uint64_t>(seed);
  if (!(p.r_esc > 0.0)) {
    p.r_esc = std::max(1000.0, 10.0 * scene.config.reach());
  }
  return p;
}

potentia::GridSpec resolve_grid(const potentia::Scene& scene, long long boundary,
                                long long layers) {
  potentia::GridSpec g = scene.grid;
  if (boundary > 0) g.boundary_points = static_cast<std::uint64_t>(boundary);
  if (layers > 0) g.radial_layers = static_cast<std::uint64_t>(layers);
  return g;
}

std::string series_csv(const potentia::SeriesReport& report) {
  std::string out =
      "n,inner_radius,outer_radius,ball_count,method,cap_value,cap_lower,cap_upper,term,"
      "partial_sum\n";
  for (const auto& row : report.shells) {
    out += std::to_string(row.n);
    out += ',';
    out += potentia::format_double(row.inner_radius);
    out += ',';
    out += potentia::format_double(row.outer_radius);
    out += ',';
    out += std::to_string(row.ball_count);
    out += ',';
    out += row.ball_count == 0 ? "empty" : (row.fast_path ? "bounds" : "lp");
    out += ',';
    out += potentia::format_double(row.cap.value);
    out += ',';
    out += potentia::format_double(row.cap.lower);
    out += ',';
    out += potentia::format_double(row.cap.upper);
    out += ',';
    out += potentia::format_double(row.term);
    out += ',';
    out += potentia::format_double(row.partial_sum);
    out += '\n';
  }
  return out;
}

json series_json(const potentia::SeriesReport& report) {
  json j;
  j["gamma"] = report.gamma;
  j["R"] = report.R;
  j["complete"] = report.complete;
  j["total"] = report.total;
  json rows = json::array();
  for (const auto& row : report.shells) {
    json r;
    r["n"] = row.n;
    r["inner_radius"] = row.inner_radius;
    r["outer_radius"] = row.outer_radius;
    r["ball_count"] = row.ball_count;
    r["method"] = row.ball_count == 0 ? "empty" : (row.fast_path ? "bounds" : "lp");
    r["cap_value"] = row.cap.value;
    r["cap_lower"] = row.cap.lower;
    r["cap_upper"] = row.cap.upper;
    r["term"] = row.term;
    r["partial_sum"] = row.partial_sum;
    rows.push_back(std::move(r));
  }
  j["shells"] = std::move(rows);
  return j;
}

json verdict_json(const potentia::Verdict& v) {
  json j;
  j["kind"] = potentia::to_string(v.kind);
  j["rationale"] = v.rationale;
  j["closed_form"] = v.closed_form;
  return j;
}

std::optional<potentia::Verdict> closed_form_of(const potentia::Scene& scene) {
  if (!scene.config.has_generator()) return std::nullopt;
  const auto& gen = *scene.config.generator();
  return potentia::powerlaw_classifier(scene.kernel.d(), scene.kernel.alpha(),
                                       gen.phi.beta);
}

}  // namespace

extern "C" {

const char* potentia_version(void) { return potentia::kVersion; }

const char* potentia_last_error(void) { return g_last_error.c_str(); }

void potentia_string_free(char* s) { std::free(s); }

int potentia_scene_parse(const char* bytes, potentia_scene** out) {
  if (bytes == nullptr || out == nullptr) return usage_error("null argument");
  *out = nullptr;
  return wrap([&] {
    auto* handle = new potentia_scene{potentia::parse_scene(bytes)};
    *out = handle;
  });
}

int potentia_scene_load(const char* path, potentia_scene** out) {
  if (path == nullptr || out == nullptr) return usage_error("null argument");
  *out = nullptr;
  return wrap([&] {
    auto* handle = new potentia_scene{potentia::load_scene(path)};
    *out = handle;
  });
}

void potentia_scene_free(potentia_scene* scene) { delete scene; }

const char* potentia_scene_digest(const potentia_scene* scene) {
  return scene == nullptr ? "" : scene->scene.digest.c_str();
}

int potentia_scene_dimension(const potentia_scene* scene) {
  return scene == nullptr ? 0 : scene->scene.kernel.d();
}

double potentia_scene_alpha(const potentia_scene* scene) {
  return scene == nullptr ? 0.0 : scene->scene.kernel.alpha();
}

int potentia_scene_has_generator(const potentia_scene* scene) {
  return scene != nullptr && scene->scene.config.has_generator() ? 1 : 0;
}

unsigned long long potentia_scene_ball_count(const potentia_scene* scene) {
  return scene == nullptr ? 0 : scene->scene.config.ball_count();
}

int potentia_kernel_check(const potentia_scene* scene, unsigned long long sample_points,
                          unsigned long long seed, char** out_json) {
  if (scene == nullptr || out_json == nullptr) return usage_error("null argument");
  return wrap([&] {
    const potentia::Kernel& k = scene->scene.kernel;
    const std::uint64_t n = sample_points == 0 ? 24 : sample_points;
    if (n < 3) {
      throw potentia::Error(potentia::ErrorCode::invalid_argument,
                            "kernel-check: need at least 3 sample points");
    }
    const double spread = std::max(1.0, scene->scene.config.reach());
    const potentia::Point& x0 = scene->scene.config.x0();
    std::vector<potentia::Point> pts;
    pts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      potentia::PathRng rng(seed, i);
      potentia::Point p(k.d());
      for (int a = 0; a < k.d(); ++a) {
        p[a] = x0[a] + spread * (2.0 * rng.uniform() - 1.0);
      }
      pts.push_back(std::move(p));
    }
    const auto sample = potentia::make_sample(k, pts);
    json j;
    j["d"] = k.d();
    j["alpha"] = k.alpha();
    j["amplitude"] = k.amplitude();
    j["c"] = k.c();
    j["c0"] = k.c0();
    j["r0"] = k.r0();
    j["doubling_constant"] = k.doubling_constant();
    j["triangle_constant"] = potentia::triangle_property_constant(sample);
    j["triangle_bound"] = k.doubling_constant();
    j["sample_points"] = n;
    j["seed"] = seed;
    const int rc = emit(out_json, j.dump(2) + "\n");
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

int potentia_capacity(const potentia_scene* scene, long long grid_boundary,
                      long long grid_layers, char** out_json) {
  if (scene == nullptr || out_json == nullptr) return usage_error("null argument");
  return wrap([&] {
    const potentia::GridSpec grid =
        resolve_grid(scene->scene, grid_boundary, grid_layers);
    const auto balls = scene->scene.config.materialize();
    const potentia::CapacityResult res =
        potentia::capacity_lp_full(balls, scene->scene.kernel, grid);
    json j;
    j["value"] = res.estimate.value;
    j["lower"] = res.estimate.lower;
    j["upper"] = res.estimate.upper;
    j["support_points"] = res.estimate.support_points;
    j["constraint_points"] = res.estimate.constraint_points;
    j["audit_max_potential"] = res.audit_max_potential;
    const int rc = emit(out_json, j.dump(2) + "\n");
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

int potentia_wiener(const potentia_scene* scene, double R, double gamma, int n_shells,
                    long long grid_boundary, long long grid_layers, int format,
                    char** out_table, char** out_verdict_json) {
  if (scene == nullptr || out_table == nullptr || out_verdict_json == nullptr) {
    return usage_error("null argument");
  }
  if (format != POTENTIA_FORMAT_CSV && format != POTENTIA_FORMAT_JSON) {
    return usage_error("bad format");
  }
  *out_table = nullptr;
  *out_verdict_json = nullptr;
  return wrap([&] {
    potentia::ShellOptions opt;
    opt.grid = resolve_grid(scene->scene, grid_boundary, grid_layers);
    const double useR = R > 0.0 ? R : 1.0;
    const double useGamma = gamma > 0.0 ? gamma : 2.0;
    const int useShells = n_shells > 0 ? n_shells : 8;
    const potentia::SeriesReport report = potentia::shell_capacities(
        scene->scene.config, scene->scene.kernel, useR, useGamma, useShells, opt);
    const potentia::Verdict verdict =
        potentia::classify(report, closed_form_of(scene->scene));
    const std::string table = format == POTENTIA_FORMAT_CSV
                                  ? series_csv(report)
                                  : series_json(report).dump(2) + "\n";
    json vj = verdict_json(verdict);
    vj["total"] = report.total;
    vj["shells"] = report.shells.size();
    vj["complete"] = report.complete;
    vj["gamma"] = report.gamma;
    vj["R"] = report.R;
    if (emit(out_table, table) != POTENTIA_OK) throw std::bad_alloc();
    if (emit(out_verdict_json, vj.dump(2) + "\n") != POTENTIA_OK) {
      std::free(*out_table);
      *out_table = nullptr;
      throw std::bad_alloc();
    }
  });
}

int potentia_classify(const potentia_scene* scene, double R, double gamma, int n_shells,
                      long long grid_boundary, long long grid_layers, char** out_json) {
  if (scene == nullptr || out_json == nullptr) return usage_error("null argument");
  return wrap([&] {
    json j;
    if (scene->scene.config.has_generator()) {
      const auto& gen = *scene->scene.config.generator();
      const potentia::Verdict v = potentia::powerlaw_classifier(
          scene->scene.kernel.d(), scene->scene.kernel.alpha(), gen.phi.beta);
      j = verdict_json(v);
      j["exponent"] = potentia::powerlaw_exponent(scene->scene.kernel.d(),
                                                  scene->scene.kernel.alpha(),
                                                  gen.phi.beta);
    } else {
      potentia::ShellOptions opt;
      opt.grid = resolve_grid(scene->scene, grid_boundary, grid_layers);
      const double useR = R > 0.0 ? R : 1.0;
      const double useGamma = gamma > 0.0 ? gamma : 2.0;
      const int useShells = n_shells > 0 ? n_shells : 8;
      const potentia::SeriesReport report = potentia::shell_capacities(
          scene->scene.config, scene->scene.kernel, useR, useGamma, useShells, opt);
      j = verdict_json(potentia::classify(report, std::nullopt));
      j["total"] = report.total;
      j["shells"] = report.shells.size();
    }
    const int rc = emit(out_json, j.dump(2) + "\n");
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

int potentia_simulate(const potentia_scene* scene, const double* start, int start_len,
                      long long paths, double r_esc, long long seed, char** out_json) {
  if (scene == nullptr || start == nullptr || out_json == nullptr) {
    return usage_error("null argument");
  }
  if (start_len < 1) return usage_error("empty start point");
  return wrap([&] {
    const potentia::Point x(start, start + start_len);
    const potentia::SimParams params = resolve_sim(scene->scene, paths, r_esc, seed);
    const potentia::HittingEstimate est =
        potentia::hit_probability(scene->scene.config, scene->scene.kernel, x, params);
    const int rc = emit(out_json, estimate_json(est).dump(2) + "\n");
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

int potentia_probe(const potentia_scene* scene, const double* distances, int n_distances,
                   long long paths, double r_esc, long long seed, int format,
                   char** out_table) {
  if (scene == nullptr || distances == nullptr || out_table == nullptr) {
    return usage_error("null argument");
  }
  if (n_distances < 1) return usage_error("no distances");
  if (format != POTENTIA_FORMAT_CSV && format != POTENTIA_FORMAT_JSON) {
    return usage_error("bad format");
  }
  return wrap([&] {
    const std::vector<double> ds(distances, distances + n_distances);
    const potentia::SimParams params = resolve_sim(scene->scene, paths, r_esc, seed);
    const auto table =
        potentia::zero_one_probe(scene->scene.config, scene->scene.kernel, ds, params);
    std::string out;
    if (format == POTENTIA_FORMAT_CSV) {
      out = "distance,p_hat,stderr,bias\n";
      for (const auto& [dist, est] : table) {
        out += potentia::format_double(dist);
        out += ',';
        out += potentia::format_double(est.p_hat);
        out += ',';
        out += potentia::format_double(est.std_err);
        out += ',';
        out += potentia::format_double(est.escape_bias_bound);
        out += '\n';
      }
    } else {
      json rows = json::array();
      for (const auto& [dist, est] : table) {
        json r;
        r["distance"] = dist;
        r["p_hat"] = est.p_hat;
        r["stderr"] = est.std_err;
        r["bias"] = est.escape_bias_bound;
        rows.push_back(std::move(r));
      }
      out = rows.dump(2) + "\n";
    }
    const int rc = emit(out_table, out);
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

int potentia_metrize(const potentia_scene* scene, const double* points, int n, int d,
                     double gamma_exponent, int include_matrix, char** out_json) {
  if (scene == nullptr || points == nullptr || out_json == nullptr) {
    return usage_error("null argument");
  }
  if (n < 2 || d < 1) return usage_error("need at least 2 points of dimension >= 1");
  return wrap([&] {
    const potentia::Kernel& k = scene->scene.kernel;
    if (d != k.d()) {
      throw potentia::Error(potentia::ErrorCode::scene_dimension,
                            "metrize: points dimension does not match the scene kernel");
    }
    std::vector<potentia::Point> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
      pts.emplace_back(points + static_cast<std::size_t>(i) * d,
                       points + static_cast<std::size_t>(i + 1) * d);
    }
    const auto sample = potentia::make_sample(k, pts);
    const double gamma =
        gamma_exponent > 0.0 ? gamma_exponent : static_cast<double>(k.d()) - k.alpha();
    const potentia::MetrizeResult res = potentia::frink_metrize(sample, gamma);
    json j;
    j["points"] = n;
    j["gamma"] = gamma;
    j["distortion"] = res.distortion;
    j["triangle_constant"] = potentia::triangle_property_constant(sample);
    j["triangle_bound"] = k.doubling_constant();
    if (include_matrix != 0) {
      json rows = json::array();
      for (int i = 0; i < n; ++i) {
        json row = json::array();
        for (int c = 0; c < n; ++c) row.push_back(res.at(i, c));
        rows.push_back(std::move(row));
      }
      j["matrix"] = std::move(rows);
    }
    const int rc = emit(out_json, j.dump(2) + "\n");
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

int potentia_manifest(const char* command, const potentia_scene* scene,
                      unsigned long long seed, const char* const* outputs, int n_outputs,
                      char** out_json) {
  if (command == nullptr || out_json == nullptr) return usage_error("null argument");
  if (n_outputs > 0 && outputs == nullptr) return usage_error("null outputs");
  return wrap([&] {
    potentia::RunManifest m;
    m.command = command;
    m.scene_digest = scene == nullptr ? "" : scene->scene.digest;
    m.seed = seed;
    m.version = potentia::kVersion;
    for (int i = 0; i < n_outputs; ++i) {
      if (outputs[i] != nullptr) m.outputs.emplace_back(outputs[i]);
    }
    const int rc = emit(out_json, potentia::manifest_json(m));
    if (rc != POTENTIA_OK) throw std::bad_alloc();
  });
}

}  // extern "C"
