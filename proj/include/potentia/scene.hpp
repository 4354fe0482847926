#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "potentia/capacity.hpp"
#include "potentia/config.hpp"
#include "potentia/kernel.hpp"
#include "potentia/montecarlo.hpp"

namespace potentia {

/// A parsed scene file: kernel, base point, ball configuration (explicit list
/// or lattice generator), and default grid/simulation parameters that CLI
/// flags may override.
struct Scene {
  Kernel kernel;
  BallConfig config;
  GridSpec grid;
  SimParams sim;
  std::string canonical;  ///< canonicalized bytes: sorted keys, compact dump
  std::string digest;     ///< SHA-256 hex of the canonical bytes
};

/// Parse and validate scene JSON.  Error codes distinguish malformed JSON,
/// schema violations, overlapping balls (offending pair named), and
/// dimension mismatches.
Scene parse_scene(const std::string& bytes);

/// Read a scene file; I/O failures carry ErrorCode::io.
Scene load_scene(const std::string& path);

/// SHA-256 of arbitrary bytes, lowercase hex.
std::string sha256_hex(const std::string& bytes);

/// Shortest round-trip decimal form of a double (plain "inf"/"nan" spellings).
std::string format_double(double v);

struct RunManifest {
  std::string command;
  std::string scene_digest;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> outputs;
};

/// Canonical JSON rendering of a manifest (sorted keys, no timestamps).
std::string manifest_json(const RunManifest& manifest);

}  // namespace potentia
