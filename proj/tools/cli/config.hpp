#pragma once

// Run configuration: one JSON document per run.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "cosymlab/catalog.hpp"

namespace cosymlab::cli {

using nlohmann::json;

/// Bad or missing configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_config(const std::filesystem::path& path);

double get_double(const json& cfg, const char* key, double fallback);
std::size_t get_count(const json& cfg, const char* key, std::size_t fallback);
double get_tolerance(const json& cfg, const char* key, double fallback);
std::string get_string(const json& cfg, const char* key);

/// `system` is a catalog name or an inline object:
///   {"name", "variables": [...], "periodic": [...], "periods": [...],
///    "omega": [[i, j, c], ...], "hamiltonian": "<expr>", "level": c,
///    "primitive": ["<expr>", ...], "topology": {...},
///    "section": {"theta": "<expr>", "level", "orientation", "free": [...],
///                "dependent": [...], "reference": [...], "chart_lo": [...],
///                "chart_hi": [...]}}
CatalogSystem resolve_system(const json& system);

CosymSeed resolve_seed(const json& cfg);

}  // namespace cosymlab::cli
