#pragma once

#include <string>
#include <vector>

#include "umm/backbone.hpp"
#include "umm/benchmarks.hpp"
#include "umm/training.hpp"

namespace umm {

/// Every extension point in one place, handed to plugins.
struct Registries {
  BackboneRegistry backbones;
  BenchmarkRegistry benchmarks;
  TrainerRegistry trainers;
};

/// Built-in backbones, benchmarks and trainers.
Registries make_default_registries();

/// Environment variable listing plugin shared libraries (or directories of
/// them), separated by ':'.
inline constexpr const char* kPluginPathEnv = "UMM_PLUGIN_PATH";

/// Symbol every plugin exports:
///   extern "C" void umm_register_plugin(umm::Registries&);
inline constexpr const char* kPluginEntryPoint = "umm_register_plugin";

/// Loads one plugin library and lets it register into `registries`.
/// Throws LoadError if the library or its entry point cannot be found.
void load_plugin(const fs::path& library, Registries& registries);

/// Loads every library named by `search_path` (default: $UMM_PLUGIN_PATH).
/// Returns the loaded paths in load order.
std::vector<fs::path> load_plugins(Registries& registries, const std::string& search_path);
std::vector<fs::path> load_plugins_from_env(Registries& registries);

}  // namespace umm
