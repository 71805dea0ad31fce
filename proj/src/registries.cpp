#include "umm/registries.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "umm/error.hpp"

namespace umm {

Registries make_default_registries() {
  Registries r;
  register_builtin_backbones(r.backbones);
  register_builtin_benchmarks(r.benchmarks);
  register_builtin_trainers(r.trainers);
  return r;
}

void load_plugin(const fs::path& library, Registries& registries) {
  // Handles are never closed: registered factories point into the library.
  void* handle = dlopen(library.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!handle) {
    throw Error(ErrorCode::LoadError, "plugin '" + library.string() + "': " + dlerror());
  }
  using Entry = void (*)(Registries&);
  auto entry = reinterpret_cast<Entry>(dlsym(handle, kPluginEntryPoint));
  if (!entry) {
    throw Error(ErrorCode::LoadError,
                "plugin '" + library.string() + "' does not export " + std::string(kPluginEntryPoint));
  }
  entry(registries);
}

std::vector<fs::path> load_plugins(Registries& registries, const std::string& search_path) {
  std::vector<fs::path> loaded;
  std::stringstream ss(search_path);
  std::string item;
  while (std::getline(ss, item, ':')) {
    if (item.empty()) continue;
    const fs::path p(item);
    std::vector<fs::path> libs;
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".so" || ext == ".dylib")) libs.push_back(entry.path());
      }
      std::sort(libs.begin(), libs.end());
    } else {
      libs.push_back(p);
    }
    for (const auto& lib : libs) {
      load_plugin(lib, registries);
      loaded.push_back(lib);
    }
  }
  return loaded;
}

std::vector<fs::path> load_plugins_from_env(Registries& registries) {
  const char* env = std::getenv(kPluginPathEnv);
  return env ? load_plugins(registries, env) : std::vector<fs::path>{};
}

}  // namespace umm
