#include "golden.hpp"

#include <map>
#include <sstream>

#include "carserver/text.hpp"
#include "generators.hpp"

namespace carserver::testkit {

namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      files[fs::relative(e.path(), dir).generic_string()] = text::read_file(e.path());
  return files;
}

}  // namespace

pipeline::PipelineConfig golden_config(const fs::path& outputDir) {
  auto config = pipeline::load_config(data_dir() / "generate.conf");
  config.outputDir = outputDir;
  return config;
}

pipeline::PipelineResult run_golden(const std::string& requirementFile, const fs::path& outputDir) {
  return pipeline::run_pipeline(read_data(requirementFile), golden_config(outputDir));
}

std::string tree_diff(const fs::path& expected, const fs::path& actual) {
  const auto want = snapshot(expected);
  const auto got = snapshot(actual);
  std::ostringstream os;
  for (const auto& [name, bytes] : want) {
    auto it = got.find(name);
    if (it == got.end())
      os << "missing " << name << "\n";
    else if (it->second != bytes)
      os << "differs " << name << "\n";
  }
  for (const auto& [name, bytes] : got)
    if (!want.count(name)) os << "unexpected " << name << "\n";
  if (want.empty()) os << "no expected files in " << expected.string() << "\n";
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("carserver_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace carserver::testkit
