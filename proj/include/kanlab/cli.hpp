#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kanlab/error.hpp"
#include "kanlab/grid_measure.hpp"
#include "kanlab/skew.hpp"
#include "kanlab/trig_poly.hpp"

namespace kanlab::cli {

using Json = nlohmann::json;

/// Malformed or inconsistent run configuration; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Built-in defaults for every command block.
const Json& default_config();

/// Resolved run configuration: defaults overlaid with the user file, type
/// checked field by field. `resolved` is what reports embed and what the
/// config hash covers; the worker count and output directory are execution
/// details and stay out of it.
struct RunConfig {
  Json resolved;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::filesystem::path out = ".";

  const Json& block(const std::string& name) const { return resolved.at(name); }
  skew::KanSystem system() const;
  /// Reference measure on a grid of `grid` cells: Lebesgue or the
  /// equilibrium state of the configured potential.
  GridMeasure measure(std::size_t grid) const;
  std::uint64_t hash() const;
};

/// Throws ConfigError with the offending field or the parser's line/column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

skew::KanSystem system_from_json(const Json& j);
TrigPoly trig_from_json(const Json& j);

/// Sorted keys, no whitespace, doubles as %.17g, integers verbatim.
std::string canonical_dump(const Json& j);
std::uint64_t fnv1a64(const std::string& bytes);

/// Files of one command run. Each file is written to a temporary name and
/// renamed on commit(); without commit the destructor removes everything.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir);
  ArtifactSet(const ArtifactSet&) = delete;
  ArtifactSet& operator=(const ArtifactSet&) = delete;
  ~ArtifactSet();

  void write(const std::string& name, const std::string& bytes);
  void write_json(const std::string& name, const Json& j) { write(name, canonical_dump(j) + "\n"); }
  void commit();
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

/// 8-bit binary PGM: 0 = BASIN0, 255 = BASIN1, 128 = UNDECIDED.
std::string pgm_bytes(std::size_t width, std::size_t height, const std::vector<std::int8_t>& labels);

/// Fixed %.17g formatting used by every CSV writer.
std::string format_double(double x);

/// Runs the command line (argv[0] is skipped). Returns 0 ok, 1 failed check,
/// 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kanlab::cli
