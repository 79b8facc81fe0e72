#include <fstream>

#include "kanlab/cli.hpp"

namespace kanlab::cli {

namespace fs = std::filesystem;

ArtifactSet::ArtifactSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

ArtifactSet::~ArtifactSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& n : names_) fs::remove(dir_ / (n + ".tmp"), ec);
}

void ArtifactSet::write(const std::string& name, const std::string& bytes) {
  fs::path tmp = dir_ / (name + ".tmp");
  names_.push_back(name);
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error("cannot write '" + tmp.string() + "'");
}

void ArtifactSet::commit() {
  for (const auto& n : names_) fs::rename(dir_ / (n + ".tmp"), dir_ / n);
  committed_ = true;
}

std::string pgm_bytes(std::size_t width, std::size_t height, const std::vector<std::int8_t>& labels) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + labels.size());
  for (auto l : labels) out += static_cast<char>(l == 0 ? 0 : l == 1 ? 255 : 128);
  return out;
}

}  // namespace kanlab::cli
