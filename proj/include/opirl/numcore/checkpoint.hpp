#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opirl/numcore/matrix.hpp"
#include "opirl/numcore/mlp.hpp"

namespace opirl {

/// Named matrices plus string metadata, stored as versioned text.
///
/// Values are written in shortest round-trip decimal form, so save/load is
/// bit-exact for finite doubles.
struct ParameterFile {
  static constexpr int kFormatVersion = 1;

  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  void add(const Mlp& net);
  void add(std::string name, Matrix m) { tensors.emplace_back(std::move(name), std::move(m)); }
  const Matrix& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  const std::string& get_meta(const std::string& key) const;

  /// Rebuilds an Mlp saved with add(); architecture comes from the stored metadata.
  Mlp load_mlp(const std::string& name) const;
};

void save_parameter_file(const std::filesystem::path& path, const ParameterFile& file);
ParameterFile load_parameter_file(const std::filesystem::path& path);

std::string format_double(double v);
double parse_double(const std::string& token, std::size_t line);

}  // namespace opirl
