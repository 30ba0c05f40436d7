#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "r2d2/metrics.hpp"
#include "r2d2/pipeline.hpp"

namespace r2d2 {

/// Effective key=value run configuration. Layers apply in order defaults < file < flags.
///
/// Config files are line-oriented `key = value` text; '#' starts a comment.
class RunConfig {
 public:
  RunConfig();

  /// Keys accepted in files and through flags, with their defaults ("" = unset).
  static const std::map<std::string, std::string>& defaults();

  /// Throws DomainError for unknown keys or malformed lines.
  void merge_file(const std::filesystem::path& path);
  void merge_text(const std::string& text, const std::string& origin);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  bool has_value(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  /// Typed pipeline configuration; validates it.
  DenoiseConfig denoise_config() const;
  CnrMode cnr_mode() const;
  StdKind std_kind() const;

 private:
  std::map<std::string, std::string> values_;
};

struct RoiSet {
  std::vector<RoiSpec> signal;
  std::vector<RoiSpec> background;
};

/// JSON array (or {"rois": [...]}) of {"center": [r, c], "radius": px, "kind": "signal"|"background"}.
RoiSet parse_rois(const std::string& json_text);
RoiSet load_rois(const std::filesystem::path& path);

}  // namespace r2d2
