#include "r2d2/config.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw DomainError("config key '" + key + "': '" + value + "' is not " + want);
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"sigma_min", "0.01"},
      {"sigma_max", "378"},
      {"n_steps", "1000"},
      {"epsilon", "1e-05"},
      {"alpha", "0.2"},
      {"lambda", "0.005"},
      {"omega_fraction", "0.125"},
      {"sr_factor", "2"},
      {"sr_steps", "20"},
      {"corrector_steps", "1"},
      {"corrector_snr", "0.16"},
      {"corrector_denoise", "true"},
      {"corrector_sr", "true"},
      {"strict_literal_dc", "false"},
      {"patch_size", "8"},
      {"seed", "0"},
      {"sigma", ""},
      {"samples", "5"},
      {"alphas", "0.2,0.4,0.6,0.8,1.0"},
      {"score", "gaussian"},
      {"prior_mean", ""},
      {"prior_mean_image", ""},
      {"prior_std", "0.1"},
      {"gmm", "0.5:0.25:0.05;0.5:0.75:0.05"},
      {"cnr_mode", "mean_difference"},
      {"std_kind", "population"},
      {"rois", ""},
      {"size", "64x64"},
  };
  return kDefaults;
}

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw DomainError("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!values_.contains(key)) {
      throw DomainError(origin + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
    values_[key] = trim(line.substr(eq + 1));
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InternalError("unknown config key '" + key + "'");
  return it->second;
}

bool RunConfig::has_value(const std::string& key) const { return !get(key).empty(); }

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::stringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      bad_value(key, get(key), "a comma-separated list of numbers");
    }
    out.push_back(v);
  }
  if (out.empty()) bad_value(key, get(key), "a non-empty list");
  return out;
}

DenoiseConfig RunConfig::denoise_config() const {
  DenoiseConfig cfg;
  cfg.schedule = NoiseSchedule(get_double("sigma_min"), get_double("sigma_max"),
                               get_int("n_steps"), get_double("epsilon"));
  cfg.sampler.corrector_steps = get_int("corrector_steps");
  cfg.sampler.corrector_snr = get_double("corrector_snr");
  cfg.alpha = get_double("alpha");
  cfg.lambda = get_double("lambda");
  cfg.omega_fraction = get_double("omega_fraction");
  cfg.sr_factor = get_int("sr_factor");
  cfg.sr_steps = get_int("sr_steps");
  cfg.seed = get_u64("seed");
  if (has_value("sigma")) cfg.sigma_override = get_double("sigma");
  cfg.strict_literal_dc = get_bool("strict_literal_dc");
  cfg.corrector_in_denoise = get_bool("corrector_denoise");
  cfg.corrector_in_sr = get_bool("corrector_sr");
  cfg.patch_size = get_int("patch_size");
  cfg.validate();
  return cfg;
}

CnrMode RunConfig::cnr_mode() const {
  const auto& v = get("cnr_mode");
  if (v == "mean_difference") return CnrMode::mean_difference;
  if (v == "paired") return CnrMode::paired;
  bad_value("cnr_mode", v, "'mean_difference' or 'paired'");
}

StdKind RunConfig::std_kind() const {
  const auto& v = get("std_kind");
  if (v == "population") return StdKind::population;
  if (v == "sample") return StdKind::sample;
  bad_value("std_kind", v, "'population' or 'sample'");
}

RoiSet parse_rois(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("ROI file is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("rois")) doc = doc["rois"];
  if (!doc.is_array()) throw IoError("ROI file must hold a JSON array of ROIs");
  RoiSet set;
  try {
    for (const auto& item : doc) {
      RoiSpec roi;
      const auto& center = item.at("center");
      if (!center.is_array() || center.size() != 2) throw IoError("ROI center must be [row, col]");
      roi.row = center[0].get<double>();
      roi.col = center[1].get<double>();
      roi.radius = item.at("radius").get<double>();
      const std::string kind = item.value("kind", "signal");
      if (kind == "signal") {
        roi.kind = RoiKind::signal;
        set.signal.push_back(roi);
      } else if (kind == "background") {
        roi.kind = RoiKind::background;
        set.background.push_back(roi);
      } else {
        throw IoError("ROI kind must be 'signal' or 'background', got '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed ROI entry: ") + e.what());
  }
  return set;
}

RoiSet load_rois(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ROI file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_rois(buf.str());
}

}  // namespace r2d2
