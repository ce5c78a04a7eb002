#include "dbn/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dbn/error.hpp"

namespace dbn::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("expected a finite number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError("expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Binding {
  const char* key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

template <class T>
Binding size_binding(const char* key, T& ref) {
  return {key, [&ref](const std::string& v) { ref = static_cast<T>(parse_uint(v)); },
          [&ref] { return std::to_string(ref); }};
}

Binding double_binding(const char* key, double& ref) {
  return {key, [&ref](const std::string& v) { ref = parse_double(v); }, [&ref] { return fmt(ref); }};
}

Binding bool_binding(const char* key, bool& ref) {
  return {key, [&ref](const std::string& v) { ref = parse_bool(v); }, [&ref] { return fmt(ref); }};
}

Binding path_binding(const char* key, std::filesystem::path& ref, const std::filesystem::path& base) {
  return {key,
          [&ref, base](const std::string& v) {
            if (v.empty()) throw ConfigError("empty path");
            const std::filesystem::path p(v);
            ref = p.is_absolute() || base.empty() ? p : (base / p).lexically_normal();
          },
          [&ref] { return ref.generic_string(); }};
}

std::vector<Binding> bindings(RunConfig& c, const std::filesystem::path& base) {
  std::vector<Binding> b;
  b.push_back(path_binding("dataset_root", c.dataset_root, base));
  b.push_back(path_binding("output_dir", c.output_dir, base));
  b.push_back(size_binding("image_size", c.image_size));
  b.push_back({"crop_threshold",
               [&c](const std::string& v) {
                 const auto t = parse_uint(v);
                 if (t > 255) throw ConfigError("crop_threshold must be <= 255");
                 c.crop_threshold = static_cast<std::uint8_t>(t);
               },
               [&c] { return std::to_string(c.crop_threshold); }});
  b.push_back({"enhancements",
               [&c](const std::string& v) {
                 c.enhancements.clear();
                 std::stringstream ss(v);
                 std::string item;
                 while (std::getline(ss, item, ',')) {
                   item = trim(item);
                   if (!item.empty()) c.enhancements.push_back(item);
                 }
               },
               [&c] {
                 std::string s;
                 for (const auto& e : c.enhancements) s += (s.empty() ? "" : ",") + e;
                 return s;
               }});
  b.push_back(size_binding("blur_size", c.blur_size));
  b.push_back({"clahe_tiles",
               [&c](const std::string& v) { c.clahe.tiles_x = c.clahe.tiles_y = parse_uint(v); },
               [&c] { return std::to_string(c.clahe.tiles_x); }});
  b.push_back(double_binding("clahe_clip", c.clahe.clip_limit));
  b.push_back(bool_binding("augment", c.augment_enabled));
  b.push_back(double_binding("augment_rotation", c.augment.rotation_range));
  b.push_back(bool_binding("augment_hflip", c.augment.allow_hflip));
  b.push_back(bool_binding("augment_vflip", c.augment.allow_vflip));
  b.push_back(double_binding("augment_flip_probability", c.augment.flip_probability));
  b.push_back(double_binding("augment_zoom", c.augment.zoom_range));
  b.push_back(double_binding("augment_shift", c.augment.shift_range));
  b.push_back(double_binding("augment_shear", c.augment.shear_range));
  b.push_back(double_binding("augment_brightness_min", c.augment.brightness_min));
  b.push_back(double_binding("augment_brightness_max", c.augment.brightness_max));
  b.push_back(size_binding("fcm_clusters", c.fcm.clusters));
  b.push_back(double_binding("fcm_m_initial", c.fcm.m_initial));
  b.push_back(double_binding("fcm_m_final", c.fcm.m_final));
  b.push_back(double_binding("fcm_epsilon", c.fcm.epsilon));
  b.push_back(size_binding("fcm_max_iterations", c.fcm.max_iterations));
  b.push_back(double_binding("fcm_tau", c.fcm.tau));
  b.push_back(bool_binding("fcm_mask", c.fcm_mask_enabled));
  b.push_back(size_binding("epochs", c.train.epochs));
  b.push_back(size_binding("batch_size", c.train.batch_size));
  b.push_back(double_binding("learning_rate", c.train.learning_rate));
  b.push_back(double_binding("beta1", c.train.beta1));
  b.push_back(double_binding("beta2", c.train.beta2));
  b.push_back(double_binding("adam_epsilon", c.train.adam_epsilon));
  b.push_back(size_binding("early_stop_patience", c.train.early_stop_patience));
  b.push_back(double_binding("lr_reduce_factor", c.train.lr_reduce_factor));
  b.push_back(size_binding("lr_reduce_patience", c.train.lr_reduce_patience));
  b.push_back(size_binding("freeze_branches_epochs", c.train.freeze_branches_epochs));
  b.push_back(size_binding("net_width", c.net_width));
  b.push_back(size_binding("net_kernel", c.net_kernel));
  b.push_back(double_binding("dropout_rate", c.dropout_rate));
  b.push_back(double_binding("train_fraction", c.train_fraction));
  b.push_back(size_binding("seed", c.seed));
  b.push_back(size_binding("synth_per_class", c.synth_per_class));
  b.push_back(size_binding("synth_size", c.synth_size));
  return b;
}

}  // namespace

void RunConfig::validate() const {
  if (image_size < 16) throw ConfigError("image_size must be >= 16");
  static const std::set<std::string> known = {"blur", "hist_eq", "clahe"};
  std::set<std::string> seen;
  for (const auto& e : enhancements) {
    if (!known.count(e)) throw ConfigError("unknown enhancement '" + e + "' (expected blur, hist_eq, clahe)");
    if (!seen.insert(e).second) throw ConfigError("enhancement '" + e + "' listed twice");
  }
  if (blur_size == 0 || blur_size % 2 == 0) throw ConfigError("blur_size must be odd");
  if (clahe.tiles_x == 0) throw ConfigError("clahe_tiles must be >= 1");
  if (!(clahe.clip_limit > 0.0)) throw ConfigError("clahe_clip must be > 0");
  augment.validate();
  fcm.validate();
  train.validate();
  if (net_width == 0) throw ConfigError("net_width must be >= 1");
  if (net_kernel % 2 == 0) throw ConfigError("net_kernel must be odd");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (synth_per_class < 2) throw ConfigError("synth_per_class must be >= 2");
  if (synth_size < 16) throw ConfigError("synth_size must be >= 16");
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const std::string& source) {
  RunConfig c;
  auto table = bindings(c, base_dir);
  std::set<std::string> assigned;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto it = std::find_if(table.begin(), table.end(), [&](const Binding& b) { return key == b.key; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!assigned.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->set(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

std::string to_text(const RunConfig& config) {
  RunConfig copy = config;
  std::string out;
  for (const auto& b : bindings(copy, {})) out += std::string(b.key) + " = " + b.get() + "\n";
  return out;
}

}  // namespace dbn::pipeline
