#include "options.hpp"

#include <algorithm>
#include <charconv>

#include "json.hpp"
#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"

#ifndef SOCIALGAT_VERSION
#define SOCIALGAT_VERSION "0.0.0"
#endif

namespace socialgat::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string hash_input(const fs::path& p) {
  if (!fs::is_directory(p)) return io::sha256_file(p);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& f : files) joined += f.filename().string() + " " + io::sha256_file(f) + "\n";
  return io::sha256_hex(joined);
}

}  // namespace

std::map<std::string, std::string> parse_config(const std::string& content, const std::string& source) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= content.size()) {
    const auto nl = content.find('\n', pos);
    std::string line = content.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + " line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.empty()) throw ParseError(source + " line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings::Settings(std::string command, std::vector<OptionSpec> specs)
    : command_(std::move(command)), specs_(std::move(specs)) {}

void Settings::attach(CLI::App& app) {
  app.add_option("--config", config_file_, "key=value settings file");
  app.add_option("--from-manifest", manifest_file_, "replay the config recorded in a run manifest");
  for (const auto& s : specs_) {
    std::string help = s.help;
    if (!s.fallback.empty()) help += " [" + s.fallback + "]";
    if (s.required) help += " (required)";
    if (s.kind == Kind::kBool) {
      options_[s.key] = app.add_flag(flag_name(s.key))->description(help);
    } else {
      options_[s.key] = app.add_option(flag_name(s.key), flags_[s.key], help);
    }
  }
}

const OptionSpec& Settings::spec(const std::string& key) const {
  for (const auto& s : specs_)
    if (s.key == key) return s;
  throw ParameterError("internal: unknown setting '" + key + "'");
}

void Settings::resolve() {
  for (const auto& s : specs_)
    if (!s.fallback.empty()) values_[s.key] = s.fallback;

  std::map<std::string, std::string> layer;
  if (!manifest_file_.empty()) {
    json m;
    try {
      m = json::parse(io::read_file(manifest_file_));
    } catch (const json::exception& e) {
      throw ParseError(manifest_file_ + ": invalid JSON: " + e.what());
    }
    if (m.value("command", "") != command_) {
      throw ParameterError(manifest_file_ + " records command '" + m.value("command", "") + "', not '" +
                           command_ + "'");
    }
    for (const auto& [k, v] : m.at("config").items()) layer[k] = v.get<std::string>();
  }
  if (!config_file_.empty()) {
    for (auto& [k, v] : parse_config(io::read_file(config_file_), config_file_)) layer[k] = v;
  }
  for (const auto& [k, v] : layer) {
    const bool known = std::any_of(specs_.begin(), specs_.end(), [&](const OptionSpec& s) { return s.key == k; });
    if (!known) throw ParameterError("unknown setting '" + k + "' for " + command_);
    values_[k] = v;
  }
  for (const auto& s : specs_) {
    CLI::Option* opt = options_.at(s.key);
    if (opt->count() == 0) continue;
    values_[s.key] = s.kind == Kind::kBool ? "true" : flags_.at(s.key);
  }
  for (const auto& s : specs_) {
    if (s.required && !has(s.key)) {
      throw ParameterError(command_ + " requires " + flag_name(s.key) +
                           (s.key == "seed" ? " (randomized commands never pick a seed implicitly)" : ""));
    }
  }
}

bool Settings::has(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string Settings::str(const std::string& key) const {
  spec(key);
  const auto it = values_.find(key);
  return it == values_.end() ? std::string() : it->second;
}

std::uint64_t Settings::u64(const std::string& key) const {
  const std::string v = str(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError(key + " must be a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::size_t Settings::size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

double Settings::real(const std::string& key) const {
  const std::string v = str(key);
  try {
    return io::parse_double(v);
  } catch (const Error&) {
    throw ParameterError(key + " must be a number, got '" + v + "'");
  }
}

bool Settings::flag(const std::string& key) const {
  const std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v.empty() || v == "false" || v == "0" || v == "no") return false;
  throw ParameterError(key + " must be true or false, got '" + v + "'");
}

fs::path Settings::path(const std::string& key) const {
  const std::string v = str(key);
  if (v.empty()) throw ParameterError(command_ + " requires " + flag_name(key));
  return fs::path(v);
}

std::vector<std::string> Settings::list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string v = str(key);
  std::size_t pos = 0;
  while (pos <= v.size() && !v.empty()) {
    const auto comma = v.find(',', pos);
    const std::string item = trim(v.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Manifest::Manifest(const Settings& s) : settings_(s), start_(std::chrono::steady_clock::now()) {}

void Manifest::add_output(const std::string& name, const fs::path& p) { outputs_.emplace_back(name, p.string()); }

void Manifest::write(const fs::path& path) const {
  json inputs = json::object();
  for (const auto& s : settings_.specs()) {
    if ((s.kind != Kind::kInputFile && s.kind != Kind::kInputDir) || !settings_.has(s.key)) continue;
    for (const auto& item : settings_.list(s.key)) {
      inputs[s.key].push_back({{"path", item}, {"sha256", hash_input(item)}});
    }
  }
  json outputs = json::object();
  for (const auto& [name, p] : outputs_) outputs[name] = p;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json m = {{"schema_version", 1},
            {"command", settings_.command()},
            {"tool_version", SOCIALGAT_VERSION},
            {"mode", "reference"},
            {"config", settings_.values()},
            {"inputs", inputs},
            {"outputs", outputs},
            {"timings", {{"wall_seconds", seconds}}}};
  if (settings_.has("seed")) m["seed"] = settings_.u64("seed");
  io::write_file_atomic(path, m.dump(2) + "\n");
}

}  // namespace socialgat::cli
