#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace socialgat::cli {

enum class Kind { kString, kInt, kReal, kBool, kInputFile, kInputDir, kOutput };

struct OptionSpec {
  std::string key;  // config key; the flag is --key with '_' as '-'
  Kind kind;
  std::string fallback;  // empty and not required: unset
  std::string help;
  bool required = false;
};

/// Resolved settings for one command: defaults, then a key=value config file
/// or a replayed manifest, then command-line flags (last wins).
class Settings {
 public:
  Settings(std::string command, std::vector<OptionSpec> specs);

  /// Registers --config, --from-manifest and one flag per spec.
  void attach(CLI::App& app);
  /// Applies the layers; call after parsing.
  void resolve();

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;

  const std::string& command() const noexcept { return command_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  const std::vector<OptionSpec>& specs() const noexcept { return specs_; }

 private:
  const OptionSpec& spec(const std::string& key) const;

  std::string command_;
  std::vector<OptionSpec> specs_;
  std::map<std::string, std::string> flags_;
  std::map<std::string, CLI::Option*> options_;
  std::string config_file_;
  std::string manifest_file_;
  std::map<std::string, std::string> values_;
};

/// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_config(const std::string& content, const std::string& source);

/// Records a command run: resolved config, input hashes, outputs, timings.
class Manifest {
 public:
  explicit Manifest(const Settings& s);

  void add_output(const std::string& name, const std::filesystem::path& p);
  void write(const std::filesystem::path& path) const;

 private:
  const Settings& settings_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

}  // namespace socialgat::cli
