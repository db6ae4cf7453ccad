#pragma once

#include <initializer_list>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

namespace mfilab {

/// Typed access to one JSON object of an experiment config. Every read key is
/// recorded so that `finish` can reject keys nobody asked for. Errors are
/// ConfigValidation and name the dotted key.
class ConfigView {
 public:
  ConfigView(const nlohmann::json& j, std::string prefix);

  bool has(const std::string& name) const;
  double number(const std::string& name, double fallback);
  double number(const std::string& name);
  long integer(const std::string& name, long fallback);
  bool boolean(const std::string& name, bool fallback);
  std::string choice(const std::string& name, const std::string& fallback,
                     std::initializer_list<const char*> allowed);
  std::string choice(const std::string& name, std::initializer_list<const char*> allowed);
  std::string text(const std::string& name, const std::string& fallback);
  std::vector<double> numbers(const std::string& name, std::vector<double> fallback);
  /// Sub-object (empty object when absent).
  ConfigView child(const std::string& name);
  const nlohmann::json& raw(const std::string& name);

  std::string key(const std::string& name) const;
  const std::string& prefix() const { return prefix_; }
  /// Throws if the object holds keys that were never read.
  void finish() const;

 private:
  const nlohmann::json* j_;
  std::string prefix_;
  std::set<std::string> used_;
};

/// {"a.b": 1} -> {"a": {"b": 1}}; nested input passes through.
nlohmann::json unflatten(const nlohmann::json& flat);

}  // namespace mfilab
