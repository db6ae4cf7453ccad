#include "mfilab/config.hpp"

#include <sstream>

#include "mfilab/error.hpp"

namespace mfilab {

namespace {

const nlohmann::json& empty_object() {
  static const nlohmann::json e = nlohmann::json::object();
  return e;
}

std::string join(std::initializer_list<const char*> allowed) {
  std::string out;
  for (const char* a : allowed) {
    if (!out.empty()) out += ", ";
    out += a;
  }
  return out;
}

}  // namespace

ConfigView::ConfigView(const nlohmann::json& j, std::string prefix)
    : j_(&j), prefix_(std::move(prefix)) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ConfigValidation,
                (prefix_.empty() ? std::string("config") : prefix_) + ": expected an object");
  }
}

std::string ConfigView::key(const std::string& name) const {
  return prefix_.empty() ? name : prefix_ + "." + name;
}

bool ConfigView::has(const std::string& name) const { return j_->contains(name); }

double ConfigView::number(const std::string& name, double fallback) {
  used_.insert(name);
  if (!has(name)) return fallback;
  const auto& v = (*j_)[name];
  if (!v.is_number()) {
    throw Error(ErrorCode::ConfigValidation, key(name) + ": expected a number");
  }
  return v.get<double>();
}

double ConfigView::number(const std::string& name) {
  if (!has(name)) {
    throw Error(ErrorCode::ConfigValidation, key(name) + ": required");
  }
  return number(name, 0.0);
}

long ConfigView::integer(const std::string& name, long fallback) {
  used_.insert(name);
  if (!has(name)) return fallback;
  const auto& v = (*j_)[name];
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::ConfigValidation, key(name) + ": expected an integer");
  }
  return v.get<long>();
}

bool ConfigView::boolean(const std::string& name, bool fallback) {
  used_.insert(name);
  if (!has(name)) return fallback;
  const auto& v = (*j_)[name];
  if (!v.is_boolean()) {
    throw Error(ErrorCode::ConfigValidation, key(name) + ": expected true or false");
  }
  return v.get<bool>();
}

std::string ConfigView::choice(const std::string& name, const std::string& fallback,
                               std::initializer_list<const char*> allowed) {
  used_.insert(name);
  if (!has(name)) return fallback;
  const auto& v = (*j_)[name];
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    for (const char* a : allowed) {
      if (s == a) return s;
    }
  }
  throw Error(ErrorCode::ConfigValidation,
              key(name) + ": " + v.dump() + " is not one of " + join(allowed));
}

std::string ConfigView::choice(const std::string& name,
                               std::initializer_list<const char*> allowed) {
  if (!has(name)) {
    throw Error(ErrorCode::ConfigValidation,
                key(name) + ": required, one of " + join(allowed));
  }
  return choice(name, "", allowed);
}

std::string ConfigView::text(const std::string& name, const std::string& fallback) {
  used_.insert(name);
  if (!has(name)) return fallback;
  const auto& v = (*j_)[name];
  if (!v.is_string()) {
    throw Error(ErrorCode::ConfigValidation, key(name) + ": expected a string");
  }
  return v.get<std::string>();
}

std::vector<double> ConfigView::numbers(const std::string& name, std::vector<double> fallback) {
  used_.insert(name);
  if (!has(name)) return fallback;
  const auto& v = (*j_)[name];
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) {
        out.clear();
        break;
      }
      out.push_back(e.get<double>());
    }
    if (out.size() == v.size()) return out;
  }
  throw Error(ErrorCode::ConfigValidation, key(name) + ": expected an array of numbers");
}

ConfigView ConfigView::child(const std::string& name) {
  used_.insert(name);
  return ConfigView(has(name) ? (*j_)[name] : empty_object(), key(name));
}

const nlohmann::json& ConfigView::raw(const std::string& name) {
  used_.insert(name);
  return has(name) ? (*j_)[name] : empty_object();
}

void ConfigView::finish() const {
  for (auto it = j_->begin(); it != j_->end(); ++it) {
    if (!used_.count(it.key())) {
      throw Error(ErrorCode::ConfigValidation, key(it.key()) + ": unknown key");
    }
  }
}

nlohmann::json unflatten(const nlohmann::json& flat) {
  if (!flat.is_object()) {
    return flat;
  }
  nlohmann::json out = nlohmann::json::object();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    nlohmann::json* node = &out;
    std::stringstream ss(it.key());
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
      parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      nlohmann::json& next = (*node)[parts[i]];
      if (next.is_null()) {
        next = nlohmann::json::object();
      } else if (!next.is_object()) {
        throw Error(ErrorCode::ConfigValidation, it.key() + ": conflicts with a scalar key");
      }
      node = &next;
    }
    nlohmann::json value = unflatten(it.value());
    nlohmann::json& slot = (*node)[parts.back()];
    if (slot.is_object() && value.is_object()) {
      slot.update(value);
    } else if (!slot.is_null()) {
      throw Error(ErrorCode::ConfigValidation, it.key() + ": given twice");
    } else {
      slot = std::move(value);
    }
  }
  return out;
}

}  // namespace mfilab
