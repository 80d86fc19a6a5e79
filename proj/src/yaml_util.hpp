#pragma once

#include <yaml-cpp/yaml.h>

#include <string>

#include "qdroute/error.hpp"

namespace qdroute::detail {

[[noreturn]] inline void fail_at(const std::string& source, const YAML::Node& node,
                                 const std::string& msg) {
  const auto mark = node.Mark();
  std::string where = source;
  if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
  throw ConfigError(where + ": " + msg);
}

template <typename T>
T scalar(const std::string& src, const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(src, node, "cannot read '" + what + "'");
  }
}

template <typename T>
void read_opt(const std::string& src, const YAML::Node& parent, const char* key, T& out) {
  if (const auto node = parent[key]) out = scalar<T>(src, node, key);
}

}  // namespace qdroute::detail
