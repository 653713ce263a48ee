#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

/// Resource files compiled into the library (templates, word lists).
/// `name` is the path relative to the resources/ directory.
std::optional<std::string_view> find_resource(std::string_view name);

/// Like find_resource but throws IoError when missing.
std::string_view resource(std::string_view name);

/// Non-empty, non-comment ('#') lines of a list resource, trimmed.
std::vector<std::string> resource_lines(std::string_view name);

}  // namespace chartnl
