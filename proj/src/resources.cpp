#include "chartnl/resources.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/text_util.hpp"

namespace chartnl {

std::string_view resource(std::string_view name) {
    auto r = find_resource(name);
    if (!r) throw IoError("missing embedded resource " + std::string(name));
    return *r;
}

std::vector<std::string> resource_lines(std::string_view name) {
    std::vector<std::string> out;
    for (auto line : split_lines(resource(name))) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(t);
    }
    return out;
}

}  // namespace chartnl
