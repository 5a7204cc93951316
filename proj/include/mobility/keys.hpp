#pragma once

// Heterogeneous string keys: unordered containers that accept string_view
// lookups without allocating.

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace mobility {

struct SvHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const { return std::hash<std::string_view>()(s); }
};
struct SvEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const { return a == b; }
};

template <typename V>
using StringMap = std::unordered_map<std::string, V, SvHash, SvEq>;
using StringSet = std::unordered_set<std::string, SvHash, SvEq>;

} // namespace mobility
