#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "decomp/types.hpp"

namespace decomp::jsonutil {

/// Rejects keys outside `allowed` so typos in configs surface early.
inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
}

/// Overwrites `out` when `key` is present.
template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("bad value for '") + key + "'");
    }
}

}  // namespace decomp::jsonutil
