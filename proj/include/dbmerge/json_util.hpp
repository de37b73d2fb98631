// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Strict accessors for the JSON documents (schema, config). Every failure
// is an Error carrying the caller-supplied context and `code`.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dbmerge/error.hpp"

namespace dbmerge::jsonu {

inline void require_object(const nlohmann::json& j, const std::string& ctx,
                           ErrorCode code = ErrorCode::MalformedDocument) {
    if (!j.is_object()) throw Error(code, ctx + ": expected an object");
}

/// Unknown keys are rejected so that typos fail fast.
inline void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                       const std::string& ctx, ErrorCode code = ErrorCode::MalformedDocument) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) {
            if (it.key() == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw Error(code, ctx + ": unknown key '" + it.key() + "'");
    }
}

inline std::string get_string(const nlohmann::json& j, const char* key, const std::string& ctx,
                              ErrorCode code = ErrorCode::MalformedDocument) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw Error(code, ctx + ": '" + key + "' must be a string");
    }
    return j[key].get<std::string>();
}

inline std::string get_string_or(const nlohmann::json& j, const char* key, std::string fallback,
                                 const std::string& ctx, ErrorCode code = ErrorCode::MalformedDocument) {
    if (!j.contains(key)) return fallback;
    return get_string(j, key, ctx, code);
}

inline bool get_bool_or(const nlohmann::json& j, const char* key, bool fallback, const std::string& ctx,
                        ErrorCode code = ErrorCode::MalformedDocument) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) throw Error(code, ctx + ": '" + key + "' must be a boolean");
    return j[key].get<bool>();
}

inline std::int64_t get_int(const nlohmann::json& j, const char* key, const std::string& ctx,
                            ErrorCode code = ErrorCode::MalformedDocument) {
    if (!j.contains(key) || !j[key].is_number_integer()) {
        throw Error(code, ctx + ": '" + key + "' must be an integer");
    }
    return j[key].get<std::int64_t>();
}

inline std::int64_t get_int_or(const nlohmann::json& j, const char* key, std::int64_t fallback,
                               const std::string& ctx, ErrorCode code = ErrorCode::MalformedDocument) {
    if (!j.contains(key)) return fallback;
    return get_int(j, key, ctx, code);
}

inline nlohmann::json parse_text(std::string_view text, const std::string& ctx,
                                 ErrorCode code = ErrorCode::MalformedDocument) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(code, ctx + ": " + e.what());
    }
}

inline nlohmann::json parse_file(const std::string& path, ErrorCode code = ErrorCode::MalformedDocument) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path, code);
}

} // namespace dbmerge::jsonu
