// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/row.hpp"

#include <algorithm>

namespace dbmerge {

const Value* Row::find(std::string_view column) const {
    for (const auto& f : fields) {
        if (f.name == column) return &f.value;
    }
    return nullptr;
}

Value* Row::find(std::string_view column) {
    for (auto& f : fields) {
        if (f.name == column) return &f.value;
    }
    return nullptr;
}

const Value& Row::get(std::string_view column) const {
    static const Value kNull{};
    const Value* v = find(column);
    return v ? *v : kNull;
}

void Row::set(std::string_view column, Value v) {
    if (Value* existing = find(column)) {
        *existing = std::move(v);
        return;
    }
    fields.push_back(Field{std::string(column), std::move(v)});
}

bool Row::erase(std::string_view column) {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.name == column; });
    if (it == fields.end()) return false;
    fields.erase(it);
    return true;
}

std::vector<std::string> Row::column_names() const {
    std::vector<std::string> out;
    out.reserve(fields.size());
    for (const auto& f : fields) out.push_back(f.name);
    return out;
}

std::optional<CompareOp> parse_compare_op(std::string_view s) noexcept {
    if (s == "=" || s == "==") return CompareOp::Eq;
    if (s == "!=" || s == "<>") return CompareOp::Ne;
    if (s == "<") return CompareOp::Lt;
    if (s == "<=") return CompareOp::Le;
    if (s == ">") return CompareOp::Gt;
    if (s == ">=") return CompareOp::Ge;
    if (s == "isNull") return CompareOp::IsNull;
    if (s == "notNull") return CompareOp::NotNull;
    return std::nullopt;
}

std::string_view to_string(CompareOp op) noexcept {
    switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::IsNull: return "isNull";
    case CompareOp::NotNull: return "notNull";
    }
    return "=";
}

bool Condition::matches(const Row& row) const {
    const Value& v = row.get(column);
    if (op == CompareOp::IsNull) return is_null(v);
    if (op == CompareOp::NotNull) return !is_null(v);
    if (is_null(v) || is_null(literal)) return false;
    auto c = compare_values(v, literal);
    switch (op) {
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
    case CompareOp::Lt: return c < 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Ge: return c >= 0;
    default: return false;
    }
}

bool matches_all(const std::vector<Condition>& conditions, const Row& row) {
    return std::all_of(conditions.begin(), conditions.end(), [&](const Condition& c) { return c.matches(row); });
}

void sort_rows(std::vector<Row>& rows, const std::vector<SortKey>& keys) {
    if (keys.empty()) return;
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
        for (const auto& k : keys) {
            auto c = compare_values(a.get(k.column), b.get(k.column));
            if (c != 0) return k.descending ? c > 0 : c < 0;
        }
        return false;
    });
}

} // namespace dbmerge
