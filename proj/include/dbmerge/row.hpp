// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbmerge/error.hpp"
#include "dbmerge/value.hpp"

namespace dbmerge {

/// Identifies one legacy database. `dbid` is the DBID column of the
/// mapping tables.
struct SourceTag {
    int dbid = 0;
    std::string label;

    bool operator==(const SourceTag&) const = default;
};

struct Field {
    std::string name;
    Value value;

    bool operator==(const Field& o) const { return name == o.name && values_equal(value, o.value); }
};

/// One record in flight between extract and load. Column order is kept.
struct Row {
    std::string table;
    SourceTag origin;
    /// Stable reference to the source record ("<dbid>:<table>:<pk>"),
    /// used in reject reports.
    std::string ref;
    std::vector<Field> fields;

    const Value* find(std::string_view column) const;
    Value* find(std::string_view column);
    bool has(std::string_view column) const { return find(column) != nullptr; }
    /// Null when absent.
    const Value& get(std::string_view column) const;
    /// Replaces in place, or appends a new column.
    void set(std::string_view column, Value v);
    bool erase(std::string_view column);
    std::vector<std::string> column_names() const;

    bool operator==(const Row&) const = default;
};

/// A row diverted from the load, with the reason.
struct RejectedRow {
    std::string table;
    int dbid = 0;
    std::string ref;
    RowFault fault;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge, IsNull, NotNull };

std::optional<CompareOp> parse_compare_op(std::string_view s) noexcept;
std::string_view to_string(CompareOp op) noexcept;

/// `column op literal`; comparisons against null are false (SQL semantics).
struct Condition {
    std::string column;
    CompareOp op = CompareOp::Eq;
    Value literal;

    bool matches(const Row& row) const;
};

/// True when every condition holds.
bool matches_all(const std::vector<Condition>& conditions, const Row& row);

struct SortKey {
    std::string column;
    bool descending = false;
};

/// Stable sort; nulls first in ascending order.
void sort_rows(std::vector<Row>& rows, const std::vector<SortKey>& keys);

} // namespace dbmerge
