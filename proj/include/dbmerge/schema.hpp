// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dbmerge/value.hpp"

namespace dbmerge {

struct ColumnDef {
    std::string name;
    DataKind kind = DataKind::Text;
    bool nullable = true;
    bool is_identity = false;
    /// Fractional digits kept for decimal columns.
    int scale = 2;
};

struct ForeignKeyDef {
    std::string from_table;
    std::string from_column;
    std::string to_table;
    std::string to_column;

    bool is_self_reference() const { return from_table == to_table; }
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;
    std::string primary_key;
    std::vector<ForeignKeyDef> foreign_keys;

    const ColumnDef* find_column(std::string_view col) const;
    const ColumnDef& primary_key_column() const;
    const ColumnDef* identity_column() const;
    /// FK whose from_column is `col`, if any.
    const ForeignKeyDef* foreign_key_on(std::string_view col) const;
};

class SchemaModel {
public:
    SchemaModel() = default;

    /// Validates every table invariant and cross-table reference.
    /// Throws Error(DuplicateTable | DanglingReference | MalformedDocument).
    static SchemaModel from_tables(std::vector<TableDef> tables);

    const std::map<std::string, TableDef, std::less<>>& tables() const { return tables_; }
    const TableDef* find(std::string_view name) const;
    /// Throws Error(UnknownTable).
    const TableDef& at(std::string_view name) const;
    std::size_t size() const { return tables_.size(); }
    std::size_t foreign_key_count() const;

private:
    std::map<std::string, TableDef, std::less<>> tables_;
};

/// Parses the JSON schema document (top-level `tables` array).
SchemaModel parse_schema(const nlohmann::json& doc);
SchemaModel parse_schema_text(std::string_view text);
SchemaModel load_schema_file(const std::string& path);
nlohmann::json schema_to_json(const SchemaModel& schema);

/// Foreign-key dependency graph. Edges run from the referenced table to the
/// referencing table, one per ForeignKeyDef (parallel edges are kept).
/// Self-references are recorded as markers, never as edges.
struct FkGraph {
    std::set<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::set<std::string> self_loops;

    /// Distinct successors per node.
    std::map<std::string, std::set<std::string>> adjacency() const;
};

FkGraph fk_graph(const SchemaModel& schema);

struct LoadOrder {
    std::vector<std::string> tables;
    /// Tables with self-referencing FKs; loaded in two passes.
    std::set<std::string> two_pass;

    std::size_t position(std::string_view table) const;
};

/// "Populate by priority": a table with no outgoing foreign keys has
/// priority level 0, every other table sits one level below the lowest
/// priority table it references. Tables load by ascending level, ties by
/// table name. Throws Error(CyclicDependency) naming one cycle as a path.
LoadOrder load_order(const SchemaModel& schema);

/// Same ordering over an arbitrary graph (used by the planner, which adds
/// lookup-table edges). Cycle reported as "A -> B -> A".
LoadOrder order_graph(const FkGraph& graph);

/// Finds one cycle in the graph (self-loops ignored), as a closed path.
std::optional<std::vector<std::string>> find_cycle(const FkGraph& graph);

} // namespace dbmerge
