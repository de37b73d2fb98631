// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/schema.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "dbmerge/error.hpp"
#include "dbmerge/json_util.hpp"

namespace dbmerge {

using nlohmann::json;

const ColumnDef* TableDef::find_column(std::string_view col) const {
    for (const auto& c : columns) {
        if (c.name == col) return &c;
    }
    return nullptr;
}

const ColumnDef& TableDef::primary_key_column() const {
    const ColumnDef* c = find_column(primary_key);
    if (!c) throw Error(ErrorCode::MalformedDocument, name + ": primary key column missing");
    return *c;
}

const ColumnDef* TableDef::identity_column() const {
    for (const auto& c : columns) {
        if (c.is_identity) return &c;
    }
    return nullptr;
}

const ForeignKeyDef* TableDef::foreign_key_on(std::string_view col) const {
    for (const auto& fk : foreign_keys) {
        if (fk.from_column == col) return &fk;
    }
    return nullptr;
}

SchemaModel SchemaModel::from_tables(std::vector<TableDef> tables) {
    SchemaModel model;
    for (auto& t : tables) {
        if (t.name.empty()) throw Error(ErrorCode::MalformedDocument, "table with empty name");
        std::set<std::string> seen;
        int identities = 0;
        for (const auto& c : t.columns) {
            if (c.name.empty()) throw Error(ErrorCode::MalformedDocument, t.name + ": column with empty name");
            if (!seen.insert(c.name).second) {
                throw Error(ErrorCode::MalformedDocument, t.name + ": duplicate column " + c.name);
            }
            if (c.is_identity) {
                ++identities;
                if (c.kind != DataKind::Integer || c.nullable) {
                    throw Error(ErrorCode::MalformedDocument,
                                t.name + "." + c.name + ": identity column must be a non-null integer");
                }
            }
            if (c.scale < 0 || c.scale > Decimal::kMaxScale) {
                throw Error(ErrorCode::MalformedDocument, t.name + "." + c.name + ": scale out of range");
            }
        }
        if (identities > 1) throw Error(ErrorCode::MalformedDocument, t.name + ": more than one identity column");
        if (!t.find_column(t.primary_key)) {
            throw Error(ErrorCode::MalformedDocument, t.name + ": primary key '" + t.primary_key + "' is not a column");
        }
        for (auto& fk : t.foreign_keys) {
            fk.from_table = t.name;
            if (!t.find_column(fk.from_column)) {
                throw Error(ErrorCode::DanglingReference, t.name + "." + fk.from_column + ": no such column");
            }
        }
        std::string name = t.name;
        if (!model.tables_.emplace(name, std::move(t)).second) {
            throw Error(ErrorCode::DuplicateTable, name);
        }
    }

    std::set<std::string> participating;
    for (const auto& [name, t] : model.tables_) {
        for (const auto& fk : t.foreign_keys) {
            const TableDef* target = model.find(fk.to_table);
            if (!target) {
                throw Error(ErrorCode::DanglingReference,
                            name + "." + fk.from_column + " -> unknown table " + fk.to_table);
            }
            if (target->primary_key != fk.to_column) {
                throw Error(ErrorCode::DanglingReference, name + "." + fk.from_column + " -> " + fk.to_table +
                                                              "." + fk.to_column + " is not its primary key");
            }
            participating.insert(name);
            participating.insert(fk.to_table);
        }
    }
    // Mapping tables carry integer keys only.
    for (const auto& name : participating) {
        const TableDef& t = model.tables_.at(name);
        if (t.primary_key_column().kind != DataKind::Integer) {
            throw Error(ErrorCode::MalformedDocument,
                        name + ": tables taking part in foreign keys need an integer primary key");
        }
    }
    return model;
}

const TableDef* SchemaModel::find(std::string_view name) const {
    auto it = tables_.find(name);
    return it == tables_.end() ? nullptr : &it->second;
}

const TableDef& SchemaModel::at(std::string_view name) const {
    const TableDef* t = find(name);
    if (!t) throw Error(ErrorCode::UnknownTable, std::string(name));
    return *t;
}

std::size_t SchemaModel::foreign_key_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tables_) n += t.foreign_keys.size();
    return n;
}

namespace {

ColumnDef parse_column(const json& j, const std::string& table) {
    const std::string ctx = "column of " + table;
    jsonu::require_object(j, ctx);
    jsonu::check_keys(j, {"name", "dataKind", "nullable", "isIdentity", "scale"}, ctx);
    ColumnDef c;
    c.name = jsonu::get_string(j, "name", ctx);
    std::string kind = jsonu::get_string(j, "dataKind", ctx);
    auto k = parse_data_kind(kind);
    if (!k) throw Error(ErrorCode::MalformedDocument, table + "." + c.name + ": unknown dataKind '" + kind + "'");
    c.kind = *k;
    c.nullable = jsonu::get_bool_or(j, "nullable", true, ctx);
    c.is_identity = jsonu::get_bool_or(j, "isIdentity", false, ctx);
    c.scale = static_cast<int>(jsonu::get_int_or(j, "scale", 2, ctx));
    return c;
}

TableDef parse_table(const json& j) {
    jsonu::require_object(j, "table");
    jsonu::check_keys(j, {"name", "columns", "primaryKey", "foreignKeys"}, "table");
    TableDef t;
    t.name = jsonu::get_string(j, "name", "table");
    const std::string ctx = "table " + t.name;
    if (!j.contains("columns") || !j["columns"].is_array()) {
        throw Error(ErrorCode::MalformedDocument, ctx + ": 'columns' must be an array");
    }
    for (const auto& c : j["columns"]) t.columns.push_back(parse_column(c, t.name));
    if (!j.contains("primaryKey") || !j["primaryKey"].is_string()) {
        throw Error(ErrorCode::MalformedDocument, ctx + ": 'primaryKey' must name a single column");
    }
    t.primary_key = j["primaryKey"].get<std::string>();
    if (j.contains("foreignKeys")) {
        if (!j["foreignKeys"].is_array()) throw Error(ErrorCode::MalformedDocument, ctx + ": 'foreignKeys' must be an array");
        for (const auto& f : j["foreignKeys"]) {
            jsonu::require_object(f, ctx + " foreign key");
            jsonu::check_keys(f, {"fromColumn", "toTable", "toColumn"}, ctx + " foreign key");
            ForeignKeyDef fk;
            fk.from_table = t.name;
            fk.from_column = jsonu::get_string(f, "fromColumn", ctx);
            fk.to_table = jsonu::get_string(f, "toTable", ctx);
            fk.to_column = jsonu::get_string(f, "toColumn", ctx);
            t.foreign_keys.push_back(std::move(fk));
        }
    }
    return t;
}

} // namespace

SchemaModel parse_schema(const json& doc) {
    jsonu::require_object(doc, "schema document");
    jsonu::check_keys(doc, {"tables"}, "schema document");
    if (!doc.contains("tables") || !doc["tables"].is_array()) {
        throw Error(ErrorCode::MalformedDocument, "schema document needs a 'tables' array");
    }
    std::vector<TableDef> tables;
    for (const auto& t : doc["tables"]) tables.push_back(parse_table(t));
    return SchemaModel::from_tables(std::move(tables));
}

SchemaModel parse_schema_text(std::string_view text) {
    return parse_schema(jsonu::parse_text(text, "schema document"));
}

SchemaModel load_schema_file(const std::string& path) {
    return parse_schema(jsonu::parse_file(path));
}

json schema_to_json(const SchemaModel& schema) {
    json tables = json::array();
    for (const auto& [name, t] : schema.tables()) {
        json cols = json::array();
        for (const auto& c : t.columns) {
            json jc = {{"name", c.name}, {"dataKind", std::string(to_string(c.kind))}, {"nullable", c.nullable}};
            if (c.is_identity) jc["isIdentity"] = true;
            if (c.kind == DataKind::Decimal && c.scale != 2) jc["scale"] = c.scale;
            cols.push_back(std::move(jc));
        }
        json fks = json::array();
        for (const auto& fk : t.foreign_keys) {
            fks.push_back({{"fromColumn", fk.from_column}, {"toTable", fk.to_table}, {"toColumn", fk.to_column}});
        }
        tables.push_back({{"name", name}, {"columns", cols}, {"primaryKey", t.primary_key}, {"foreignKeys", fks}});
    }
    return json{{"tables", tables}};
}

std::map<std::string, std::set<std::string>> FkGraph::adjacency() const {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& n : nodes) adj[n];
    for (const auto& [from, to] : edges) adj[from].insert(to);
    return adj;
}

FkGraph fk_graph(const SchemaModel& schema) {
    FkGraph g;
    for (const auto& [name, t] : schema.tables()) {
        g.nodes.insert(name);
        for (const auto& fk : t.foreign_keys) {
            if (fk.is_self_reference()) {
                g.self_loops.insert(name);
            } else {
                g.edges.emplace_back(fk.to_table, name);
            }
        }
    }
    return g;
}

std::size_t LoadOrder::position(std::string_view table) const {
    auto it = std::find(tables.begin(), tables.end(), table);
    return static_cast<std::size_t>(it - tables.begin());
}

std::optional<std::vector<std::string>> find_cycle(const FkGraph& graph) {
    auto adj = graph.adjacency();
    enum class Color { White, Grey, Black };
    std::map<std::string, Color> color;
    for (const auto& n : graph.nodes) color[n] = Color::White;
    std::vector<std::string> stack;
    std::optional<std::vector<std::string>> found;

    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
        color[n] = Color::Grey;
        stack.push_back(n);
        for (const auto& next : adj[n]) {
            if (next == n) continue;
            if (color[next] == Color::Grey) {
                auto start = std::find(stack.begin(), stack.end(), next);
                std::vector<std::string> path(start, stack.end());
                path.push_back(next);
                found = std::move(path);
                return true;
            }
            if (color[next] == Color::White && visit(next)) return true;
        }
        stack.pop_back();
        color[n] = Color::Black;
        return false;
    };
    for (const auto& n : graph.nodes) {
        if (color[n] == Color::White && visit(n)) return found;
    }
    return std::nullopt;
}

LoadOrder order_graph(const FkGraph& graph) {
    if (auto cycle = find_cycle(graph)) {
        std::ostringstream os;
        for (std::size_t i = 0; i < cycle->size(); ++i) os << (i ? " -> " : "") << (*cycle)[i];
        throw Error(ErrorCode::CyclicDependency, os.str());
    }
    auto adj = graph.adjacency();
    std::map<std::string, int> indegree;
    std::map<std::string, int> level;
    for (const auto& n : graph.nodes) {
        indegree[n] = 0;
        level[n] = 0;
    }
    for (const auto& [n, succ] : adj) {
        for (const auto& s : succ) {
            if (s != n) ++indegree[s];
        }
    }
    std::vector<std::string> ready;
    for (const auto& [n, d] : indegree) {
        if (d == 0) ready.push_back(n);
    }
    while (!ready.empty()) {
        std::string n = ready.back();
        ready.pop_back();
        for (const auto& s : adj[n]) {
            if (s == n) continue;
            level[s] = std::max(level[s], level[n] + 1);
            if (--indegree[s] == 0) ready.push_back(s);
        }
    }
    LoadOrder out;
    out.tables.assign(graph.nodes.begin(), graph.nodes.end());
    std::stable_sort(out.tables.begin(), out.tables.end(),
                     [&](const std::string& a, const std::string& b) { return level[a] < level[b]; });
    out.two_pass = graph.self_loops;
    return out;
}

LoadOrder load_order(const SchemaModel& schema) { return order_graph(fk_graph(schema)); }

} // namespace dbmerge
