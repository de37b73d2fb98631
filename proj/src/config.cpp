// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/config.hpp"

#include <algorithm>
#include <set>

#include "dbmerge/error.hpp"
#include "dbmerge/json_util.hpp"

namespace dbmerge {

namespace {

constexpr ErrorCode kInvalid = ErrorCode::ConfigValidationError;

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

/// A schema is either a path to a document or the document inline.
SchemaModel schema_field(const json& doc, const char* key, const std::filesystem::path& base) {
    if (!doc.contains(key)) throw Error(kInvalid, std::string("config: '") + key + "' is required");
    const json& v = doc[key];
    if (v.is_string()) return load_schema_file(resolve(base, v.get<std::string>()).string());
    if (v.is_object()) return parse_schema(v);
    throw Error(kInvalid, std::string("config: '") + key + "' must be a path or a schema object");
}

std::vector<std::string> string_list(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw Error(kInvalid, ctx + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw Error(kInvalid, ctx + ": expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

ExtractOptions parse_extract(const json& j, const TableDef& source, const std::string& ctx) {
    jsonu::require_object(j, ctx, kInvalid);
    jsonu::check_keys(j, {"columns", "filter", "sort"}, ctx, kInvalid);
    ExtractOptions opts;
    auto known = [&](const std::string& c) {
        if (!source.find_column(c)) throw Error(kInvalid, ctx + ": unknown source column '" + c + "'");
    };
    if (j.contains("columns")) {
        opts.selection = string_list(j["columns"], ctx + ".columns");
        for (const auto& c : *opts.selection) known(c);
    }
    if (j.contains("filter")) {
        if (!j["filter"].is_array()) throw Error(kInvalid, ctx + ".filter: expected an array");
        for (const auto& c : j["filter"]) opts.filter.push_back(parse_condition(c, kInvalid));
        for (const auto& c : opts.filter) known(c.column);
    }
    if (j.contains("sort")) {
        if (!j["sort"].is_array()) throw Error(kInvalid, ctx + ".sort: expected an array");
        for (const auto& k : j["sort"]) opts.sort.push_back(parse_sort_key(k, kInvalid));
        for (const auto& k : opts.sort) known(k.column);
    }
    return opts;
}

LookupStep parse_lookup(const std::string& target, const json& j, const MigrationConfig& cfg) {
    const std::string ctx = "tables." + target + ".lookup";
    jsonu::require_object(j, ctx, kInvalid);
    jsonu::check_keys(j, {"sourceColumns", "valueColumn", "normalization"}, ctx, kInvalid);
    LookupStep step;
    step.target = target;
    step.spec.target_lookup_table = target;
    if (!j.contains("sourceColumns") || !j["sourceColumns"].is_array() || j["sourceColumns"].empty()) {
        throw Error(kInvalid, ctx + ": 'sourceColumns' must be a non-empty array");
    }
    for (const auto& c : j["sourceColumns"]) {
        jsonu::require_object(c, ctx + ".sourceColumns", kInvalid);
        jsonu::check_keys(c, {"table", "column"}, ctx + ".sourceColumns", kInvalid);
        ColumnRef ref{jsonu::get_string(c, "table", ctx, kInvalid), jsonu::get_string(c, "column", ctx, kInvalid)};
        const TableDef* t = cfg.source_schema.find(ref.table);
        if (!t) throw Error(kInvalid, ctx + ": unknown source table '" + ref.table + "'");
        const ColumnDef* col = t->find_column(ref.column);
        if (!col) throw Error(kInvalid, ctx + ": unknown source column '" + ref.table + "." + ref.column + "'");
        if (col->kind != DataKind::Text) {
            throw Error(kInvalid, ctx + ": '" + ref.table + "." + ref.column + "' is not a text column");
        }
        step.spec.source_columns.push_back(std::move(ref));
    }
    step.value_column = jsonu::get_string(j, "valueColumn", ctx, kInvalid);
    if (j.contains("normalization")) {
        const json& n = j["normalization"];
        jsonu::require_object(n, ctx + ".normalization", kInvalid);
        jsonu::check_keys(n, {"trimWhitespace", "caseFoldKey"}, ctx + ".normalization", kInvalid);
        step.spec.normalization.trim_whitespace = jsonu::get_bool_or(n, "trimWhitespace", true, ctx, kInvalid);
        step.spec.normalization.case_fold_key = jsonu::get_bool_or(n, "caseFoldKey", true, ctx, kInvalid);
    }
    const TableDef& t = cfg.target_schema.at(target);
    const ColumnDef* vc = t.find_column(step.value_column);
    if (!vc || vc->kind != DataKind::Text) {
        throw Error(kInvalid, ctx + ": valueColumn '" + step.value_column + "' must be a text column of " + target);
    }
    if (!t.primary_key_column().is_identity) {
        throw Error(kInvalid, ctx + ": lookup table needs an identity primary key");
    }
    for (const auto& c : t.columns) {
        if (!c.nullable && c.name != t.primary_key && c.name != step.value_column) {
            throw Error(kInvalid, ctx + ": lookup table column '" + c.name + "' is NOT NULL and cannot be filled");
        }
    }
    if (!t.foreign_keys.empty()) throw Error(kInvalid, ctx + ": lookup tables cannot have foreign keys");
    return step;
}

TableStep parse_table_step(const std::string& target, const json& j, const MigrationConfig& cfg) {
    const std::string ctx = "tables." + target;
    jsonu::check_keys(j, {"source", "mode", "sources", "extract", "rules"}, ctx, kInvalid);
    TableStep step;
    step.target = target;
    step.source_table = jsonu::get_string_or(j, "source", target, ctx, kInvalid);
    const TableDef* src = cfg.source_schema.find(step.source_table);
    if (!src) throw Error(kInvalid, ctx + ": unknown source table '" + step.source_table + "'");

    if (j.contains("sources")) {
        if (!j["sources"].is_array()) throw Error(kInvalid, ctx + ".sources: expected an array of dbids");
        for (const auto& d : j["sources"]) {
            if (!d.is_number_integer()) throw Error(kInvalid, ctx + ".sources: expected an array of dbids");
            int dbid = d.get<int>();
            if (!cfg.find_source(dbid)) throw Error(kInvalid, ctx + ": unknown source dbid " + std::to_string(dbid));
            if (std::find(step.sources.begin(), step.sources.end(), dbid) != step.sources.end()) {
                throw Error(kInvalid, ctx + ": source dbid " + std::to_string(dbid) + " listed twice");
            }
            step.sources.push_back(dbid);
        }
        if (step.sources.empty()) throw Error(kInvalid, ctx + ".sources: must not be empty");
    } else {
        for (const auto& s : cfg.sources) step.sources.push_back(s.tag.dbid);
    }

    const std::string mode = jsonu::get_string_or(j, "mode", "generateKeys", ctx, kInvalid);
    if (mode == "generateKeys") {
        step.mode = LoadMode::generate();
    } else if (mode == "preserveKeys") {
        if (!cfg.target_schema.at(target).primary_key_column().is_identity) {
            throw Error(kInvalid, ctx + ": preserveKeys needs an identity primary key in the target");
        }
        if (step.sources.size() != 1) {
            throw Error(kInvalid, ctx + ": preserveKeys needs exactly one source, got " +
                                      std::to_string(step.sources.size()));
        }
        step.mode = LoadMode::preserve(step.sources.front());
    } else {
        throw Error(kInvalid, ctx + ": mode must be generateKeys or preserveKeys");
    }

    if (j.contains("extract")) step.extract = parse_extract(j["extract"], *src, ctx + ".extract");
    if (j.contains("rules")) {
        if (!j["rules"].is_array()) throw Error(kInvalid, ctx + ".rules: expected an array");
        for (const auto& r : j["rules"]) step.rules.push_back(parse_rule(r));
    }
    return step;
}

DiscriminatorConfig parse_discriminator(const json& j, const MigrationConfig& cfg) {
    const std::string ctx = "discriminator";
    jsonu::require_object(j, ctx, kInvalid);
    jsonu::check_keys(j, {"table", "column", "valueBySource", "rows"}, ctx, kInvalid);
    DiscriminatorConfig d;
    d.spec.table = jsonu::get_string(j, "table", ctx, kInvalid);
    d.spec.column = jsonu::get_string(j, "column", ctx, kInvalid);
    const TableDef* t = cfg.target_schema.find(d.spec.table);
    if (!t) throw Error(kInvalid, ctx + ": unknown target table '" + d.spec.table + "'");
    if (!t->foreign_keys.empty()) throw Error(kInvalid, ctx + ": discriminator table cannot have foreign keys");
    if (!t->primary_key_column().is_identity) {
        throw Error(kInvalid, ctx + ": discriminator table needs an identity primary key");
    }

    if (!j.contains("valueBySource") || !j["valueBySource"].is_object()) {
        throw Error(kInvalid, ctx + ": 'valueBySource' must be an object keyed by dbid");
    }
    for (auto it = j["valueBySource"].begin(); it != j["valueBySource"].end(); ++it) {
        int dbid = 0;
        try {
            std::size_t used = 0;
            dbid = std::stoi(it.key(), &used);
            if (used != it.key().size()) throw std::invalid_argument(it.key());
        } catch (const std::exception&) {
            throw Error(kInvalid, ctx + ".valueBySource: key '" + it.key() + "' is not a dbid");
        }
        if (!it.value().is_number_integer()) throw Error(kInvalid, ctx + ".valueBySource: values must be integers");
        d.spec.value_by_source[dbid] = it.value().get<std::int64_t>();
    }
    for (const auto& s : cfg.sources) {
        if (!d.spec.value_by_source.contains(s.tag.dbid)) {
            throw Error(kInvalid, ctx + ": no value for source dbid " + std::to_string(s.tag.dbid));
        }
    }

    if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].empty()) {
        throw Error(kInvalid, ctx + ": 'rows' must list the discriminator table's rows");
    }
    std::set<std::int64_t> keys;
    for (const auto& r : j["rows"]) {
        jsonu::require_object(r, ctx + ".rows", kInvalid);
        Row row;
        row.table = d.spec.table;
        for (auto it = r.begin(); it != r.end(); ++it) {
            if (!t->find_column(it.key())) throw Error(kInvalid, ctx + ".rows: unknown column '" + it.key() + "'");
            row.set(it.key(), json_to_value(it.value()));
        }
        const auto* pk = std::get_if<std::int64_t>(&row.get(t->primary_key));
        if (!pk) throw Error(kInvalid, ctx + ".rows: every row needs an integer " + t->primary_key);
        if (!keys.insert(*pk).second) throw Error(kInvalid, ctx + ".rows: duplicate key " + std::to_string(*pk));
        row.ref = "seed:" + d.spec.table + ":" + std::to_string(*pk);
        d.rows.push_back(std::move(row));
    }
    for (const auto& [dbid, key] : d.spec.value_by_source) {
        if (!keys.contains(key)) {
            throw Error(kInvalid, ctx + ": value " + std::to_string(key) + " for dbid " + std::to_string(dbid) +
                                      " is not among the seeded rows");
        }
    }
    return d;
}

} // namespace

const SourceConfig* MigrationConfig::find_source(int dbid) const {
    for (const auto& s : sources) {
        if (s.tag.dbid == dbid) return &s;
    }
    return nullptr;
}

MigrationConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    jsonu::require_object(doc, "config", kInvalid);
    jsonu::check_keys(doc,
                      {"sources", "target", "sourceSchema", "targetSchema", "policy", "batchSize", "discriminator",
                       "steps", "tables"},
                      "config", kInvalid);
    MigrationConfig cfg;
    cfg.base_dir = base_dir;

    if (!doc.contains("sources") || !doc["sources"].is_array() || doc["sources"].empty()) {
        throw Error(kInvalid, "config: 'sources' must be a non-empty array");
    }
    for (const auto& s : doc["sources"]) {
        jsonu::require_object(s, "sources[]", kInvalid);
        jsonu::check_keys(s, {"path", "dbid", "label"}, "sources[]", kInvalid);
        SourceConfig sc;
        sc.path = resolve(base_dir, jsonu::get_string(s, "path", "sources[]", kInvalid));
        sc.tag.dbid = static_cast<int>(jsonu::get_int(s, "dbid", "sources[]", kInvalid));
        sc.tag.label = jsonu::get_string_or(s, "label", "source" + std::to_string(sc.tag.dbid), "sources[]", kInvalid);
        if (cfg.find_source(sc.tag.dbid)) {
            throw Error(kInvalid, "config: duplicate source dbid " + std::to_string(sc.tag.dbid));
        }
        cfg.sources.push_back(std::move(sc));
    }
    cfg.target = resolve(base_dir, jsonu::get_string(doc, "target", "config", kInvalid));
    cfg.source_schema = schema_field(doc, "sourceSchema", base_dir);
    cfg.target_schema = schema_field(doc, "targetSchema", base_dir);

    const std::string policy = jsonu::get_string_or(doc, "policy", "reject", "config", kInvalid);
    auto p = parse_row_policy(policy);
    if (!p) throw Error(kInvalid, "config: policy must be reject or abort");
    cfg.policy = *p;
    std::int64_t batch = jsonu::get_int_or(doc, "batchSize", 500, "config", kInvalid);
    if (batch < 1) throw Error(kInvalid, "config: batchSize must be positive");
    cfg.batch_size = static_cast<std::size_t>(batch);

    if (doc.contains("discriminator")) cfg.discriminator = parse_discriminator(doc["discriminator"], cfg);

    if (!doc.contains("tables") || !doc["tables"].is_object()) {
        throw Error(kInvalid, "config: 'tables' must be an object keyed by target table");
    }
    for (auto it = doc["tables"].begin(); it != doc["tables"].end(); ++it) {
        const std::string& name = it.key();
        if (!cfg.target_schema.find(name)) throw Error(kInvalid, "tables: unknown target table '" + name + "'");
        if (cfg.discriminator && cfg.discriminator->spec.table == name) {
            throw Error(kInvalid, "tables." + name + ": the discriminator table is seeded, not migrated");
        }
        jsonu::require_object(it.value(), "tables." + name, kInvalid);
        if (it.value().contains("lookup")) {
            jsonu::check_keys(it.value(), {"lookup"}, "tables." + name, kInvalid);
            cfg.lookups.emplace(name, parse_lookup(name, it.value()["lookup"], cfg));
        } else {
            cfg.tables.emplace(name, parse_table_step(name, it.value(), cfg));
        }
    }
    if (doc.contains("steps")) cfg.step_order = string_list(doc["steps"], "config.steps");
    return cfg;
}

MigrationConfig load_config_file(const std::filesystem::path& path) {
    json doc = jsonu::parse_file(path.string(), kInvalid);
    return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

} // namespace dbmerge
