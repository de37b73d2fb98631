// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/extract.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "dbmerge/error.hpp"

namespace dbmerge {

Source Source::open(const std::filesystem::path& path, SourceTag tag) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::ConnectionError, "source database not found: " + path.string());
    }
    return Source(std::move(tag), sql::Database::open(path, sql::Database::Mode::ReadOnly));
}

void Source::begin_snapshot() {
    if (in_snapshot_) return;
    db_.exec("BEGIN");
    // The read lock (and therefore the snapshot) is taken on first read.
    db_.exec("SELECT count(*) FROM sqlite_master");
    in_snapshot_ = true;
}

void Source::end_snapshot() {
    if (!in_snapshot_) return;
    db_.exec("COMMIT");
    in_snapshot_ = false;
}

namespace {

void require_column(const TableDef& table, const std::string& column) {
    if (!table.find_column(column)) throw Error(ErrorCode::UnknownColumn, table.name + "." + column);
}

} // namespace

ExtractResult extract_table(Source& source, const TableDef& table, const ExtractOptions& options) {
    if (!source.db().table_exists(table.name)) {
        throw Error(ErrorCode::UnknownTable, table.name + " in source " + source.tag().label);
    }
    auto live = source.db().column_names(table.name);
    for (const auto& c : table.columns) {
        if (std::find(live.begin(), live.end(), c.name) == live.end()) {
            throw Error(ErrorCode::UnknownColumn, table.name + "." + c.name + " missing in source " + source.tag().label);
        }
    }
    if (options.selection) {
        for (const auto& c : *options.selection) require_column(table, c);
    }
    for (const auto& cond : options.filter) require_column(table, cond.column);
    for (const auto& key : options.sort) require_column(table, key.column);

    std::string sql = "SELECT ";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) sql += ", ";
        sql += sql::quote_ident(table.columns[i].name);
    }
    sql += " FROM " + sql::quote_ident(table.name) + " ORDER BY " + sql::quote_ident(table.primary_key);

    ExtractResult out;
    auto st = source.db().prepare(sql);
    const std::string ref_prefix = std::to_string(source.tag().dbid) + ":" + table.name + ":";
    while (st.step()) {
        Row row;
        row.table = table.name;
        row.origin = source.tag();
        row.fields.reserve(table.columns.size());
        std::optional<RowFault> fault;
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            const ColumnDef& col = table.columns[i];
            Value raw = st.column_value(static_cast<int>(i));
            auto coerced = coerce(raw, col.kind);
            if (!coerced && !fault) {
                fault = RowFault{"RowStructureError",
                                 col.name + "='" + to_display(raw) + "' is not " + std::string(to_string(col.kind))};
            }
            row.fields.push_back(Field{col.name, coerced ? std::move(*coerced) : std::move(raw)});
        }
        row.ref = ref_prefix + to_display(row.get(table.primary_key));
        if (fault) {
            out.diverted.push_back(RejectedRow{table.name, source.tag().dbid, row.ref, std::move(*fault)});
            continue;
        }
        if (!matches_all(options.filter, row)) continue;
        if (options.selection) {
            std::vector<Field> kept;
            kept.reserve(options.selection->size());
            for (const auto& name : *options.selection) kept.push_back(Field{name, row.get(name)});
            row.fields = std::move(kept);
        }
        out.rows.push_back(std::move(row));
    }
    sort_rows(out.rows, options.sort);
    return out;
}

std::string normalize_key(std::string_view value, const Normalization& n) {
    std::string_view v = value;
    if (n.trim_whitespace) {
        auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
        while (!v.empty() && is_space(v.front())) v.remove_prefix(1);
        while (!v.empty() && is_space(v.back())) v.remove_suffix(1);
    }
    std::string out(v);
    if (n.case_fold_key) {
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    return out;
}

namespace {

std::string preserved_form(std::string_view value, const Normalization& n) {
    return normalize_key(value, Normalization{n.trim_whitespace, false});
}

} // namespace

DistinctResult extract_distinct(std::span<Source* const> sources, const SchemaModel& source_schema,
                                const DistinctExtractionSpec& spec) {
    for (const auto& ref : spec.source_columns) {
        const TableDef& t = source_schema.at(ref.table);
        const ColumnDef* c = t.find_column(ref.column);
        if (!c) throw Error(ErrorCode::UnknownColumn, ref.table + "." + ref.column);
        if (c->kind != DataKind::Text) {
            throw Error(ErrorCode::RuleParameterError, ref.table + "." + ref.column + " is not a text column");
        }
    }

    std::map<std::string, std::string> first_seen;
    DistinctResult out;
    for (Source* source : sources) {
        for (const auto& ref : spec.source_columns) {
            const TableDef& t = source_schema.at(ref.table);
            if (!source->db().table_exists(t.name)) {
                throw Error(ErrorCode::UnknownTable, t.name + " in source " + source->tag().label);
            }
            auto live = source->db().column_names(t.name);
            if (std::find(live.begin(), live.end(), ref.column) == live.end()) {
                throw Error(ErrorCode::UnknownColumn, t.name + "." + ref.column + " missing in source " +
                                                          source->tag().label);
            }
            auto st = source->db().prepare("SELECT " + sql::quote_ident(ref.column) + " FROM " +
                                           sql::quote_ident(t.name) + " ORDER BY " +
                                           sql::quote_ident(t.primary_key));
            while (st.step()) {
                if (st.is_null(0)) {
                    ++out.excluded;
                    continue;
                }
                std::string raw = to_display(st.column_value(0));
                std::string key = normalize_key(raw, spec.normalization);
                if (key.empty() || (!spec.normalization.trim_whitespace && normalize_key(raw, {}).empty())) {
                    ++out.excluded;
                    continue;
                }
                first_seen.try_emplace(std::move(key), preserved_form(raw, spec.normalization));
            }
        }
    }
    std::int64_t next = 1;
    out.entries.reserve(first_seen.size());
    for (auto& [key, value] : first_seen) out.entries.push_back(LookupEntry{next++, value, key});
    return out;
}

Lookup::Lookup(std::string table, Normalization normalization, const std::vector<LookupEntry>& entries)
    : table_(std::move(table)), normalization_(normalization) {
    for (const auto& e : entries) ids_.emplace(e.key.empty() ? normalize_key(e.value, normalization_) : e.key, e.id);
}

std::optional<std::int64_t> Lookup::find(std::string_view raw) const {
    auto it = ids_.find(normalize_key(raw, normalization_));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

} // namespace dbmerge
