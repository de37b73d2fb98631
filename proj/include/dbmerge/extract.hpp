// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dbmerge/row.hpp"
#include "dbmerge/schema.hpp"
#include "dbmerge/sqlite.hpp"

namespace dbmerge {

/// A connected legacy database.
class Source {
public:
    Source(SourceTag tag, sql::Database db) : tag_(std::move(tag)), db_(std::move(db)) {}

    /// Opens read-only. Throws Error(ConnectionError).
    static Source open(const std::filesystem::path& path, SourceTag tag);

    const SourceTag& tag() const noexcept { return tag_; }
    sql::Database& db() noexcept { return db_; }

    /// Pins a read snapshot until end_snapshot(); all reads in between see
    /// one consistent state.
    void begin_snapshot();
    void end_snapshot();

private:
    SourceTag tag_;
    sql::Database db_;
    bool in_snapshot_ = false;
};

struct ExtractOptions {
    /// Projection; nullopt keeps every column.
    std::optional<std::vector<std::string>> selection;
    /// Row filter, evaluated on the full coerced row before projection.
    std::vector<Condition> filter;
    /// Sort order; rows otherwise come in primary-key order.
    std::vector<SortKey> sort;
};

struct ExtractResult {
    std::vector<Row> rows;
    /// Rows failing the structure check (RowStructureError).
    std::vector<RejectedRow> diverted;

    /// Rows read = emitted + diverted.
    std::size_t read() const { return rows.size() + diverted.size(); }
};

/// Reads `table` from one source. Each emitted row carries the source's
/// tag and values coerced to the declared data kinds.
/// Throws Error(UnknownTable | UnknownColumn).
ExtractResult extract_table(Source& source, const TableDef& table, const ExtractOptions& options = {});

struct Normalization {
    bool trim_whitespace = true;
    bool case_fold_key = true;
};

/// Dedup key for a free-text value.
std::string normalize_key(std::string_view value, const Normalization& n);

struct ColumnRef {
    std::string table;
    std::string column;
};

struct DistinctExtractionSpec {
    std::vector<ColumnRef> source_columns;
    std::string target_lookup_table;
    Normalization normalization;
};

struct LookupEntry {
    std::int64_t id = 0;
    /// First-seen spelling (trimmed when trimming is on, never case-folded).
    std::string value;
    std::string key;

    bool operator==(const LookupEntry&) const = default;
};

struct DistinctResult {
    std::vector<LookupEntry> entries;
    /// Null and empty-after-trim cells skipped.
    std::size_t excluded = 0;
};

/// SELECT DISTINCT across every source: one entry per normalized key, ids
/// 1..n in ascending key order. Sources are scanned in the given order,
/// rows in primary-key order. Throws Error(UnknownTable | UnknownColumn).
DistinctResult extract_distinct(std::span<Source* const> sources, const SchemaModel& source_schema,
                                const DistinctExtractionSpec& spec);

/// Loaded lookup table, queried by joinLookup.
class Lookup {
public:
    Lookup() = default;
    Lookup(std::string table, Normalization normalization, const std::vector<LookupEntry>& entries);

    const std::string& table() const noexcept { return table_; }
    const Normalization& normalization() const noexcept { return normalization_; }
    /// nullopt on a miss. Callers handle null / empty input first.
    std::optional<std::int64_t> find(std::string_view raw) const;
    std::size_t size() const noexcept { return ids_.size(); }

private:
    std::string table_;
    Normalization normalization_;
    std::map<std::string, std::int64_t, std::less<>> ids_;
};

} // namespace dbmerge
