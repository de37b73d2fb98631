// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dbmerge/keymap.hpp"
#include "dbmerge/row.hpp"
#include "dbmerge/rules.hpp"
#include "dbmerge/schema.hpp"
#include "dbmerge/sqlite.hpp"

namespace dbmerge {

enum class LoadModeKind { GenerateKeys, PreserveKeys };

struct LoadMode {
    LoadModeKind kind = LoadModeKind::GenerateKeys;
    /// PreserveKeys only: the one source whose keys are written verbatim.
    int designated_source = 0;

    static LoadMode generate() { return {}; }
    static LoadMode preserve(int dbid) { return {LoadModeKind::PreserveKeys, dbid}; }
};

struct LoadOptions {
    LoadMode mode;
    RowPolicy policy = RowPolicy::RejectRow;
    std::size_t batch_size = 500;
    /// Self-referencing FK columns, filled in by a second pass once every
    /// row of the table has its new key.
    std::vector<std::string> deferred_self_references;
};

struct LoadResult {
    std::size_t loaded = 0;
    std::vector<RejectedRow> rejected;
};

/// Next identity value the target would assign for `table`.
std::int64_t next_identity(sql::Database& target, const TableDef& table);

/// Inserts `rows` into `table` inside a savepoint.
///
/// GenerateKeys assigns fresh identity values and records (dbid, old pk) ->
/// new pk in `keymap`; PreserveKeys writes the legacy key verbatim (the
/// identity continues after the largest loaded key) and records old -> old.
/// Constraint violations are per-row faults; under Abort the savepoint is
/// rolled back and Error(AbortSignal) is thrown. Every map in
/// `dependencies` must be sealed, else Error(PreconditionError).
LoadResult load_table(sql::Database& target, std::vector<Row> rows, const TableDef& table, const LoadOptions& options,
                      KeyMap& keymap, std::span<const KeyMap* const> dependencies = {});

/// Per-source discriminator key stamped onto consolidated rows.
struct DiscriminatorSpec {
    std::string table;
    std::string column;
    std::map<int, std::int64_t> value_by_source;
};

/// Adds spec.column = value_by_source[origin.dbid] to every row.
/// Throws Error(UncoveredSource).
std::vector<Row> backfill_discriminator(std::vector<Row> rows, const DiscriminatorSpec& spec);

// ---------------------------------------------------------------------------
// Reporting

struct TableReport {
    std::size_t extracted = 0;
    std::size_t transformed = 0;
    std::size_t loaded = 0;
    std::size_t rejected = 0;
    std::vector<RejectedRow> reject_reasons;
    /// Completed by an earlier run and restored from the step journal.
    bool resumed = false;

    bool reconciles() const { return extracted == loaded + rejected; }
};

struct LoadReport {
    std::vector<std::pair<std::string, TableReport>> tables;
    bool aborted = false;
    std::string abort_cause;

    TableReport& table(const std::string& name);
    const TableReport* find(std::string_view name) const;
    bool reconciles() const;

    /// `table,extracted,transformed,loaded,rejected`, one header line.
    std::string to_csv() const;
    /// `table,dbid,ref,reason` for every rejected row.
    std::string rejects_csv() const;
    std::string to_text(std::size_t max_rejects = 50) const;
};

// ---------------------------------------------------------------------------
// Verification

struct DanglingFinding {
    std::string table;
    std::string column;
    std::string references;
    std::int64_t count = 0;
};

struct IntegrityReport {
    std::map<std::string, std::int64_t> row_counts;
    std::vector<DanglingFinding> dangling;
    std::map<std::string, std::int64_t> duplicate_pks;
    std::vector<std::string> missing_tables;

    std::int64_t dangling_total() const;
    std::int64_t duplicate_total() const;
    bool clean() const { return dangling_total() == 0 && duplicate_total() == 0 && missing_tables.empty(); }
    std::string to_text() const;
};

/// Counts dangling foreign keys and duplicate primary keys in every table
/// of `schema` as they exist in `target`.
IntegrityReport verify_target(sql::Database& target, const SchemaModel& schema);

/// CREATE TABLE statements for the embedded engine: identity columns
/// become INTEGER PRIMARY KEY AUTOINCREMENT, decimals are stored as text.
std::string sqlite_ddl(const TableDef& table);
std::string sqlite_ddl(const SchemaModel& schema);

} // namespace dbmerge
