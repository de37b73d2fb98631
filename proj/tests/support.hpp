// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit and acceptance tests. The oracles here work
// from raw SQL reads and plain containers so they do not lean on the code
// they check.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "dbmerge/row.hpp"
#include "dbmerge/schema.hpp"
#include "dbmerge/sqlite.hpp"

namespace dbmerge::testing {

/// Directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("dbmerge_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline Row make_row(std::string table, int dbid, std::initializer_list<std::pair<const char*, Value>> fields) {
    Row r;
    r.table = std::move(table);
    r.origin = SourceTag{dbid, "db" + std::to_string(dbid)};
    for (const auto& [name, value] : fields) r.set(name, value);
    const Value* id = r.find("ID");
    r.ref = std::to_string(dbid) + ":" + r.table + ":" + (id ? to_display(*id) : std::string("?"));
    return r;
}

inline std::int64_t count_rows(sql::Database& db, const std::string& table) {
    return db.query_int("SELECT count(*) FROM " + sql::quote_ident(table));
}

/// Every row of `table` as display strings, ordered by the given column.
inline std::vector<std::vector<std::string>> dump_table(sql::Database& db, const std::string& table,
                                                        const std::string& order_by) {
    std::vector<std::vector<std::string>> out;
    auto st = db.prepare("SELECT * FROM " + sql::quote_ident(table) + " ORDER BY " + sql::quote_ident(order_by));
    while (st.step()) {
        std::vector<std::string> row;
        for (int c = 0; c < st.column_count(); ++c) row.push_back(st.is_null(c) ? "<null>" : st.column_text(c));
        out.push_back(std::move(row));
    }
    return out;
}

inline std::map<std::int64_t, std::string> id_to_text(sql::Database& db, const std::string& table,
                                                      const std::string& column) {
    std::map<std::int64_t, std::string> out;
    auto st = db.prepare("SELECT ID, " + sql::quote_ident(column) + " FROM " + sql::quote_ident(table));
    while (st.step()) out[st.column_int(0)] = st.column_text(1);
    return out;
}

/// (parent name, child name) pairs of a link table, joined by hand.
inline std::multiset<std::pair<std::string, std::string>> link_pairs(sql::Database& db, const std::string& link,
                                                                     const std::string& left_col,
                                                                     const std::string& left_table,
                                                                     const std::string& right_col,
                                                                     const std::string& right_table) {
    auto left = id_to_text(db, left_table, "Name");
    auto right = id_to_text(db, right_table, "Name");
    std::multiset<std::pair<std::string, std::string>> out;
    auto st = db.prepare("SELECT " + sql::quote_ident(left_col) + ", " + sql::quote_ident(right_col) + " FROM " +
                         sql::quote_ident(link));
    while (st.step()) out.emplace(left.at(st.column_int(0)), right.at(st.column_int(1)));
    return out;
}

/// Random acyclic schema: tables T00..Tnn, every FK points from a later to
/// an earlier table in a hidden random permutation.
struct RandomSchema {
    std::vector<TableDef> tables;
    std::vector<std::pair<std::string, std::string>> fks; // (from table, to table)
};

inline RandomSchema random_dag(std::mt19937_64& rng, std::size_t max_tables, std::size_t max_fks) {
    std::size_t n = 1 + rng() % max_tables;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back((i < 10 ? "T0" : "T") + std::to_string(i));
    std::vector<std::string> hidden = names;
    std::shuffle(hidden.begin(), hidden.end(), rng);

    RandomSchema s;
    std::map<std::string, TableDef> defs;
    for (const auto& name : names) {
        TableDef t;
        t.name = name;
        t.primary_key = "ID";
        t.columns.push_back(ColumnDef{"ID", DataKind::Integer, false, true, 2});
        defs[name] = std::move(t);
    }
    std::size_t fks = n < 2 ? 0 : rng() % (max_fks + 1);
    for (std::size_t k = 0; k < fks; ++k) {
        std::size_t a = rng() % n;
        std::size_t b = rng() % n;
        if (a == b) continue;
        if (a < b) std::swap(a, b); // hidden[a] references hidden[b], b earlier
        TableDef& from = defs[hidden[a]];
        std::string col = "FK" + std::to_string(k);
        from.columns.push_back(ColumnDef{col, DataKind::Integer, true, false, 2});
        from.foreign_keys.push_back(ForeignKeyDef{from.name, col, hidden[b], "ID"});
        s.fks.emplace_back(hidden[a], hidden[b]);
    }
    for (auto& [_, t] : defs) s.tables.push_back(std::move(t));
    return s;
}

} // namespace dbmerge::testing
