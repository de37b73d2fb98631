// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dbmerge/value.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace dbmerge::sql {

/// Double-quoted SQL identifier.
std::string quote_ident(std::string_view name);

class Statement;

/// Owning sqlite3 connection. Errors surface as Error(SqliteError).
class Database {
public:
    enum class Mode { ReadOnly, ReadWrite, Create };

    /// Throws Error(ConnectionError) when the file cannot be opened in `mode`.
    static Database open(const std::filesystem::path& path, Mode mode);
    static Database in_memory();

    Database(Database&& o) noexcept : db_(o.db_) { o.db_ = nullptr; }
    Database& operator=(Database&& o) noexcept;
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;
    ~Database();

    void exec(std::string_view sql);
    Statement prepare(std::string_view sql);

    std::int64_t last_insert_rowid() const;
    int changes() const;
    bool table_exists(std::string_view name);
    std::vector<std::string> table_names();
    /// Column names as declared in the live table, in order.
    std::vector<std::string> column_names(std::string_view table);
    std::int64_t query_int(std::string_view sql);

    sqlite3* handle() const noexcept { return db_; }
    std::string errmsg() const;

private:
    explicit Database(sqlite3* db) : db_(db) {}
    sqlite3* db_ = nullptr;
};

/// RAII prepared statement.
class Statement {
public:
    Statement(Statement&& o) noexcept : db_(o.db_), stmt_(o.stmt_) { o.stmt_ = nullptr; }
    Statement& operator=(Statement&& o) noexcept;
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;
    ~Statement();

    /// 1-based bind index.
    void bind(int index, const Value& v);
    void bind_all(const std::vector<Value>& values);

    /// Returns true while a row is available. Throws on error.
    bool step();
    /// Steps once; returns the sqlite result code instead of throwing on
    /// constraint failures.
    int step_raw();
    void reset();

    int column_count() const;
    bool is_null(int col) const;
    std::int64_t column_int(int col) const;
    std::string column_text(int col) const;
    /// Raw cell mapped to Value by storage class (REAL becomes Decimal).
    Value column_value(int col) const;

private:
    friend class Database;
    Statement(sqlite3* db, sqlite3_stmt* stmt) : db_(db), stmt_(stmt) {}
    sqlite3* db_;
    sqlite3_stmt* stmt_;
};

/// BEGIN on construction, ROLLBACK on destruction unless committed.
class Transaction {
public:
    explicit Transaction(Database& db, bool immediate = false);
    Transaction(const Transaction&) = delete;
    Transaction& operator=(const Transaction&) = delete;
    ~Transaction();

    void commit();

private:
    Database& db_;
    bool done_ = false;
};

} // namespace dbmerge::sql
