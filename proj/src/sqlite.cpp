// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/sqlite.hpp"

#include <sqlite3.h>

#include <cstdio>

#include "dbmerge/error.hpp"

namespace dbmerge::sql {

std::string quote_ident(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

Database Database::open(const std::filesystem::path& path, Mode mode) {
    int flags = SQLITE_OPEN_NOMUTEX;
    switch (mode) {
    case Mode::ReadOnly: flags |= SQLITE_OPEN_READONLY; break;
    case Mode::ReadWrite: flags |= SQLITE_OPEN_READWRITE; break;
    case Mode::Create: flags |= SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE; break;
    }
    sqlite3* db = nullptr;
    int rc = sqlite3_open_v2(path.string().c_str(), &db, flags, nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
        sqlite3_close(db);
        throw Error(ErrorCode::ConnectionError, path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db, 30000);
    Database out(db);
    // A file that is not a database only fails on first read.
    try {
        out.exec("SELECT count(*) FROM sqlite_master");
    } catch (const Error& e) {
        throw Error(ErrorCode::ConnectionError, path.string() + ": " + e.detail());
    }
    return out;
}

Database Database::in_memory() {
    sqlite3* db = nullptr;
    if (sqlite3_open(":memory:", &db) != SQLITE_OK) {
        sqlite3_close(db);
        throw Error(ErrorCode::ConnectionError, "cannot open in-memory database");
    }
    return Database(db);
}

Database& Database::operator=(Database&& o) noexcept {
    if (this != &o) {
        if (db_) sqlite3_close(db_);
        db_ = o.db_;
        o.db_ = nullptr;
    }
    return *this;
}

Database::~Database() {
    if (db_) sqlite3_close(db_);
}

void Database::exec(std::string_view sql) {
    char* err = nullptr;
    std::string text(sql);
    int rc = sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
        std::string msg = err ? err : sqlite3_errmsg(db_);
        sqlite3_free(err);
        throw Error(ErrorCode::SqliteError, msg);
    }
}

Statement Database::prepare(std::string_view sql) {
    sqlite3_stmt* stmt = nullptr;
    int rc = sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt, nullptr);
    if (rc != SQLITE_OK) {
        throw Error(ErrorCode::SqliteError, std::string(sqlite3_errmsg(db_)) + " in: " + std::string(sql));
    }
    return Statement(db_, stmt);
}

std::int64_t Database::last_insert_rowid() const { return sqlite3_last_insert_rowid(db_); }

int Database::changes() const { return sqlite3_changes(db_); }

std::string Database::errmsg() const { return sqlite3_errmsg(db_); }

bool Database::table_exists(std::string_view name) {
    auto st = prepare("SELECT 1 FROM sqlite_master WHERE type='table' AND name=?1");
    st.bind(1, Value{std::string(name)});
    return st.step();
}

std::vector<std::string> Database::table_names() {
    auto st = prepare("SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%' ORDER BY name");
    std::vector<std::string> out;
    while (st.step()) out.push_back(st.column_text(0));
    return out;
}

std::vector<std::string> Database::column_names(std::string_view table) {
    auto st = prepare("SELECT name FROM pragma_table_info(?1) ORDER BY cid");
    st.bind(1, Value{std::string(table)});
    std::vector<std::string> out;
    while (st.step()) out.push_back(st.column_text(0));
    return out;
}

std::int64_t Database::query_int(std::string_view sql) {
    auto st = prepare(sql);
    if (!st.step() || st.is_null(0)) return 0;
    return st.column_int(0);
}

Statement& Statement::operator=(Statement&& o) noexcept {
    if (this != &o) {
        if (stmt_) sqlite3_finalize(stmt_);
        db_ = o.db_;
        stmt_ = o.stmt_;
        o.stmt_ = nullptr;
    }
    return *this;
}

Statement::~Statement() {
    if (stmt_) sqlite3_finalize(stmt_);
}

void Statement::bind(int index, const Value& v) {
    int rc = SQLITE_OK;
    if (std::holds_alternative<std::monostate>(v)) {
        rc = sqlite3_bind_null(stmt_, index);
    } else if (auto* i = std::get_if<std::int64_t>(&v)) {
        rc = sqlite3_bind_int64(stmt_, index, *i);
    } else if (auto* d = std::get_if<Decimal>(&v)) {
        std::string s = d->to_string();
        rc = sqlite3_bind_text(stmt_, index, s.c_str(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
    } else if (auto* s = std::get_if<std::string>(&v)) {
        rc = sqlite3_bind_text(stmt_, index, s->c_str(), static_cast<int>(s->size()), SQLITE_TRANSIENT);
    } else if (auto* b = std::get_if<bool>(&v)) {
        rc = sqlite3_bind_int(stmt_, index, *b ? 1 : 0);
    }
    if (rc != SQLITE_OK) throw Error(ErrorCode::SqliteError, sqlite3_errmsg(db_));
}

void Statement::bind_all(const std::vector<Value>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) bind(static_cast<int>(i + 1), values[i]);
}

bool Statement::step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    std::string msg = sqlite3_errmsg(db_);
    sqlite3_reset(stmt_);
    throw Error(ErrorCode::SqliteError, msg);
}

int Statement::step_raw() { return sqlite3_step(stmt_); }

void Statement::reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
}

int Statement::column_count() const { return sqlite3_column_count(stmt_); }

bool Statement::is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

std::int64_t Statement::column_int(int col) const { return sqlite3_column_int64(stmt_, col); }

std::string Statement::column_text(int col) const {
    auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    if (!p) return {};
    return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)));
}

Value Statement::column_value(int col) const {
    switch (sqlite3_column_type(stmt_, col)) {
    case SQLITE_NULL: return Value{};
    case SQLITE_INTEGER: return Value{column_int(col)};
    case SQLITE_FLOAT: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", sqlite3_column_double(stmt_, col));
        if (auto d = Decimal::parse(buf)) return Value{d->normalized()};
        return Value{std::string(buf)};
    }
    default: return Value{column_text(col)};
    }
}

Transaction::Transaction(Database& db, bool immediate) : db_(db) {
    db_.exec(immediate ? "BEGIN IMMEDIATE" : "BEGIN");
}

Transaction::~Transaction() {
    if (!done_) {
        try {
            db_.exec("ROLLBACK");
        } catch (...) {
        }
    }
}

void Transaction::commit() {
    db_.exec("COMMIT");
    done_ = true;
}

} // namespace dbmerge::sql
