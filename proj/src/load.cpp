// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/load.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dbmerge/error.hpp"

namespace dbmerge {

using sql::quote_ident;

std::int64_t next_identity(sql::Database& target, const TableDef& table) {
    std::int64_t max_pk =
        target.query_int("SELECT max(" + quote_ident(table.primary_key) + ") FROM " + quote_ident(table.name));
    std::int64_t seq = 0;
    if (target.table_exists("sqlite_sequence")) {
        auto st = target.prepare("SELECT seq FROM sqlite_sequence WHERE name = ?1");
        st.bind(1, Value{table.name});
        if (st.step()) seq = st.column_int(0);
    }
    return std::max(max_pk, seq) + 1;
}

namespace {

/// Savepoint that rolls back unless released.
class Savepoint {
public:
    Savepoint(sql::Database& db, std::string name) : db_(db), name_(quote_ident(name)) {
        db_.exec("SAVEPOINT " + name_);
    }
    Savepoint(const Savepoint&) = delete;
    Savepoint& operator=(const Savepoint&) = delete;
    ~Savepoint() {
        if (done_) return;
        try {
            db_.exec("ROLLBACK TO " + name_);
            db_.exec("RELEASE " + name_);
        } catch (...) {
        }
    }
    void release() {
        db_.exec("RELEASE " + name_);
        done_ = true;
    }

private:
    sql::Database& db_;
    std::string name_;
    bool done_ = false;
};

struct Pending {
    Row row;
    std::vector<Value> values;
    std::int64_t old_key = 0;
    /// Legacy values of deferred self-reference columns.
    std::vector<Value> deferred;
};

class TableLoader {
public:
    TableLoader(sql::Database& db, const TableDef& table, const LoadOptions& options, KeyMap& keymap)
        : db_(db), table_(table), options_(options), keymap_(keymap), sequence_(next_identity(db, table)) {}

    LoadResult run(std::vector<Row> rows) {
        resolve_columns(rows);
        std::vector<Pending> batch;
        std::set<std::pair<int, std::int64_t>> in_batch;
        auto flush = [&] {
            insert_batch(batch);
            batch.clear();
            in_batch.clear();
        };
        std::size_t batch_limit = std::max<std::size_t>(1, options_.batch_size);
        // SQLite caps bound parameters per statement.
        batch_limit = std::min(batch_limit, std::max<std::size_t>(1, 32000 / std::max<std::size_t>(1, columns_.size())));

        for (auto& row : rows) {
            auto pending = prepare(std::move(row));
            if (!pending) continue;
            auto key = std::make_pair(pending->row.origin.dbid, pending->old_key);
            if (in_batch.contains(key)) flush();
            if (keymap_.contains(key.first, key.second)) {
                fault(pending->row, RowFault{"DuplicateOldKey", std::to_string(key.first) + ":" +
                                                                    std::to_string(key.second)});
                continue;
            }
            in_batch.insert(key);
            batch.push_back(std::move(*pending));
            if (batch.size() >= batch_limit) flush();
        }
        flush();
        second_pass();
        return std::move(result_);
    }

private:
    void fault(const Row& row, RowFault f) {
        if (options_.policy == RowPolicy::Abort) {
            throw Error(ErrorCode::AbortSignal, table_.name + " " + row.ref + ": " + f.describe());
        }
        result_.rejected.push_back(RejectedRow{table_.name, row.origin.dbid, row.ref, std::move(f)});
    }

    void resolve_columns(const std::vector<Row>& rows) {
        std::set<std::string> present;
        for (const auto& row : rows) {
            for (const auto& f : row.fields) {
                if (!table_.find_column(f.name)) {
                    throw Error(ErrorCode::PreconditionError,
                                table_.name + ": incoming column '" + f.name + "' does not exist in the target");
                }
                present.insert(f.name);
            }
        }
        present.insert(table_.primary_key);
        for (const auto& c : table_.columns) {
            if (present.contains(c.name)) columns_.push_back(&c);
        }
        pk_index_ = 0;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i]->name == table_.primary_key) pk_index_ = i;
            for (const auto& d : options_.deferred_self_references) {
                if (columns_[i]->name == d) deferred_index_.push_back(i);
            }
        }
    }

    std::optional<Pending> prepare(Row row) {
        Pending p;
        p.values.reserve(columns_.size());
        for (const ColumnDef* c : columns_) {
            auto v = coerce(row.get(c->name), c->kind);
            if (!v) {
                fault(row, RowFault{"ConstraintViolation", c->name + "='" + to_display(row.get(c->name)) +
                                                               "' does not fit " + std::string(to_string(c->kind))});
                return std::nullopt;
            }
            if (auto* d = std::get_if<Decimal>(&*v)) {
                try {
                    *v = Value{d->rescaled(c->scale)};
                } catch (const std::overflow_error&) {
                    fault(row, RowFault{"ConstraintViolation", c->name + " overflows"});
                    return std::nullopt;
                }
            }
            p.values.push_back(std::move(*v));
        }
        auto* old = std::get_if<std::int64_t>(&p.values[pk_index_]);
        if (!old) {
            fault(row, RowFault{"ConstraintViolation", "NOT NULL integer primary key " + table_.primary_key});
            return std::nullopt;
        }
        p.old_key = *old;
        if (options_.mode.kind == LoadModeKind::PreserveKeys && row.origin.dbid != options_.mode.designated_source) {
            throw Error(ErrorCode::PreconditionError, table_.name + ": preserveKeys accepts rows from source " +
                                                          std::to_string(options_.mode.designated_source) +
                                                          " only, got " + std::to_string(row.origin.dbid));
        }
        for (std::size_t idx : deferred_index_) {
            p.deferred.push_back(p.values[idx]);
            p.values[idx] = Value{};
        }
        p.row = std::move(row);
        return p;
    }

    std::string insert_sql(std::size_t rows) const {
        std::string cols;
        std::string one = "(";
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) {
                cols += ", ";
                one += ", ";
            }
            cols += quote_ident(columns_[i]->name);
            one += "?";
        }
        one += ")";
        std::string sql = "INSERT INTO " + quote_ident(table_.name) + " (" + cols + ") VALUES ";
        for (std::size_t r = 0; r < rows; ++r) {
            if (r) sql += ", ";
            sql += one;
        }
        return sql;
    }

    std::int64_t key_for(const Pending& p, std::size_t offset) const {
        return options_.mode.kind == LoadModeKind::GenerateKeys ? sequence_.peek() + static_cast<std::int64_t>(offset)
                                                                : p.old_key;
    }

    void accept(Pending& p, std::int64_t new_key) {
        if (options_.mode.kind == LoadModeKind::GenerateKeys) sequence_.take();
        keymap_.record(p.row.origin.dbid, p.old_key, new_key);
        ++result_.loaded;
        if (!deferred_index_.empty()) {
            bool any = std::any_of(p.deferred.begin(), p.deferred.end(), [](const Value& v) { return !is_null(v); });
            if (any) deferred_.push_back({p.row.origin.dbid, new_key, p.row.ref, std::move(p.deferred)});
        }
    }

    void insert_batch(std::vector<Pending>& batch) {
        if (batch.empty()) return;
        if (batch.size() > 1) {
            auto st = db_.prepare(insert_sql(batch.size()));
            int idx = 1;
            for (std::size_t r = 0; r < batch.size(); ++r) {
                for (std::size_t c = 0; c < columns_.size(); ++c) {
                    st.bind(idx++, c == pk_index_ ? Value{key_for(batch[r], r)} : batch[r].values[c]);
                }
            }
            int rc = st.step_raw();
            if (rc == SQLITE_DONE) {
                for (std::size_t r = 0; r < batch.size(); ++r) {
                    std::int64_t key = key_for(batch[r], 0);
                    accept(batch[r], key);
                }
                return;
            }
            if ((rc & 0xff) != SQLITE_CONSTRAINT) throw Error(ErrorCode::SqliteError, db_.errmsg());
            // One row is bad; retry one by one to isolate it.
        }
        if (!single_) single_.emplace(db_.prepare(insert_sql(1)));
        for (auto& p : batch) {
            single_->reset();
            std::int64_t key = key_for(p, 0);
            for (std::size_t c = 0; c < columns_.size(); ++c) {
                single_->bind(static_cast<int>(c + 1), c == pk_index_ ? Value{key} : p.values[c]);
            }
            int rc = single_->step_raw();
            if (rc == SQLITE_DONE) {
                accept(p, key);
            } else if ((rc & 0xff) == SQLITE_CONSTRAINT) {
                std::string msg = db_.errmsg();
                single_->reset();
                fault(p.row, RowFault{"ConstraintViolation", msg});
            } else {
                throw Error(ErrorCode::SqliteError, db_.errmsg());
            }
        }
    }

    struct Deferred {
        int dbid;
        std::int64_t new_key;
        std::string ref;
        std::vector<Value> old_refs;
    };

    void second_pass() {
        if (deferred_.empty()) return;
        // Drop rows whose parent never made it, until nothing changes.
        std::map<std::int64_t, std::vector<std::int64_t>> resolved;
        bool changed = true;
        std::set<std::int64_t> removed;
        while (changed) {
            changed = false;
            for (const auto& d : deferred_) {
                if (removed.contains(d.new_key)) continue;
                std::vector<std::int64_t> refs;
                std::optional<RowFault> problem;
                for (std::size_t i = 0; i < d.old_refs.size(); ++i) {
                    const Value& v = d.old_refs[i];
                    if (is_null(v)) {
                        refs.push_back(0);
                        continue;
                    }
                    auto* old = std::get_if<std::int64_t>(&v);
                    auto hit = old ? keymap_.peek(d.dbid, *old) : std::nullopt;
                    if (!hit) {
                        problem = RowFault{"MissingMapping", options_.deferred_self_references[i] + "=" +
                                                                 to_display(v) + " -> " + table_.name};
                        break;
                    }
                    refs.push_back(*hit);
                }
                if (problem) {
                    Row stub;
                    stub.origin.dbid = d.dbid;
                    stub.ref = d.ref;
                    fault(stub, *problem);
                    db_.exec("DELETE FROM " + quote_ident(table_.name) + " WHERE " + quote_ident(table_.primary_key) +
                             " = " + std::to_string(d.new_key));
                    for (const auto& e : keymap_.entries()) {
                        if (e.new_key == d.new_key) keymap_.erase(e.dbid, e.old_key);
                    }
                    --result_.loaded;
                    removed.insert(d.new_key);
                    changed = true;
                } else {
                    resolved[d.new_key] = std::move(refs);
                }
            }
        }
        std::string set_clause;
        for (std::size_t i = 0; i < options_.deferred_self_references.size(); ++i) {
            if (i) set_clause += ", ";
            set_clause += quote_ident(options_.deferred_self_references[i]) + " = ?" + std::to_string(i + 1);
        }
        auto st = db_.prepare("UPDATE " + quote_ident(table_.name) + " SET " + set_clause + " WHERE " +
                              quote_ident(table_.primary_key) + " = ?" +
                              std::to_string(options_.deferred_self_references.size() + 1));
        for (const auto& d : deferred_) {
            if (removed.contains(d.new_key)) continue;
            const auto& refs = resolved.at(d.new_key);
            st.reset();
            for (std::size_t i = 0; i < refs.size(); ++i) {
                st.bind(static_cast<int>(i + 1), is_null(d.old_refs[i]) ? Value{} : Value{refs[i]});
            }
            st.bind(static_cast<int>(refs.size() + 1), Value{d.new_key});
            st.step();
        }
    }

    sql::Database& db_;
    const TableDef& table_;
    const LoadOptions& options_;
    KeyMap& keymap_;
    IdentitySequence sequence_;
    std::vector<const ColumnDef*> columns_;
    std::size_t pk_index_ = 0;
    std::vector<std::size_t> deferred_index_;
    std::vector<Deferred> deferred_;
    std::optional<sql::Statement> single_;
    LoadResult result_;
};

} // namespace

LoadResult load_table(sql::Database& target, std::vector<Row> rows, const TableDef& table, const LoadOptions& options,
                      KeyMap& keymap, std::span<const KeyMap* const> dependencies) {
    for (const KeyMap* dep : dependencies) {
        if (dep && !dep->sealed()) {
            throw Error(ErrorCode::PreconditionError, table.name + " depends on unsealed key map " + dep->table());
        }
    }
    if (keymap.sealed()) throw Error(ErrorCode::SealedMap, keymap.table());
    if (table.primary_key_column().kind != DataKind::Integer) {
        throw Error(ErrorCode::PreconditionError, table.name + ": loader needs an integer primary key");
    }
    if (options.mode.kind == LoadModeKind::PreserveKeys) {
        if (!table.primary_key_column().is_identity) {
            throw Error(ErrorCode::PreconditionError, table.name + ": preserveKeys needs an identity primary key");
        }
        keymap.share_keys_of(options.mode.designated_source);
    }
    for (const auto& col : options.deferred_self_references) {
        const ForeignKeyDef* fk = table.foreign_key_on(col);
        if (!fk || !fk->is_self_reference()) {
            throw Error(ErrorCode::PreconditionError, table.name + "." + col + " is not a self-referencing key");
        }
    }

    const KeyMap snapshot = keymap;
    Savepoint sp(target, "load_" + table.name);
    try {
        TableLoader loader(target, table, options, keymap);
        LoadResult r = loader.run(std::move(rows));
        sp.release();
        return r;
    } catch (...) {
        keymap = snapshot;
        throw;
    }
}

std::vector<Row> backfill_discriminator(std::vector<Row> rows, const DiscriminatorSpec& spec) {
    for (auto& row : rows) {
        auto it = spec.value_by_source.find(row.origin.dbid);
        if (it == spec.value_by_source.end()) {
            throw Error(ErrorCode::UncoveredSource, "no " + spec.table + " key for source dbid " +
                                                        std::to_string(row.origin.dbid));
        }
        row.set(spec.column, Value{it->second});
    }
    return rows;
}

// ---------------------------------------------------------------------------

std::int64_t IntegrityReport::dangling_total() const {
    std::int64_t n = 0;
    for (const auto& d : dangling) n += d.count;
    return n;
}

std::int64_t IntegrityReport::duplicate_total() const {
    std::int64_t n = 0;
    for (const auto& [_, c] : duplicate_pks) n += c;
    return n;
}

std::string IntegrityReport::to_text() const {
    std::ostringstream os;
    os << "table row counts:\n";
    for (const auto& [t, n] : row_counts) os << "  " << t << ": " << n << "\n";
    for (const auto& t : missing_tables) os << "missing table: " << t << "\n";
    os << "dangling foreign keys: " << dangling_total() << "\n";
    for (const auto& d : dangling) {
        if (d.count) os << "  " << d.table << "." << d.column << " -> " << d.references << ": " << d.count << "\n";
    }
    os << "duplicate primary keys: " << duplicate_total() << "\n";
    for (const auto& [t, n] : duplicate_pks) {
        if (n) os << "  " << t << ": " << n << "\n";
    }
    return os.str();
}

IntegrityReport verify_target(sql::Database& target, const SchemaModel& schema) {
    IntegrityReport r;
    for (const auto& [name, t] : schema.tables()) {
        if (!target.table_exists(name)) {
            r.missing_tables.push_back(name);
            continue;
        }
        const std::string tq = quote_ident(name);
        const std::string pk = quote_ident(t.primary_key);
        r.row_counts[name] = target.query_int("SELECT count(*) FROM " + tq);
        r.duplicate_pks[name] = target.query_int("SELECT count(" + pk + ") - count(DISTINCT " + pk + ") FROM " + tq);
    }
    for (const auto& [name, t] : schema.tables()) {
        if (!target.table_exists(name)) continue;
        for (const auto& fk : t.foreign_keys) {
            if (!target.table_exists(fk.to_table)) continue;
            const std::string col = quote_ident(fk.from_column);
            std::int64_t n = target.query_int("SELECT count(*) FROM " + quote_ident(name) + " AS c WHERE c." + col +
                                              " IS NOT NULL AND NOT EXISTS (SELECT 1 FROM " +
                                              quote_ident(fk.to_table) + " AS p WHERE p." +
                                              quote_ident(fk.to_column) + " = c." + col + ")");
            r.dangling.push_back(DanglingFinding{name, fk.from_column, fk.to_table, n});
        }
    }
    return r;
}

std::string sqlite_ddl(const TableDef& table) {
    std::ostringstream os;
    os << "CREATE TABLE " << quote_ident(table.name) << " (";
    bool first = true;
    for (const auto& c : table.columns) {
        if (!first) os << ", ";
        first = false;
        os << quote_ident(c.name) << " ";
        bool is_pk = c.name == table.primary_key;
        switch (c.kind) {
        case DataKind::Integer:
        case DataKind::Boolean: os << "INTEGER"; break;
        default: os << "TEXT"; break;
        }
        if (is_pk) {
            os << " PRIMARY KEY";
            if (c.is_identity) os << " AUTOINCREMENT";
        }
        if (!c.nullable || is_pk) os << " NOT NULL";
    }
    for (const auto& fk : table.foreign_keys) {
        os << ", FOREIGN KEY (" << quote_ident(fk.from_column) << ") REFERENCES " << quote_ident(fk.to_table) << " ("
           << quote_ident(fk.to_column) << ")";
    }
    os << ");";
    return os.str();
}

std::string sqlite_ddl(const SchemaModel& schema) {
    std::string out;
    for (const auto& [_, t] : schema.tables()) out += sqlite_ddl(t) + "\n";
    return out;
}

} // namespace dbmerge
