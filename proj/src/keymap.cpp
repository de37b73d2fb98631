// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/keymap.hpp"

#include "dbmerge/error.hpp"

namespace dbmerge {

void KeyMap::record(int dbid, std::int64_t old_key, std::int64_t new_key) {
    if (sealed_) throw Error(ErrorCode::SealedMap, table_);
    auto key = std::make_pair(dbid, old_key);
    if (auto it = forward_.find(key); it != forward_.end()) {
        if (it->second == new_key) return;
        throw Error(ErrorCode::DuplicateOldKey, table_ + ": (" + std::to_string(dbid) + ", " +
                                                    std::to_string(old_key) + ") already maps to " +
                                                    std::to_string(it->second));
    }
    if (new_keys_.contains(new_key)) {
        throw Error(ErrorCode::DuplicateNewKey, table_ + ": newKey " + std::to_string(new_key) + " already assigned");
    }
    forward_.emplace(key, new_key);
    new_keys_.insert(new_key);
}

std::optional<std::int64_t> KeyMap::lookup(int dbid, std::int64_t old_key) const {
    if (!sealed_) throw Error(ErrorCode::UnsealedMap, table_);
    return peek(dbid, old_key);
}

std::optional<std::int64_t> KeyMap::peek(int dbid, std::int64_t old_key) const {
    auto it = forward_.find({shared_dbid_.value_or(dbid), old_key});
    if (it == forward_.end()) return std::nullopt;
    return it->second;
}

bool KeyMap::erase(int dbid, std::int64_t old_key) {
    if (sealed_) throw Error(ErrorCode::SealedMap, table_);
    auto it = forward_.find({dbid, old_key});
    if (it == forward_.end()) return false;
    new_keys_.erase(it->second);
    forward_.erase(it);
    return true;
}

std::vector<KeyMapEntry> KeyMap::entries() const {
    std::vector<KeyMapEntry> out;
    out.reserve(forward_.size());
    for (const auto& [k, v] : forward_) out.push_back(KeyMapEntry{v, k.second, k.first});
    return out;
}

std::string keymap_table_name(std::string_view table) { return std::string(kKeyMapPrefix) + std::string(table); }

void persist_keymap(const KeyMap& map, sql::Database& store) {
    const std::string name = sql::quote_ident(keymap_table_name(map.table()));
    try {
        store.exec("SAVEPOINT persist_keymap");
        try {
            store.exec("DROP TABLE IF EXISTS " + name);
            store.exec("CREATE TABLE " + name +
                       " (NewKey INTEGER NOT NULL UNIQUE, OldKey INTEGER NOT NULL, DBID INTEGER NOT NULL,"
                       " PRIMARY KEY (DBID, OldKey))");
            auto st = store.prepare("INSERT INTO " + name + " (NewKey, OldKey, DBID) VALUES (?1, ?2, ?3)");
            for (const auto& e : map.entries()) {
                st.reset();
                st.bind(1, Value{e.new_key});
                st.bind(2, Value{e.old_key});
                st.bind(3, Value{std::int64_t{e.dbid}});
                st.step();
            }
        } catch (...) {
            store.exec("ROLLBACK TO persist_keymap");
            store.exec("RELEASE persist_keymap");
            throw;
        }
        store.exec("RELEASE persist_keymap");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageError) throw;
        throw Error(ErrorCode::StorageError, map.table() + ": " + e.detail());
    }
}

bool keymap_exists(sql::Database& store, std::string_view table) {
    return store.table_exists(keymap_table_name(table));
}

KeyMap load_keymap(sql::Database& store, std::string_view table) {
    const std::string name = keymap_table_name(table);
    KeyMap map{std::string(table)};
    try {
        if (!store.table_exists(name)) throw Error(ErrorCode::StorageError, "no mapping table " + name);
        auto st = store.prepare("SELECT NewKey, OldKey, DBID FROM " + sql::quote_ident(name) + " ORDER BY DBID, OldKey");
        while (st.step()) {
            map.record(static_cast<int>(st.column_int(2)), st.column_int(1), st.column_int(0));
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageError) throw;
        throw Error(ErrorCode::StorageError, name + ": " + e.detail());
    }
    map.seal();
    return map;
}

std::size_t drop_migration_tables(sql::Database& store) {
    std::size_t dropped = 0;
    for (const auto& t : store.table_names()) {
        if (t.rfind(kKeyMapPrefix, 0) == 0 || t == "_mig_steps") {
            store.exec("DROP TABLE " + sql::quote_ident(t));
            ++dropped;
        }
    }
    return dropped;
}

KeyMap& KeyMapRegistry::open(const std::string& table) {
    std::lock_guard lock(mu_);
    auto it = maps_.find(table);
    if (it == maps_.end()) it = maps_.emplace(table, KeyMap(table)).first;
    return it->second;
}

const KeyMap* KeyMapRegistry::find(std::string_view table) const {
    std::lock_guard lock(mu_);
    auto it = maps_.find(table);
    return it == maps_.end() ? nullptr : &it->second;
}

void KeyMapRegistry::put(KeyMap map) {
    std::lock_guard lock(mu_);
    std::string name = map.table();
    maps_.insert_or_assign(std::move(name), std::move(map));
}

std::vector<std::string> KeyMapRegistry::tables() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [k, _] : maps_) out.push_back(k);
    return out;
}

} // namespace dbmerge
