// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dbmerge/sqlite.hpp"

namespace dbmerge {

/// One row of a mapping table.
struct KeyMapEntry {
    std::int64_t new_key = 0;
    std::int64_t old_key = 0;
    int dbid = 0;

    bool operator==(const KeyMapEntry&) const = default;
};

/// (dbid, oldKey) -> newKey for one migrated table.
///
/// Written only by the step that loads the table. Once sealed it is
/// read-only and may be shared across threads; lookups before sealing are
/// refused so that a dependent step cannot observe a half-built map.
class KeyMap {
public:
    KeyMap() = default;
    explicit KeyMap(std::string table) : table_(std::move(table)) {}

    const std::string& table() const noexcept { return table_; }

    /// Re-recording an identical triple is a no-op. Throws Error(SealedMap),
    /// Error(DuplicateOldKey) for a conflicting newKey, Error(DuplicateNewKey)
    /// when newKey already belongs to another (dbid, oldKey).
    void record(int dbid, std::int64_t old_key, std::int64_t new_key);
    /// Idempotent.
    void seal() noexcept { sealed_ = true; }
    bool sealed() const noexcept { return sealed_; }

    /// Throws Error(UnsealedMap). nullopt on a miss.
    std::optional<std::int64_t> lookup(int dbid, std::int64_t old_key) const;

    /// Owner-side access while the map is still being built.
    std::optional<std::int64_t> peek(int dbid, std::int64_t old_key) const;
    bool contains(int dbid, std::int64_t old_key) const { return peek(dbid, old_key).has_value(); }
    /// Throws Error(SealedMap).
    bool erase(int dbid, std::int64_t old_key);

    /// Keys preserved from one designated source are shared by every source;
    /// lookups from any dbid resolve through `dbid`.
    void share_keys_of(int dbid) noexcept { shared_dbid_ = dbid; }
    std::optional<int> shared_dbid() const noexcept { return shared_dbid_; }

    /// Sorted by (dbid, oldKey).
    std::vector<KeyMapEntry> entries() const;
    std::size_t size() const noexcept { return forward_.size(); }
    bool empty() const noexcept { return forward_.empty(); }

    /// Same table and entries.
    bool operator==(const KeyMap& o) const { return table_ == o.table_ && forward_ == o.forward_; }

private:
    std::string table_;
    std::map<std::pair<int, std::int64_t>, std::int64_t> forward_;
    std::set<std::int64_t> new_keys_;
    std::optional<int> shared_dbid_;
    bool sealed_ = false;
};

inline constexpr std::string_view kKeyMapPrefix = "_mig_keys_";

std::string keymap_table_name(std::string_view table);

/// Writes the map as `_mig_keys_<table>(NewKey, OldKey, DBID)`, replacing
/// any previous copy. Joins the caller's transaction if one is open.
/// Throws Error(StorageError).
void persist_keymap(const KeyMap& map, sql::Database& store);

/// Restores a persisted map; the result is sealed.
/// Throws Error(StorageError) when the table is missing or malformed.
KeyMap load_keymap(sql::Database& store, std::string_view table);

bool keymap_exists(sql::Database& store, std::string_view table);

/// Drops every `_mig_keys_*` table plus the step journal. Returns the number
/// of tables dropped.
std::size_t drop_migration_tables(sql::Database& store);

/// Thread-safe owner of all maps of a run.
class KeyMapRegistry {
public:
    /// Creates the map on first use.
    KeyMap& open(const std::string& table);
    /// nullptr when the table has no map.
    const KeyMap* find(std::string_view table) const;
    void put(KeyMap map);
    std::vector<std::string> tables() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, KeyMap, std::less<>> maps_;
};

} // namespace dbmerge
