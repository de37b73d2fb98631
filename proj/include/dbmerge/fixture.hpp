// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbmerge/schema.hpp"
#include "dbmerge/sqlite.hpp"

namespace dbmerge {

/// Synthetic three-database student-records layout used by the end-to-end
/// tests and the CLI's `gen-fixture` verb.
struct FixtureSpec {
    std::filesystem::path out_dir;
    std::size_t students_per_source = 1000;
    std::uint64_t seed = 7;
};

/// Student rows planted with exactly one defect each.
struct DirtyCounts {
    std::size_t unknown_gender = 0;
    std::size_t null_embg = 0;
    std::size_t bad_year = 0;

    std::size_t total() const { return unknown_gender + null_embg + bad_year; }
};

struct FixtureSource {
    int dbid = 0;
    std::string label;
    std::string file;
    std::size_t students = 0;
    DirtyCounts dirty;
};

struct FixtureManifest {
    std::uint64_t seed = 0;
    std::size_t students_per_source = 0;
    std::vector<FixtureSource> sources;
    std::vector<std::int64_t> faculty_ids;
    std::string target_file;

    std::size_t dirty_students() const;
    /// Student rows a clean run loads.
    std::size_t expected_students() const;
    nlohmann::json to_json() const;
    static FixtureManifest from_json(const nlohmann::json& j);
};

inline constexpr int kFixtureSources = 3;

SchemaModel fixture_source_schema();
SchemaModel fixture_target_schema();

/// The migration config the fixture ships with; paths are relative to the
/// directory holding the fixture.
nlohmann::json fixture_config();

/// Writes saa_<dbid>.db and .sql dumps, the empty target database with its
/// dump, both schema documents, migration.json and manifest.json into
/// spec.out_dir, replacing earlier files. Output is a pure function of the
/// spec. Throws Error(IOError).
FixtureManifest gen_fixture(const FixtureSpec& spec);

/// Text dump of every user table: its DDL followed by INSERT statements
/// with rows ordered by all columns, tables by name.
std::string dump_sql(sql::Database& db);

} // namespace dbmerge
