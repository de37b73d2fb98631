// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbmerge/extract.hpp"
#include "dbmerge/load.hpp"
#include "dbmerge/row.hpp"
#include "dbmerge/rules.hpp"
#include "dbmerge/schema.hpp"

namespace dbmerge {

struct SourceConfig {
    std::filesystem::path path;
    SourceTag tag;
};

/// A target table filled from legacy rows.
struct TableStep {
    std::string target;
    /// Legacy table read for this step; defaults to `target`.
    std::string source_table;
    LoadMode mode;
    /// dbids read by this step, in config order. Empty in the document means
    /// every configured source.
    std::vector<int> sources;
    ExtractOptions extract;
    std::vector<TransformRule> rules;
};

/// A target reference table built from distinct free-text values.
struct LookupStep {
    std::string target;
    DistinctExtractionSpec spec;
    /// Target text column that receives the preserved spelling.
    std::string value_column;
};

/// The discriminator table is seeded with literal rows, then its keys are
/// stamped onto every consolidated row whose target has `spec.column`.
struct DiscriminatorConfig {
    DiscriminatorSpec spec;
    std::vector<Row> rows;
};

struct MigrationConfig {
    std::filesystem::path base_dir;
    std::vector<SourceConfig> sources;
    std::filesystem::path target;
    SchemaModel source_schema;
    SchemaModel target_schema;
    RowPolicy policy = RowPolicy::RejectRow;
    std::size_t batch_size = 500;
    std::optional<DiscriminatorConfig> discriminator;
    /// Explicit step order; empty means derive it from the foreign keys.
    std::vector<std::string> step_order;
    std::map<std::string, TableStep> tables;
    std::map<std::string, LookupStep> lookups;

    const SourceConfig* find_source(int dbid) const;
};

/// Parses a config document. Relative paths resolve against `base_dir`;
/// schema documents are loaded eagerly.
/// Throws Error(ConfigValidationError | RuleParameterError | MalformedDocument | IOError).
MigrationConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
MigrationConfig load_config_file(const std::filesystem::path& path);

} // namespace dbmerge
