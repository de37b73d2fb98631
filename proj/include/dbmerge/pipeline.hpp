// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dbmerge/config.hpp"
#include "dbmerge/load.hpp"
#include "dbmerge/rules.hpp"

namespace dbmerge {

enum class StepKind {
    /// Literal rows of the discriminator table.
    Seed,
    /// Distinct free-text values turned into a reference table.
    Lookup,
    /// Legacy rows extracted, transformed and loaded.
    Table,
};

std::string_view to_string(StepKind kind) noexcept;

/// A table filled from the rows a splitTable rule moves out of its parent.
struct SecondaryLoad {
    std::string table;
    /// FK column of `table` that references the parent step's table.
    std::string carried_key;
};

struct PlanStep {
    std::string table;
    StepKind kind = StepKind::Table;
    LoadMode mode;
    /// Checked rules (derive outputs resolved against the target column).
    std::vector<TransformRule> rules;
    /// Referenced tables plus lookup tables joined by the rules, sorted.
    std::vector<std::string> depends_on;
    std::vector<SecondaryLoad> secondary;
    /// Self-referencing FK columns filled by the loader's second pass.
    std::vector<std::string> deferred_columns;
    /// Stamp the discriminator key onto this step's rows.
    bool backfill = false;
};

struct MigrationPlan {
    std::vector<PlanStep> steps;

    const PlanStep* find(std::string_view table) const;
    std::vector<std::string> tables() const;
    std::string to_text() const;
};

/// Validates the config against both schemas and orders the steps. A table
/// loads after every table it references and after every lookup it joins;
/// the discriminator table goes first. An explicit order in the config is
/// kept verbatim when it respects those edges.
/// Throws Error(CyclicDependency | ConfigValidationError | RuleParameterError).
MigrationPlan compile_plan(const MigrationConfig& config);

struct RunOptions {
    /// Steps allowed in flight at once. 1 runs everything serially.
    std::size_t jobs = 1;
    /// Overrides the config's policy when set.
    std::optional<RowPolicy> policy;
};

struct RunResult {
    LoadReport report;
    IntegrityReport integrity;

    /// Zero when the run finished and the target verifies clean.
    int exit_code() const { return report.aborted || !integrity.clean() ? 1 : 0; }
};

/// Name of the step journal table kept in the target.
inline constexpr std::string_view kStepJournal = "_mig_steps";

/// Executes the plan. Each step commits in its own transaction together
/// with its key map and a journal row; steps already journaled by an
/// earlier run are skipped and their maps and lookups restored. An abort
/// stops the run after rolling back the failing step.
/// Throws Error(ConnectionError) before any step when a database is
/// unreachable.
RunResult run(const MigrationPlan& plan, const MigrationConfig& config, const RunOptions& options = {});

} // namespace dbmerge
