// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dbmerge/expression.hpp"
#include "dbmerge/extract.hpp"
#include "dbmerge/keymap.hpp"
#include "dbmerge/row.hpp"
#include "dbmerge/schema.hpp"

namespace dbmerge {

/// What a row-level failure does to the run.
enum class RowPolicy { RejectRow, Abort };

std::optional<RowPolicy> parse_row_policy(std::string_view s) noexcept;

enum class UnknownCodePolicy { RejectRow, MapToNull, Abort };

struct CodeMap {
    std::map<Value, Value, ValueLess> entries;
    UnknownCodePolicy unknown = UnknownCodePolicy::RejectRow;
};

// ---------------------------------------------------------------------------
// Rule parameter records, one per kind.

/// Keeps only the listed columns, in that order.
struct SelectColumns {
    std::vector<std::string> columns;
};

/// Maps legacy codes to target values. Writes into `into` (defaults to `column`).
struct TranslateCoded {
    std::string column;
    CodeMap map;
    std::string into;
};

/// Computes an arithmetic column. Result rounded half-even to `scale`; `as_integer` emits an integer.
struct DeriveColumn {
    std::string target;
    Expression expression;
    int scale = 2;
    bool as_integer = false;
};

/// Drops rows that fail any condition.
struct FilterRows {
    std::vector<Condition> where;
};

struct SortRows {
    std::vector<SortKey> keys;
};

/// Replaces free text in `column` with the lookup id in `produce`.
struct JoinLookup {
    std::string column;
    std::string lookup_table;
    std::string produce;
};

/// Key assignment itself happens at load time (generateKeys mode).
struct GenerateSurrogate {};

/// Splits at the first delimiter, repeatedly; the last target takes the
/// remainder. Missing pieces become null.
struct SplitColumn {
    std::string column;
    std::vector<std::string> into;
    std::string delimiter = " ";
};

/// Moves `columns` to rows of `into_table`, which also receive the
/// value of `carried_key`.
struct SplitTable {
    std::string into_table;
    std::vector<std::string> columns;
    std::string carried_key;
};

enum class CheckKind { NotNull, Range, Pattern, AllowedValues };

struct Check {
    CheckKind kind = CheckKind::NotNull;
    std::string column;
    Value min;
    Value max;
    std::string pattern;
    std::regex regex;
    std::set<Value, ValueLess> allowed;
};

struct ValidateRow {
    std::vector<Check> checks;
};

/// Legacy FK value -> new key through the referenced table's KeyMap.
struct RemapForeignKey {
    std::string column;
    std::string references;
};

using RuleParams = std::variant<SelectColumns, TranslateCoded, DeriveColumn, FilterRows, SortRows, JoinLookup,
                                GenerateSurrogate, SplitColumn, SplitTable, ValidateRow, RemapForeignKey>;

enum class RuleKind {
    SelectColumns,
    TranslateCoded,
    DeriveColumn,
    FilterRows,
    SortRows,
    JoinLookup,
    GenerateSurrogate,
    SplitColumn,
    SplitTable,
    ValidateRow,
    RemapForeignKey,
};

std::string_view to_string(RuleKind kind) noexcept;

struct TransformRule {
    RuleParams params;

    RuleKind kind() const noexcept { return static_cast<RuleKind>(params.index()); }
};

/// Parses `{kind, ...params}`. Throws Error(RuleParameterError).
TransformRule parse_rule(const nlohmann::json& j);

/// JSON scalar -> Value (integers stay integers, other numbers are decimals).
Value json_to_value(const nlohmann::json& j);
/// `{column, op, value}`.
Condition parse_condition(const nlohmann::json& j, ErrorCode code = ErrorCode::RuleParameterError);
/// `{column, descending}`.
SortKey parse_sort_key(const nlohmann::json& j, ErrorCode code = ErrorCode::RuleParameterError);

// ---------------------------------------------------------------------------
// Single-value / single-row operations.

/// Outcome of a code translation: the mapped value or a row fault.
using TranslateResult = std::variant<Value, RowFault>;

/// Null passes through. Unknown codes follow map.unknown; `abort` throws
/// Error(AbortSignal).
TranslateResult translate_coded(const Value& value, const CodeMap& map);

/// nullopt = pass; otherwise the first failing check. Null cells only fail
/// notNull.
std::optional<RowFault> validate_row(const Row& row, const std::vector<Check>& checks);

/// Splits one value per SplitColumn semantics.
std::vector<Value> split_value(const Value& value, const SplitColumn& spec);

// ---------------------------------------------------------------------------
// Batch application.

/// Loaded lookups and key maps visible to a step.
struct TransformContext {
    const KeyMapRegistry* keymaps = nullptr;
    const std::map<std::string, Lookup, std::less<>>* lookups = nullptr;
};

struct TransformOutput {
    std::vector<Row> rows;
    /// splitTable output, per secondary table.
    std::map<std::string, std::vector<Row>> secondary;
    std::vector<RejectedRow> rejected;
};

/// Applies one rule. Faults are appended to `out.rejected` under
/// RejectRow and throw Error(AbortSignal) under Abort.
TransformOutput apply_rule(const TransformRule& rule, std::vector<Row> rows, const TransformContext& ctx,
                           RowPolicy policy);

/// Applies the list in order, threading rows through and accumulating
/// secondary rows and rejects.
TransformOutput apply_rules(const std::vector<TransformRule>& rules, std::vector<Row> rows,
                            const TransformContext& ctx, RowPolicy policy);

/// Lookup join over a batch.
TransformOutput join_lookup(std::vector<Row> rows, const Lookup& lookup, const std::string& on,
                            const std::string& produce, RowPolicy policy);

/// Translates `column` through a sealed map; nulls pass through.
/// Missing entries are MissingMapping faults. Throws Error(UnsealedMap).
TransformOutput remap_foreign_key(std::vector<Row> rows, const KeyMap& keymap, const std::string& column,
                                  RowPolicy policy);

/// Next value of a target identity column.
class IdentitySequence {
public:
    explicit IdentitySequence(std::int64_t next = 1) : next_(next) {}
    std::int64_t peek() const noexcept { return next_; }
    std::int64_t take() noexcept { return next_++; }

private:
    std::int64_t next_;
};

/// Surrogate assignment over a batch: each row's `pk` gets the next key; (origin.dbid, old
/// pk) -> new key goes into `keymap`. Throws Error(DuplicateOldKey) when the
/// same (dbid, old pk) appears twice.
void generate_surrogate(std::vector<Row>& rows, const std::string& pk, IdentitySequence& sequence, KeyMap& keymap);

// ---------------------------------------------------------------------------
// Setup-time checking.

/// Ordered column set with kinds, as seen between two rules.
struct ColumnEnv {
    std::vector<std::pair<std::string, DataKind>> columns;

    const DataKind* find(std::string_view name) const;
    void set(const std::string& name, DataKind kind);
    void erase(std::string_view name);
    static ColumnEnv of(const TableDef& table);
};

struct RulePlanResult {
    ColumnEnv primary;
    std::map<std::string, ColumnEnv> secondary;
};

/// Checks every rule's parameters against the columns flowing into it and
/// that remapForeignKey rules come last. `target` resolves derive-column
/// output kinds (and is updated in `rules`). Throws Error(RuleParameterError).
RulePlanResult check_rules(std::vector<TransformRule>& rules, const ColumnEnv& input, const TableDef* target);

} // namespace dbmerge
