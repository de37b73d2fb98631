// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/rules.hpp"

#include <algorithm>
#include <stdexcept>

#include "dbmerge/error.hpp"
#include "dbmerge/json_util.hpp"

namespace dbmerge {

using nlohmann::json;

std::optional<RowPolicy> parse_row_policy(std::string_view s) noexcept {
    if (s == "reject" || s == "rejectRow") return RowPolicy::RejectRow;
    if (s == "abort") return RowPolicy::Abort;
    return std::nullopt;
}

std::string_view to_string(RuleKind kind) noexcept {
    switch (kind) {
    case RuleKind::SelectColumns: return "selectColumns";
    case RuleKind::TranslateCoded: return "translateCoded";
    case RuleKind::DeriveColumn: return "deriveColumn";
    case RuleKind::FilterRows: return "filterRows";
    case RuleKind::SortRows: return "sortRows";
    case RuleKind::JoinLookup: return "joinLookup";
    case RuleKind::GenerateSurrogate: return "generateSurrogate";
    case RuleKind::SplitColumn: return "splitColumn";
    case RuleKind::SplitTable: return "splitTable";
    case RuleKind::ValidateRow: return "validateRow";
    case RuleKind::RemapForeignKey: return "remapForeignKey";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// JSON

namespace {

constexpr ErrorCode kParamError = ErrorCode::RuleParameterError;

std::vector<std::string> get_string_list(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_array()) throw Error(kParamError, ctx + ": '" + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : j[key]) {
        if (!e.is_string()) throw Error(kParamError, ctx + ": '" + key + "' must hold strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

UnknownCodePolicy parse_unknown_policy(const std::string& s, const std::string& ctx) {
    if (s == "rejectRow") return UnknownCodePolicy::RejectRow;
    if (s == "mapToNull") return UnknownCodePolicy::MapToNull;
    if (s == "abort") return UnknownCodePolicy::Abort;
    throw Error(kParamError, ctx + ": unknownPolicy must be rejectRow, mapToNull or abort");
}

Check parse_check(const json& j) {
    const std::string ctx = "validateRow check";
    jsonu::require_object(j, ctx, kParamError);
    Check c;
    std::string kind = jsonu::get_string(j, "check", ctx, kParamError);
    c.column = jsonu::get_string(j, "column", ctx, kParamError);
    if (kind == "notNull") {
        jsonu::check_keys(j, {"check", "column"}, ctx, kParamError);
        c.kind = CheckKind::NotNull;
    } else if (kind == "range") {
        jsonu::check_keys(j, {"check", "column", "min", "max"}, ctx, kParamError);
        c.kind = CheckKind::Range;
        if (j.contains("min")) c.min = json_to_value(j["min"]);
        if (j.contains("max")) c.max = json_to_value(j["max"]);
        if (is_null(c.min) && is_null(c.max)) throw Error(kParamError, ctx + ": range needs min or max");
    } else if (kind == "pattern") {
        jsonu::check_keys(j, {"check", "column", "regex"}, ctx, kParamError);
        c.kind = CheckKind::Pattern;
        c.pattern = jsonu::get_string(j, "regex", ctx, kParamError);
        try {
            c.regex = std::regex(c.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw Error(kParamError, ctx + ": bad regex '" + c.pattern + "': " + e.what());
        }
    } else if (kind == "allowedValues") {
        jsonu::check_keys(j, {"check", "column", "values"}, ctx, kParamError);
        c.kind = CheckKind::AllowedValues;
        if (!j.contains("values") || !j["values"].is_array() || j["values"].empty()) {
            throw Error(kParamError, ctx + ": allowedValues needs a non-empty 'values' array");
        }
        for (const auto& v : j["values"]) c.allowed.insert(json_to_value(v));
    } else {
        throw Error(kParamError, ctx + ": unknown check '" + kind + "'");
    }
    return c;
}

} // namespace

Value json_to_value(const json& j) {
    if (j.is_null()) return Value{};
    if (j.is_boolean()) return Value{j.get<bool>()};
    if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
    if (j.is_number_float()) {
        if (auto d = Decimal::parse(j.dump())) return Value{*d};
        throw Error(kParamError, "number " + j.dump() + " is not a plain decimal");
    }
    if (j.is_string()) return Value{j.get<std::string>()};
    throw Error(kParamError, "expected a scalar, got " + j.dump());
}

Condition parse_condition(const json& j, ErrorCode code) {
    jsonu::require_object(j, "condition", code);
    jsonu::check_keys(j, {"column", "op", "value"}, "condition", code);
    Condition c;
    c.column = jsonu::get_string(j, "column", "condition", code);
    std::string op = jsonu::get_string_or(j, "op", "=", "condition", code);
    auto parsed = parse_compare_op(op);
    if (!parsed) throw Error(code, "condition: unknown op '" + op + "'");
    c.op = *parsed;
    if (c.op != CompareOp::IsNull && c.op != CompareOp::NotNull) {
        if (!j.contains("value")) throw Error(code, "condition on " + c.column + " needs a 'value'");
        c.literal = json_to_value(j["value"]);
    }
    return c;
}

SortKey parse_sort_key(const json& j, ErrorCode code) {
    if (j.is_string()) return SortKey{j.get<std::string>(), false};
    jsonu::require_object(j, "sort key", code);
    jsonu::check_keys(j, {"column", "descending"}, "sort key", code);
    return SortKey{jsonu::get_string(j, "column", "sort key", code),
                   jsonu::get_bool_or(j, "descending", false, "sort key", code)};
}

TransformRule parse_rule(const json& j) {
    jsonu::require_object(j, "rule", kParamError);
    std::string kind = jsonu::get_string(j, "kind", "rule", kParamError);
    const std::string ctx = "rule " + kind;
    if (kind == "selectColumns") {
        jsonu::check_keys(j, {"kind", "columns"}, ctx, kParamError);
        auto cols = get_string_list(j, "columns", ctx);
        if (cols.empty()) throw Error(kParamError, ctx + ": no columns");
        return {SelectColumns{std::move(cols)}};
    }
    if (kind == "translateCoded") {
        jsonu::check_keys(j, {"kind", "column", "map", "unknownPolicy", "into"}, ctx, kParamError);
        TranslateCoded t;
        t.column = jsonu::get_string(j, "column", ctx, kParamError);
        t.into = jsonu::get_string_or(j, "into", t.column, ctx, kParamError);
        t.map.unknown = parse_unknown_policy(jsonu::get_string_or(j, "unknownPolicy", "rejectRow", ctx, kParamError), ctx);
        if (!j.contains("map") || !j["map"].is_array() || j["map"].empty()) {
            throw Error(kParamError, ctx + ": 'map' must be a non-empty array of {from, to}");
        }
        for (const auto& e : j["map"]) {
            jsonu::require_object(e, ctx + " map entry", kParamError);
            jsonu::check_keys(e, {"from", "to"}, ctx + " map entry", kParamError);
            if (!e.contains("from") || !e.contains("to")) throw Error(kParamError, ctx + ": map entry needs from and to");
            Value from = json_to_value(e["from"]);
            if (is_null(from)) throw Error(kParamError, ctx + ": null source code");
            if (!t.map.entries.emplace(from, json_to_value(e["to"])).second) {
                throw Error(kParamError, ctx + ": duplicate source code " + to_display(from));
            }
        }
        return {std::move(t)};
    }
    if (kind == "deriveColumn") {
        jsonu::check_keys(j, {"kind", "target", "expression", "scale"}, ctx, kParamError);
        DeriveColumn d{jsonu::get_string(j, "target", ctx, kParamError),
                       Expression::parse(jsonu::get_string(j, "expression", ctx, kParamError))};
        d.scale = static_cast<int>(jsonu::get_int_or(j, "scale", 2, ctx, kParamError));
        if (d.scale < 0 || d.scale > Decimal::kMaxScale) throw Error(kParamError, ctx + ": scale out of range");
        return {std::move(d)};
    }
    if (kind == "filterRows") {
        jsonu::check_keys(j, {"kind", "where"}, ctx, kParamError);
        if (!j.contains("where") || !j["where"].is_array() || j["where"].empty()) {
            throw Error(kParamError, ctx + ": 'where' must be a non-empty array");
        }
        FilterRows f;
        for (const auto& c : j["where"]) f.where.push_back(parse_condition(c));
        return {std::move(f)};
    }
    if (kind == "sortRows") {
        jsonu::check_keys(j, {"kind", "keys"}, ctx, kParamError);
        if (!j.contains("keys") || !j["keys"].is_array() || j["keys"].empty()) {
            throw Error(kParamError, ctx + ": 'keys' must be a non-empty array");
        }
        SortRows s;
        for (const auto& k : j["keys"]) s.keys.push_back(parse_sort_key(k));
        return {std::move(s)};
    }
    if (kind == "joinLookup") {
        jsonu::check_keys(j, {"kind", "column", "lookupTable", "produce"}, ctx, kParamError);
        return {JoinLookup{jsonu::get_string(j, "column", ctx, kParamError),
                           jsonu::get_string(j, "lookupTable", ctx, kParamError),
                           jsonu::get_string(j, "produce", ctx, kParamError)}};
    }
    if (kind == "generateSurrogate") {
        jsonu::check_keys(j, {"kind"}, ctx, kParamError);
        return {GenerateSurrogate{}};
    }
    if (kind == "splitColumn") {
        jsonu::check_keys(j, {"kind", "column", "into", "delimiter"}, ctx, kParamError);
        SplitColumn s{jsonu::get_string(j, "column", ctx, kParamError), get_string_list(j, "into", ctx),
                      jsonu::get_string_or(j, "delimiter", " ", ctx, kParamError)};
        if (s.into.size() < 2) throw Error(kParamError, ctx + ": needs at least two target columns");
        if (s.delimiter.empty()) throw Error(kParamError, ctx + ": empty delimiter");
        return {std::move(s)};
    }
    if (kind == "splitTable") {
        jsonu::check_keys(j, {"kind", "into", "columns", "carriedKey"}, ctx, kParamError);
        SplitTable s{jsonu::get_string(j, "into", ctx, kParamError), get_string_list(j, "columns", ctx),
                     jsonu::get_string(j, "carriedKey", ctx, kParamError)};
        if (s.columns.empty()) throw Error(kParamError, ctx + ": no columns to move");
        return {std::move(s)};
    }
    if (kind == "validateRow") {
        jsonu::check_keys(j, {"kind", "checks"}, ctx, kParamError);
        if (!j.contains("checks") || !j["checks"].is_array() || j["checks"].empty()) {
            throw Error(kParamError, ctx + ": 'checks' must be a non-empty array");
        }
        ValidateRow v;
        for (const auto& c : j["checks"]) v.checks.push_back(parse_check(c));
        return {std::move(v)};
    }
    if (kind == "remapForeignKey") {
        jsonu::check_keys(j, {"kind", "column", "references"}, ctx, kParamError);
        return {RemapForeignKey{jsonu::get_string(j, "column", ctx, kParamError),
                                jsonu::get_string(j, "references", ctx, kParamError)}};
    }
    throw Error(kParamError, "unknown rule kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Row-level operations

TranslateResult translate_coded(const Value& value, const CodeMap& map) {
    if (is_null(value)) return Value{};
    auto it = map.entries.find(value);
    if (it != map.entries.end()) return it->second;
    switch (map.unknown) {
    case UnknownCodePolicy::MapToNull: return Value{};
    case UnknownCodePolicy::Abort:
        throw Error(ErrorCode::AbortSignal, "UnknownCode(" + to_display(value) + ")");
    case UnknownCodePolicy::RejectRow: break;
    }
    return RowFault{"UnknownCode", to_display(value)};
}

std::optional<RowFault> validate_row(const Row& row, const std::vector<Check>& checks) {
    for (const auto& c : checks) {
        const Value& v = row.get(c.column);
        switch (c.kind) {
        case CheckKind::NotNull:
            if (is_null(v)) return RowFault{"NullViolation", c.column};
            break;
        case CheckKind::Range:
            if (is_null(v)) break;
            if ((!is_null(c.min) && compare_values(v, c.min) < 0) || (!is_null(c.max) && compare_values(v, c.max) > 0)) {
                return RowFault{"RangeViolation", c.column + "=" + to_display(v)};
            }
            break;
        case CheckKind::Pattern:
            if (is_null(v)) break;
            if (!std::regex_search(to_display(v), c.regex)) {
                return RowFault{"PatternViolation", c.column + "=" + to_display(v)};
            }
            break;
        case CheckKind::AllowedValues:
            if (is_null(v)) break;
            if (!c.allowed.contains(v)) return RowFault{"AllowedValuesViolation", c.column + "=" + to_display(v)};
            break;
        }
    }
    return std::nullopt;
}

std::vector<Value> split_value(const Value& value, const SplitColumn& spec) {
    std::vector<Value> out(spec.into.size());
    if (is_null(value)) return out;
    std::string rest = to_display(value);
    for (std::size_t i = 0; i + 1 < spec.into.size(); ++i) {
        auto pos = rest.find(spec.delimiter);
        if (pos == std::string::npos) {
            out[i] = Value{rest};
            return out;
        }
        out[i] = Value{rest.substr(0, pos)};
        rest = rest.substr(pos + spec.delimiter.size());
    }
    out.back() = Value{rest};
    return out;
}

// ---------------------------------------------------------------------------
// Batch application

namespace {

void route(TransformOutput& out, const Row& row, RowFault fault, RowPolicy policy) {
    if (policy == RowPolicy::Abort && fault.kind != "Filtered") {
        throw Error(ErrorCode::AbortSignal, row.ref + ": " + fault.describe());
    }
    out.rejected.push_back(RejectedRow{row.table, row.origin.dbid, row.ref, std::move(fault)});
}

struct Applier {
    std::vector<Row>& rows;
    const TransformContext& ctx;
    RowPolicy policy;
    TransformOutput out;

    void operator()(const SelectColumns& p) {
        for (auto& row : rows) {
            std::vector<Field> kept;
            kept.reserve(p.columns.size());
            for (const auto& c : p.columns) kept.push_back(Field{c, row.get(c)});
            row.fields = std::move(kept);
            out.rows.push_back(std::move(row));
        }
    }

    void operator()(const TranslateCoded& p) {
        for (auto& row : rows) {
            auto r = translate_coded(row.get(p.column), p.map);
            if (auto* fault = std::get_if<RowFault>(&r)) {
                route(out, row, std::move(*fault), policy);
                continue;
            }
            row.set(p.into, std::move(std::get<Value>(r)));
            out.rows.push_back(std::move(row));
        }
    }

    void operator()(const DeriveColumn& p) {
        for (auto& row : rows) {
            auto r = p.expression.evaluate(row);
            if (r.fault) {
                route(out, row, std::move(*r.fault), policy);
                continue;
            }
            Value v;
            if (r.value) {
                try {
                    Decimal d = r.value->rescaled(p.scale);
                    v = p.as_integer ? Value{d.units()} : Value{d};
                } catch (const std::overflow_error&) {
                    route(out, row, RowFault{"TransformError", "arithmetic overflow"}, policy);
                    continue;
                }
            }
            row.set(p.target, std::move(v));
            out.rows.push_back(std::move(row));
        }
    }

    void operator()(const FilterRows& p) {
        for (auto& row : rows) {
            if (matches_all(p.where, row)) {
                out.rows.push_back(std::move(row));
            } else {
                route(out, row, RowFault{"Filtered", ""}, policy);
            }
        }
    }

    void operator()(const SortRows& p) {
        sort_rows(rows, p.keys);
        out.rows = std::move(rows);
    }

    void operator()(const JoinLookup& p) {
        if (!ctx.lookups) throw Error(ErrorCode::PreconditionError, "no lookup tables loaded");
        auto it = ctx.lookups->find(p.lookup_table);
        if (it == ctx.lookups->end()) throw Error(ErrorCode::PreconditionError, "lookup " + p.lookup_table + " not loaded");
        out = join_lookup(std::move(rows), it->second, p.column, p.produce, policy);
    }

    void operator()(const GenerateSurrogate&) { out.rows = std::move(rows); }

    void operator()(const SplitColumn& p) {
        bool keep_source = std::find(p.into.begin(), p.into.end(), p.column) != p.into.end();
        for (auto& row : rows) {
            auto parts = split_value(row.get(p.column), p);
            if (!keep_source) row.erase(p.column);
            for (std::size_t i = 0; i < parts.size(); ++i) row.set(p.into[i], std::move(parts[i]));
            out.rows.push_back(std::move(row));
        }
    }

    void operator()(const SplitTable& p) {
        auto& secondary = out.secondary[p.into_table];
        for (auto& row : rows) {
            Row child;
            child.table = p.into_table;
            child.origin = row.origin;
            child.ref = row.ref;
            child.fields.push_back(Field{p.carried_key, row.get(p.carried_key)});
            for (const auto& c : p.columns) {
                child.fields.push_back(Field{c, row.get(c)});
                row.erase(c);
            }
            secondary.push_back(std::move(child));
            out.rows.push_back(std::move(row));
        }
    }

    void operator()(const ValidateRow& p) {
        for (auto& row : rows) {
            if (auto fault = validate_row(row, p.checks)) {
                route(out, row, std::move(*fault), policy);
                continue;
            }
            out.rows.push_back(std::move(row));
        }
    }

    void operator()(const RemapForeignKey& p) {
        const KeyMap* map = ctx.keymaps ? ctx.keymaps->find(p.references) : nullptr;
        if (!map) throw Error(ErrorCode::PreconditionError, "no key map for " + p.references);
        out = remap_foreign_key(std::move(rows), *map, p.column, policy);
    }
};

void merge_into(TransformOutput& acc, TransformOutput&& step) {
    acc.rows = std::move(step.rows);
    for (auto& [table, rows] : step.secondary) {
        auto& dst = acc.secondary[table];
        dst.insert(dst.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
    acc.rejected.insert(acc.rejected.end(), std::make_move_iterator(step.rejected.begin()),
                        std::make_move_iterator(step.rejected.end()));
}

} // namespace

TransformOutput apply_rule(const TransformRule& rule, std::vector<Row> rows, const TransformContext& ctx,
                           RowPolicy policy) {
    Applier a{rows, ctx, policy, {}};
    std::visit(a, rule.params);
    return std::move(a.out);
}

TransformOutput apply_rules(const std::vector<TransformRule>& rules, std::vector<Row> rows,
                            const TransformContext& ctx, RowPolicy policy) {
    TransformOutput acc;
    acc.rows = std::move(rows);
    for (const auto& rule : rules) merge_into(acc, apply_rule(rule, std::move(acc.rows), ctx, policy));
    return acc;
}

TransformOutput join_lookup(std::vector<Row> rows, const Lookup& lookup, const std::string& on,
                            const std::string& produce, RowPolicy policy) {
    TransformOutput out;
    for (auto& row : rows) {
        const Value& v = row.get(on);
        Value id;
        if (!is_null(v)) {
            std::string text = to_display(v);
            if (!normalize_key(text, Normalization{true, false}).empty()) {
                auto hit = lookup.find(text);
                if (!hit) {
                    route(out, row, RowFault{"LookupMiss", lookup.table() + " '" + text + "'"}, policy);
                    continue;
                }
                id = Value{*hit};
            }
        }
        if (on != produce) row.erase(on);
        row.set(produce, std::move(id));
        out.rows.push_back(std::move(row));
    }
    return out;
}

TransformOutput remap_foreign_key(std::vector<Row> rows, const KeyMap& keymap, const std::string& column,
                                  RowPolicy policy) {
    if (!keymap.sealed()) throw Error(ErrorCode::UnsealedMap, keymap.table());
    TransformOutput out;
    for (auto& row : rows) {
        Value* v = row.find(column);
        if (!v || is_null(*v)) {
            out.rows.push_back(std::move(row));
            continue;
        }
        auto* old = std::get_if<std::int64_t>(v);
        if (!old) {
            route(out, row, RowFault{"TransformError", column + " is not an integer key"}, policy);
            continue;
        }
        auto hit = keymap.lookup(row.origin.dbid, *old);
        if (!hit) {
            route(out, row,
                  RowFault{"MissingMapping", column + "=" + std::to_string(*old) + " -> " + keymap.table() +
                                                 " (dbid " + std::to_string(row.origin.dbid) + ")"},
                  policy);
            continue;
        }
        *v = Value{*hit};
        out.rows.push_back(std::move(row));
    }
    return out;
}

void generate_surrogate(std::vector<Row>& rows, const std::string& pk, IdentitySequence& sequence, KeyMap& keymap) {
    for (auto& row : rows) {
        Value* v = row.find(pk);
        auto* old = v ? std::get_if<std::int64_t>(v) : nullptr;
        if (!old) throw Error(ErrorCode::RuleParameterError, row.ref + ": primary key " + pk + " is not an integer");
        if (keymap.contains(row.origin.dbid, *old)) {
            throw Error(ErrorCode::DuplicateOldKey, keymap.table() + ": (" + std::to_string(row.origin.dbid) + ", " +
                                                        std::to_string(*old) + ") seen twice");
        }
        std::int64_t fresh = sequence.take();
        keymap.record(row.origin.dbid, *old, fresh);
        *v = Value{fresh};
    }
}

// ---------------------------------------------------------------------------
// Setup-time checks

const DataKind* ColumnEnv::find(std::string_view name) const {
    for (const auto& [n, k] : columns) {
        if (n == name) return &k;
    }
    return nullptr;
}

void ColumnEnv::set(const std::string& name, DataKind kind) {
    for (auto& [n, k] : columns) {
        if (n == name) {
            k = kind;
            return;
        }
    }
    columns.emplace_back(name, kind);
}

void ColumnEnv::erase(std::string_view name) {
    std::erase_if(columns, [&](const auto& c) { return c.first == name; });
}

ColumnEnv ColumnEnv::of(const TableDef& table) {
    ColumnEnv env;
    for (const auto& c : table.columns) env.columns.emplace_back(c.name, c.kind);
    return env;
}

namespace {

DataKind kind_of_value(const Value& v) {
    switch (v.index()) {
    case 1: return DataKind::Integer;
    case 2: return DataKind::Decimal;
    case 4: return DataKind::Boolean;
    default: return DataKind::Text;
    }
}

struct Checker {
    ColumnEnv env;
    std::map<std::string, ColumnEnv> secondary;
    const TableDef* target;
    std::string ctx;

    const DataKind& need(const std::string& column) const {
        const DataKind* k = env.find(column);
        if (!k) throw Error(kParamError, ctx + ": column '" + column + "' is not available here");
        return *k;
    }

    void operator()(SelectColumns& p) {
        ColumnEnv next;
        for (const auto& c : p.columns) next.set(c, need(c));
        env = std::move(next);
    }

    void operator()(TranslateCoded& p) {
        need(p.column);
        if (p.map.entries.empty()) throw Error(kParamError, ctx + ": empty code map");
        std::optional<DataKind> out;
        for (const auto& [from, to] : p.map.entries) {
            if (is_null(to)) continue;
            DataKind k = kind_of_value(to);
            if (out && *out != k && !(is_numeric(*out) && is_numeric(k))) {
                throw Error(kParamError, ctx + ": code map targets mix kinds");
            }
            out = (out && *out == DataKind::Decimal) ? DataKind::Decimal : k;
        }
        env.set(p.into, out.value_or(DataKind::Text));
    }

    void operator()(DeriveColumn& p) {
        for (const auto& c : p.expression.columns()) {
            if (!is_numeric(need(c))) {
                throw Error(kParamError, ctx + ": expression column '" + c + "' is not numeric");
            }
        }
        const ColumnDef* col = target ? target->find_column(p.target) : nullptr;
        if (col) {
            if (col->kind == DataKind::Integer) {
                p.as_integer = true;
                p.scale = 0;
            } else if (col->kind == DataKind::Decimal) {
                p.scale = col->scale;
            } else {
                throw Error(kParamError, ctx + ": target column '" + p.target + "' is not numeric");
            }
        }
        env.set(p.target, p.as_integer ? DataKind::Integer : DataKind::Decimal);
    }

    void operator()(FilterRows& p) {
        for (const auto& c : p.where) need(c.column);
    }

    void operator()(SortRows& p) {
        for (const auto& k : p.keys) need(k.column);
    }

    void operator()(JoinLookup& p) {
        if (need(p.column) != DataKind::Text) throw Error(kParamError, ctx + ": '" + p.column + "' is not text");
        if (p.column != p.produce) env.erase(p.column);
        env.set(p.produce, DataKind::Integer);
    }

    void operator()(GenerateSurrogate&) {}

    void operator()(SplitColumn& p) {
        if (need(p.column) != DataKind::Text) throw Error(kParamError, ctx + ": '" + p.column + "' is not text");
        if (p.into.size() < 2) throw Error(kParamError, ctx + ": needs at least two target columns");
        if (std::find(p.into.begin(), p.into.end(), p.column) == p.into.end()) env.erase(p.column);
        for (const auto& t : p.into) env.set(t, DataKind::Text);
    }

    void operator()(SplitTable& p) {
        if (p.into_table.empty()) throw Error(kParamError, ctx + ": empty target table");
        ColumnEnv child;
        child.set(p.carried_key, need(p.carried_key));
        for (const auto& c : p.columns) {
            if (c == p.carried_key) throw Error(kParamError, ctx + ": carried key cannot move");
            child.set(c, need(c));
        }
        for (const auto& c : p.columns) env.erase(c);
        if (!secondary.emplace(p.into_table, std::move(child)).second) {
            throw Error(kParamError, ctx + ": table " + p.into_table + " split twice");
        }
    }

    void operator()(ValidateRow& p) {
        for (const auto& c : p.checks) need(c.column);
    }

    void operator()(RemapForeignKey& p) {
        if (need(p.column) != DataKind::Integer) {
            throw Error(kParamError, ctx + ": foreign key column '" + p.column + "' is not an integer");
        }
    }
};

} // namespace

RulePlanResult check_rules(std::vector<TransformRule>& rules, const ColumnEnv& input, const TableDef* target) {
    Checker checker{input, {}, target, {}};
    bool seen_remap = false;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        auto& rule = rules[i];
        checker.ctx = (target ? target->name + " " : std::string()) + "rule #" + std::to_string(i + 1) + " (" +
                      std::string(to_string(rule.kind())) + ")";
        if (rule.kind() == RuleKind::RemapForeignKey) {
            seen_remap = true;
        } else if (seen_remap) {
            throw Error(kParamError, checker.ctx + ": remapForeignKey rules must come last");
        }
        std::visit(checker, rule.params);
    }
    return RulePlanResult{std::move(checker.env), std::move(checker.secondary)};
}

} // namespace dbmerge
