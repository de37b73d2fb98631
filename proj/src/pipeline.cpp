// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/pipeline.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "dbmerge/error.hpp"
#include "dbmerge/extract.hpp"
#include "dbmerge/keymap.hpp"

namespace dbmerge {

std::string_view to_string(StepKind kind) noexcept {
    switch (kind) {
    case StepKind::Seed: return "seed";
    case StepKind::Lookup: return "lookup";
    case StepKind::Table: return "table";
    }
    return "?";
}

const PlanStep* MigrationPlan::find(std::string_view table) const {
    for (const auto& s : steps) {
        if (s.table == table) return &s;
    }
    return nullptr;
}

std::vector<std::string> MigrationPlan::tables() const {
    std::vector<std::string> out;
    for (const auto& s : steps) out.push_back(s.table);
    return out;
}

std::string MigrationPlan::to_text() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const PlanStep& s = steps[i];
        os << (i + 1) << ". " << s.table << " [" << to_string(s.kind);
        if (s.kind == StepKind::Table) {
            os << ", " << (s.mode.kind == LoadModeKind::PreserveKeys
                               ? "preserveKeys from " + std::to_string(s.mode.designated_source)
                               : std::string("generateKeys"));
            os << ", " << s.rules.size() << " rule" << (s.rules.size() == 1 ? "" : "s");
        }
        os << "]";
        if (!s.depends_on.empty()) {
            os << " after";
            for (const auto& d : s.depends_on) os << " " << d;
        }
        if (s.backfill) os << "; stamps discriminator";
        if (!s.deferred_columns.empty()) {
            os << "; second pass for";
            for (const auto& c : s.deferred_columns) os << " " << c;
        }
        for (const auto& sec : s.secondary) os << "; splits into " << sec.table << " via " << sec.carried_key;
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Planning

namespace {

constexpr ErrorCode kInvalid = ErrorCode::ConfigValidationError;

ColumnEnv input_env(const TableDef& source, const ExtractOptions& extract) {
    ColumnEnv env = ColumnEnv::of(source);
    if (!extract.selection) return env;
    ColumnEnv projected;
    for (const auto& c : *extract.selection) projected.set(c, *env.find(c));
    return projected;
}

/// Every column that reaches the target must exist there, and every NOT
/// NULL column must be produced.
void check_columns_fit(const ColumnEnv& env, const TableDef& target, const std::set<std::string>& implicit,
                       const std::string& ctx) {
    for (const auto& [name, kind] : env.columns) {
        const ColumnDef* col = target.find_column(name);
        if (!col) throw Error(kInvalid, ctx + ": column '" + name + "' has no place in target table " + target.name);
        bool numeric_ok = (kind == DataKind::Integer || kind == DataKind::Decimal) &&
                          (col->kind == DataKind::Integer || col->kind == DataKind::Decimal);
        if (kind != col->kind && !numeric_ok) {
            throw Error(kInvalid, ctx + ": column '" + name + "' is " + std::string(to_string(kind)) +
                                      " but the target expects " + std::string(to_string(col->kind)));
        }
    }
    for (const auto& c : target.columns) {
        if (c.nullable || env.find(c.name) || implicit.contains(c.name)) continue;
        throw Error(kInvalid, ctx + ": NOT NULL column " + target.name + "." + c.name + " is never produced");
    }
}

struct Planner {
    const MigrationConfig& cfg;
    std::map<std::string, PlanStep> steps;
    /// splitTable target -> owning step.
    std::map<std::string, std::string> owner;

    void add_seed() {
        const auto& d = *cfg.discriminator;
        PlanStep s;
        s.table = d.spec.table;
        s.kind = StepKind::Seed;
        s.mode = LoadMode::preserve(0);
        steps.emplace(s.table, std::move(s));
    }

    void add_lookup(const LookupStep& l) {
        PlanStep s;
        s.table = l.target;
        s.kind = StepKind::Lookup;
        s.mode = LoadMode::preserve(0);
        steps.emplace(s.table, std::move(s));
    }

    void add_table(const TableStep& t) {
        const std::string ctx = "tables." + t.target;
        const TableDef& target = cfg.target_schema.at(t.target);
        const TableDef& source = cfg.source_schema.at(t.source_table);
        if (target.primary_key_column().kind != DataKind::Integer) {
            throw Error(kInvalid, ctx + ": migrated tables need an integer primary key");
        }

        PlanStep s;
        s.table = t.target;
        s.kind = StepKind::Table;
        s.mode = t.mode;
        s.rules = t.rules;
        RulePlanResult shape = check_rules(s.rules, input_env(source, t.extract), &target);

        std::set<std::string> implicit;
        if (cfg.discriminator && target.find_column(cfg.discriminator->spec.column)) {
            s.backfill = true;
            implicit.insert(cfg.discriminator->spec.column);
            if (shape.primary.find(cfg.discriminator->spec.column)) {
                throw Error(kInvalid, ctx + ": rules produce the discriminator column " +
                                          cfg.discriminator->spec.column + " themselves");
            }
        }
        if (!shape.primary.find(target.primary_key)) {
            throw Error(kInvalid, ctx + ": the legacy key must arrive in " + target.primary_key);
        }
        check_columns_fit(shape.primary, target, implicit, ctx);

        std::set<std::string> deps;
        for (const auto& fk : target.foreign_keys) {
            if (fk.is_self_reference()) {
                s.deferred_columns.push_back(fk.from_column);
                continue;
            }
            deps.insert(fk.to_table);
            if (!covers(s, fk)) {
                throw Error(kInvalid, ctx + ": foreign key " + fk.from_column + " -> " + fk.to_table +
                                          " is not produced by remapForeignKey, joinLookup or the discriminator");
            }
        }
        for (const auto& rule : s.rules) {
            if (const auto* r = std::get_if<RemapForeignKey>(&rule.params)) {
                const ForeignKeyDef* fk = target.foreign_key_on(r->column);
                if (fk && fk->is_self_reference()) {
                    throw Error(kInvalid, ctx + ": self-reference " + r->column +
                                              " is filled by the second pass, drop its remapForeignKey rule");
                }
                if (!cfg.tables.contains(r->references)) {
                    throw Error(kInvalid, ctx + ": remapForeignKey references " + r->references +
                                              ", which is not a migrated table");
                }
                deps.insert(r->references);
            } else if (const auto* j = std::get_if<JoinLookup>(&rule.params)) {
                if (!cfg.lookups.contains(j->lookup_table)) {
                    throw Error(kInvalid, ctx + ": joinLookup uses " + j->lookup_table + ", which is not a lookup step");
                }
                deps.insert(j->lookup_table);
            } else if (const auto* sp = std::get_if<SplitTable>(&rule.params)) {
                s.secondary.push_back(plan_secondary(t.target, *sp, shape.secondary.at(sp->into_table)));
            }
        }
        deps.erase(t.target);
        s.depends_on.assign(deps.begin(), deps.end());
        steps.emplace(s.table, std::move(s));
    }

    bool covers(const PlanStep& s, const ForeignKeyDef& fk) const {
        if (s.backfill && fk.from_column == cfg.discriminator->spec.column &&
            fk.to_table == cfg.discriminator->spec.table) {
            return true;
        }
        for (const auto& rule : s.rules) {
            if (const auto* r = std::get_if<RemapForeignKey>(&rule.params)) {
                if (r->column == fk.from_column && r->references == fk.to_table) return true;
            } else if (const auto* j = std::get_if<JoinLookup>(&rule.params)) {
                if (j->produce == fk.from_column && j->lookup_table == fk.to_table) return true;
            }
        }
        return false;
    }

    SecondaryLoad plan_secondary(const std::string& parent, const SplitTable& sp, const ColumnEnv& env) {
        const std::string ctx = "tables." + parent + " splitTable " + sp.into_table;
        const TableDef* child = cfg.target_schema.find(sp.into_table);
        if (!child) throw Error(kInvalid, ctx + ": unknown target table");
        if (cfg.tables.contains(sp.into_table) || cfg.lookups.contains(sp.into_table) ||
            (cfg.discriminator && cfg.discriminator->spec.table == sp.into_table)) {
            throw Error(kInvalid, ctx + ": table is already filled by another step");
        }
        if (!owner.emplace(sp.into_table, parent).second) throw Error(kInvalid, ctx + ": table split twice");
        if (child->primary_key == sp.carried_key) {
            throw Error(kInvalid, ctx + ": the carried key must be a foreign key column, not the primary key");
        }
        if (child->foreign_keys.size() != 1 || child->foreign_keys[0].from_column != sp.carried_key ||
            child->foreign_keys[0].to_table != parent) {
            throw Error(kInvalid, ctx + ": the table's only foreign key must be " + sp.carried_key + " -> " + parent);
        }
        if (env.find(child->primary_key)) {
            throw Error(kInvalid, ctx + ": primary key " + child->primary_key + " is assigned by the loader");
        }
        ColumnEnv with_pk = env;
        with_pk.set(child->primary_key, DataKind::Integer);
        check_columns_fit(with_pk, *child, {}, ctx);
        return SecondaryLoad{sp.into_table, sp.carried_key};
    }

    std::vector<std::string> order() {
        // Dependencies on split tables wait for the step that fills them.
        for (auto& [name, s] : steps) {
            std::set<std::string> deps;
            for (const auto& d : s.depends_on) {
                if (steps.contains(d)) {
                    deps.insert(d);
                } else if (auto it = owner.find(d); it != owner.end()) {
                    if (it->second != name) deps.insert(it->second);
                } else {
                    throw Error(kInvalid, "tables." + name + ": depends on " + d + ", which no step fills");
                }
            }
            s.depends_on.assign(deps.begin(), deps.end());
        }

        if (!cfg.step_order.empty()) return explicit_order();

        FkGraph g;
        for (const auto& [name, s] : steps) {
            g.nodes.insert(name);
            for (const auto& d : s.depends_on) g.edges.emplace_back(d, name);
        }
        std::vector<std::string> tables = order_graph(g).tables;
        if (cfg.discriminator) {
            auto it = std::find(tables.begin(), tables.end(), cfg.discriminator->spec.table);
            std::rotate(tables.begin(), it, it + 1);
        }
        return tables;
    }

    std::vector<std::string> explicit_order() const {
        const auto& order = cfg.step_order;
        std::set<std::string> listed(order.begin(), order.end());
        if (listed.size() != order.size()) throw Error(kInvalid, "steps: a table is listed twice");
        for (const auto& [name, _] : steps) {
            if (!listed.contains(name)) throw Error(kInvalid, "steps: " + name + " is missing from the order");
        }
        std::set<std::string> done;
        for (const auto& name : order) {
            auto it = steps.find(name);
            if (it == steps.end()) throw Error(kInvalid, "steps: " + name + " is not a configured step");
            for (const auto& d : it->second.depends_on) {
                if (!done.contains(d)) throw Error(kInvalid, "steps: " + name + " is listed before " + d);
            }
            done.insert(name);
        }
        return order;
    }
};

} // namespace

MigrationPlan compile_plan(const MigrationConfig& config) {
    Planner planner{config, {}, {}};
    if (config.discriminator) planner.add_seed();
    for (const auto& [_, l] : config.lookups) planner.add_lookup(l);
    for (const auto& [_, t] : config.tables) planner.add_table(t);

    MigrationPlan plan;
    for (const auto& name : planner.order()) plan.steps.push_back(std::move(planner.steps.at(name)));
    return plan;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::shared_ptr<spdlog::logger> step_log() {
    static std::shared_ptr<spdlog::logger> log = [] {
        auto existing = spdlog::get("dbmerge");
        return existing ? existing : spdlog::stderr_logger_mt("dbmerge");
    }();
    return log;
}

struct JournalEntry {
    std::string step;
    TableReport counts;
};

std::map<std::string, JournalEntry> read_journal(sql::Database& db) {
    db.exec("CREATE TABLE IF NOT EXISTS " + sql::quote_ident(kStepJournal) +
            " (TableName TEXT PRIMARY KEY, Step TEXT NOT NULL, Extracted INTEGER NOT NULL,"
            " Transformed INTEGER NOT NULL, Loaded INTEGER NOT NULL, Rejected INTEGER NOT NULL)");
    std::map<std::string, JournalEntry> out;
    auto st = db.prepare("SELECT TableName, Step, Extracted, Transformed, Loaded, Rejected FROM " +
                         sql::quote_ident(kStepJournal));
    while (st.step()) {
        JournalEntry e;
        e.step = st.column_text(1);
        e.counts.extracted = static_cast<std::size_t>(st.column_int(2));
        e.counts.transformed = static_cast<std::size_t>(st.column_int(3));
        e.counts.loaded = static_cast<std::size_t>(st.column_int(4));
        e.counts.rejected = static_cast<std::size_t>(st.column_int(5));
        e.counts.resumed = true;
        out.emplace(st.column_text(0), std::move(e));
    }
    return out;
}

void write_journal(sql::Database& db, const std::string& table, const std::string& step, const TableReport& r) {
    auto st = db.prepare("INSERT INTO " + sql::quote_ident(kStepJournal) + " VALUES (?1, ?2, ?3, ?4, ?5, ?6)");
    st.bind_all({Value{table}, Value{step}, Value{static_cast<std::int64_t>(r.extracted)},
                 Value{static_cast<std::int64_t>(r.transformed)}, Value{static_cast<std::int64_t>(r.loaded)},
                 Value{static_cast<std::int64_t>(r.rejected)}});
    st.step();
}

sql::Database open_target(const MigrationConfig& cfg) {
    auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadWrite);
    db.exec("PRAGMA foreign_keys = ON");
    return db;
}

void add_rejects(TableReport& r, std::vector<RejectedRow> rows) {
    r.rejected += rows.size();
    r.reject_reasons.insert(r.reject_reasons.end(), std::make_move_iterator(rows.begin()),
                            std::make_move_iterator(rows.end()));
}

class Runner {
public:
    Runner(const MigrationPlan& plan, const MigrationConfig& cfg, const RunOptions& opts)
        : plan_(plan), cfg_(cfg), policy_(opts.policy.value_or(cfg.policy)), jobs_(std::max<std::size_t>(1, opts.jobs)) {}

    RunResult run() {
        // Reach every database before touching anything.
        sql::Database control = open_target(cfg_);
        for (const auto& s : cfg_.sources) Source::open(s.path, s.tag);
        for (const auto& step : plan_.steps) {
            require_table(control, step.table);
            for (const auto& sec : step.secondary) require_table(control, sec.table);
        }
        journal_ = read_journal(control);

        for (const auto& step : plan_.steps) {
            result_.report.table(step.table);
            for (const auto& sec : step.secondary) result_.report.table(sec.table);
        }
        schedule();
        if (failure_) std::rethrow_exception(failure_);

        result_.integrity = verify_target(control, cfg_.target_schema);
        return std::move(result_);
    }

private:
    static void require_table(sql::Database& db, const std::string& table) {
        if (!db.table_exists(table)) {
            throw Error(ErrorCode::PreconditionError, "target table " + table + " does not exist");
        }
    }

    void schedule() {
        std::mutex mu;
        std::condition_variable cv;
        std::set<std::string> done;
        std::vector<bool> started(plan_.steps.size(), false);
        std::size_t running = 0;
        bool stop = false;

        auto ready = [&](const PlanStep& s) {
            return std::all_of(s.depends_on.begin(), s.depends_on.end(), [&](const auto& d) { return done.contains(d); });
        };
        auto worker = [&] {
            std::unique_lock lock(mu);
            for (;;) {
                std::size_t pick = plan_.steps.size();
                bool pending = false;
                for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
                    if (started[i]) continue;
                    pending = true;
                    if (ready(plan_.steps[i])) {
                        pick = i;
                        break;
                    }
                    // Serial runs keep plan order strictly.
                    if (jobs_ == 1) break;
                }
                if (stop || !pending) return;
                if (pick == plan_.steps.size()) {
                    if (running == 0) return; // unreachable for a valid plan
                    cv.wait(lock);
                    continue;
                }
                started[pick] = true;
                ++running;
                lock.unlock();
                bool ok = run_guarded(plan_.steps[pick]);
                lock.lock();
                --running;
                if (ok) {
                    done.insert(plan_.steps[pick].table);
                } else {
                    stop = true;
                }
                cv.notify_all();
            }
        };

        if (jobs_ == 1) {
            worker();
            return;
        }
        std::vector<std::jthread> threads;
        for (std::size_t i = 0; i < std::min(jobs_, plan_.steps.size()); ++i) threads.emplace_back(worker);
    }

    /// false when the run must stop.
    bool run_guarded(const PlanStep& step) {
        try {
            run_step(step);
            return true;
        } catch (const Error& e) {
            std::lock_guard lock(report_mu_);
            if (e.code() == ErrorCode::AbortSignal) {
                result_.report.aborted = true;
                result_.report.abort_cause = e.detail();
                step_log()->error("step table={} aborted: {}", step.table, e.detail());
            } else if (!failure_) {
                failure_ = std::current_exception();
            }
        } catch (...) {
            std::lock_guard lock(report_mu_);
            if (!failure_) failure_ = std::current_exception();
        }
        return false;
    }

    void publish(const std::string& table, TableReport r, double ms) {
        step_log()->info("step table={} extracted={} transformed={} loaded={} rejected={}{} ms={:.1f}", table,
                         r.extracted, r.transformed, r.loaded, r.rejected, r.resumed ? " resumed" : "", ms);
        std::lock_guard lock(report_mu_);
        result_.report.table(table) = std::move(r);
    }

    std::optional<TableReport> journaled(const std::string& table) const {
        auto it = journal_.find(table);
        if (it == journal_.end()) return std::nullopt;
        return it->second.counts;
    }

    void run_step(const PlanStep& step) {
        auto t0 = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        };
        if (auto prior = journaled(step.table)) {
            restore(step);
            publish(step.table, *prior, elapsed());
            for (const auto& sec : step.secondary) publish(sec.table, journaled(sec.table).value_or(TableReport{}), 0);
            return;
        }
        switch (step.kind) {
        case StepKind::Seed: run_seed(step, elapsed); break;
        case StepKind::Lookup: run_lookup(step, elapsed); break;
        case StepKind::Table: run_table(step, elapsed); break;
        }
    }

    void restore(const PlanStep& step) {
        sql::Database db = open_target(cfg_);
        if (step.kind == StepKind::Table) {
            KeyMap keys = load_keymap(db, step.table);
            // The persisted triples do not record which source the keys were preserved from.
            if (step.mode.kind == LoadModeKind::PreserveKeys) keys.share_keys_of(step.mode.designated_source);
            keymaps_.put(std::move(keys));
            for (const auto& sec : step.secondary) keymaps_.put(load_keymap(db, sec.table));
        } else if (step.kind == StepKind::Lookup) {
            const LookupStep& l = cfg_.lookups.at(step.table);
            const TableDef& t = cfg_.target_schema.at(step.table);
            std::vector<LookupEntry> entries;
            auto st = db.prepare("SELECT " + sql::quote_ident(t.primary_key) + ", " + sql::quote_ident(l.value_column) +
                                 " FROM " + sql::quote_ident(t.name) + " ORDER BY 1");
            while (st.step()) {
                std::string value = st.column_text(1);
                entries.push_back(LookupEntry{st.column_int(0), value, normalize_key(value, l.spec.normalization)});
            }
            std::lock_guard lock(lookup_mu_);
            lookups_.insert_or_assign(step.table, Lookup(step.table, l.spec.normalization, entries));
        }
    }

    template <typename Elapsed>
    void run_seed(const PlanStep& step, Elapsed elapsed) {
        const auto& d = *cfg_.discriminator;
        TableReport r;
        r.extracted = r.transformed = d.rows.size();
        KeyMap keys(step.table);
        {
            std::lock_guard write(write_mu_);
            sql::Database db = open_target(cfg_);
            sql::Transaction tx(db, true);
            LoadResult res = load_table(db, d.rows, cfg_.target_schema.at(step.table),
                                        LoadOptions{step.mode, policy_, cfg_.batch_size, {}}, keys);
            r.loaded = res.loaded;
            add_rejects(r, std::move(res.rejected));
            write_journal(db, step.table, step.table, r);
            tx.commit();
        }
        publish(step.table, std::move(r), elapsed());
    }

    template <typename Elapsed>
    void run_lookup(const PlanStep& step, Elapsed elapsed) {
        const LookupStep& l = cfg_.lookups.at(step.table);
        const TableDef& t = cfg_.target_schema.at(step.table);

        std::vector<Source> sources;
        for (const auto& s : cfg_.sources) sources.push_back(Source::open(s.path, s.tag));
        std::vector<Source*> ptrs;
        for (auto& s : sources) {
            s.begin_snapshot();
            ptrs.push_back(&s);
        }
        DistinctResult distinct = extract_distinct(ptrs, cfg_.source_schema, l.spec);
        for (auto& s : sources) s.end_snapshot();

        TableReport r;
        r.extracted = r.transformed = distinct.entries.size();
        KeyMap keys(step.table);
        std::vector<LookupEntry> loaded;
        {
            std::lock_guard write(write_mu_);
            sql::Database db = open_target(cfg_);
            sql::Transaction tx(db, true);
            // Ids continue after whatever the table already holds.
            const std::int64_t offset = next_identity(db, t) - 1;
            std::vector<Row> rows;
            for (auto& e : distinct.entries) {
                e.id += offset;
                Row row;
                row.table = step.table;
                row.ref = "lookup:" + step.table + ":" + std::to_string(e.id);
                row.set(t.primary_key, Value{e.id});
                row.set(l.value_column, Value{e.value});
                rows.push_back(std::move(row));
            }
            LoadResult res = load_table(db, std::move(rows), t, LoadOptions{step.mode, policy_, cfg_.batch_size, {}},
                                        keys);
            r.loaded = res.loaded;
            add_rejects(r, std::move(res.rejected));
            write_journal(db, step.table, step.table, r);
            tx.commit();
        }
        for (const auto& e : distinct.entries) {
            if (keys.contains(0, e.id)) loaded.push_back(e);
        }
        {
            std::lock_guard lock(lookup_mu_);
            lookups_.insert_or_assign(step.table, Lookup(step.table, l.spec.normalization, loaded));
        }
        publish(step.table, std::move(r), elapsed());
    }

    template <typename Elapsed>
    void run_table(const PlanStep& step, Elapsed elapsed) {
        const TableStep& cfg_step = cfg_.tables.at(step.table);
        const TableDef& target = cfg_.target_schema.at(step.table);
        const TableDef& source = cfg_.source_schema.at(cfg_step.source_table);

        TableReport r;
        std::vector<Row> rows;
        for (int dbid : cfg_step.sources) {
            const SourceConfig* sc = cfg_.find_source(dbid);
            Source src = Source::open(sc->path, sc->tag);
            src.begin_snapshot();
            ExtractResult ex = extract_table(src, source, cfg_step.extract);
            src.end_snapshot();
            r.extracted += ex.read();
            if (!ex.diverted.empty() && policy_ == RowPolicy::Abort) {
                const auto& first = ex.diverted.front();
                throw Error(ErrorCode::AbortSignal, step.table + " " + first.ref + ": " + first.fault.describe());
            }
            for (auto& d : ex.diverted) d.table = step.table;
            add_rejects(r, std::move(ex.diverted));
            rows.insert(rows.end(), std::make_move_iterator(ex.rows.begin()), std::make_move_iterator(ex.rows.end()));
        }

        std::map<std::string, Lookup, std::less<>> lookups;
        {
            std::lock_guard lock(lookup_mu_);
            for (const auto& d : step.depends_on) {
                if (auto it = lookups_.find(d); it != lookups_.end()) lookups.emplace(d, it->second);
            }
        }
        TransformContext ctx{&keymaps_, &lookups};
        TransformOutput out = apply_rules(step.rules, std::move(rows), ctx, policy_);
        for (auto& rej : out.rejected) rej.table = step.table;
        add_rejects(r, std::move(out.rejected));
        rows = std::move(out.rows);
        if (step.backfill) rows = backfill_discriminator(std::move(rows), cfg_.discriminator->spec);
        r.transformed = rows.size();

        std::vector<const KeyMap*> deps;
        for (const auto& d : step.depends_on) {
            if (const KeyMap* m = keymaps_.find(d)) deps.push_back(m);
        }

        KeyMap keys(step.table);
        std::vector<std::pair<std::string, TableReport>> secondary_reports;
        std::vector<KeyMap> secondary_keys;
        {
            std::lock_guard write(write_mu_);
            sql::Database db = open_target(cfg_);
            sql::Transaction tx(db, true);
            LoadResult res = load_table(db, std::move(rows), target,
                                        LoadOptions{step.mode, policy_, cfg_.batch_size, step.deferred_columns}, keys,
                                        deps);
            r.loaded = res.loaded;
            add_rejects(r, std::move(res.rejected));
            keys.seal();
            persist_keymap(keys, db);

            for (const auto& sec : step.secondary) {
                auto [report, map] = load_secondary(db, sec, std::move(out.secondary[sec.table]), keys);
                write_journal(db, sec.table, step.table, report);
                secondary_reports.emplace_back(sec.table, std::move(report));
                secondary_keys.push_back(std::move(map));
            }
            write_journal(db, step.table, step.table, r);
            tx.commit();
        }
        keymaps_.put(std::move(keys));
        for (auto& m : secondary_keys) keymaps_.put(std::move(m));
        publish(step.table, std::move(r), elapsed());
        for (auto& [name, rep] : secondary_reports) publish(name, std::move(rep), elapsed());
    }

    /// Rows moved out by splitTable: the parent's legacy key doubles as the
    /// child's legacy key, and the carried column is remapped to the
    /// parent's new key.
    std::pair<TableReport, KeyMap> load_secondary(sql::Database& db, const SecondaryLoad& sec, std::vector<Row> rows,
                                                  const KeyMap& parent) {
        const TableDef& child = cfg_.target_schema.at(sec.table);
        TableReport r;
        r.extracted = rows.size();
        for (auto& row : rows) {
            row.table = sec.table;
            Value carried = row.get(sec.carried_key);
            row.set(child.primary_key, std::move(carried));
        }
        TransformOutput out = remap_foreign_key(std::move(rows), parent, sec.carried_key, policy_);
        for (auto& rej : out.rejected) rej.table = sec.table;
        add_rejects(r, std::move(out.rejected));
        r.transformed = out.rows.size();
        KeyMap keys(sec.table);
        const KeyMap* deps[] = {&parent};
        LoadResult res = load_table(db, std::move(out.rows), child,
                                    LoadOptions{LoadMode::generate(), policy_, cfg_.batch_size, {}}, keys, deps);
        r.loaded = res.loaded;
        add_rejects(r, std::move(res.rejected));
        keys.seal();
        persist_keymap(keys, db);
        return {std::move(r), std::move(keys)};
    }

    const MigrationPlan& plan_;
    const MigrationConfig& cfg_;
    RowPolicy policy_;
    std::size_t jobs_;
    std::map<std::string, JournalEntry> journal_;

    KeyMapRegistry keymaps_;
    std::mutex lookup_mu_;
    std::map<std::string, Lookup, std::less<>> lookups_;
    /// One writer at a time; extraction and transformation overlap freely.
    std::mutex write_mu_;
    std::mutex report_mu_;
    RunResult result_;
    std::exception_ptr failure_;
};

} // namespace

RunResult run(const MigrationPlan& plan, const MigrationConfig& config, const RunOptions& options) {
    return Runner(plan, config, options).run();
}

} // namespace dbmerge
