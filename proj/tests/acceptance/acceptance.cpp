// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   dbmerge_acceptance <work dir> <path to the dbmerge executable>
//
// The end-to-end criteria drive the real command-line tool. Their checks
// read the resulting databases with plain SQL rather than through the
// library, so a bug in the loader cannot also hide in the check.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbmerge/config.hpp"
#include "dbmerge/error.hpp"
#include "dbmerge/extract.hpp"
#include "dbmerge/fixture.hpp"
#include "dbmerge/paging.hpp"
#include "dbmerge/pipeline.hpp"
#include "dbmerge/rules.hpp"
#include "dbmerge/schema.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace dbmerge;
using nlohmann::json;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

/// Collects failed expectations without stopping at the first one.
class Checker {
public:
    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok_ = false;
            if (!failures_.empty()) failures_ += "; ";
            failures_ += what;
        }
    }
    void note(const std::string& s) {
        if (!notes_.empty()) notes_ += ", ";
        notes_ += s;
    }
    Outcome done() const { return {ok_, ok_ ? notes_ : failures_}; }

private:
    bool ok_ = true;
    std::string failures_;
    std::string notes_;
};

fs::path g_work;
fs::path g_cli;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

/// Runs the CLI with output captured in `log`; returns its exit status.
int cli(const std::vector<std::string>& args, const fs::path& log) {
    std::string cmd = shell_quote(g_cli.string());
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " > " + shell_quote(log.string()) + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct CsvRow {
    std::size_t extracted = 0, transformed = 0, loaded = 0, rejected = 0;
};

std::map<std::string, CsvRow> read_report(const fs::path& p) {
    std::map<std::string, CsvRow> out;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name, a, b, c, d;
        std::getline(ls, name, ',');
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        std::getline(ls, c, ',');
        std::getline(ls, d, ',');
        out[name] = CsvRow{std::stoul(a), std::stoul(b), std::stoul(c), std::stoul(d)};
    }
    return out;
}

/// A fixture generated and migrated through the CLI.
struct Migrated {
    fs::path dir;
    FixtureManifest manifest;
    int gen_rc = -1;
    int migrate_rc = -1;
    int validate_rc = -1;
    double migrate_seconds = 0;

    fs::path report() const { return dir / "report.csv"; }
    fs::path target() const { return dir / manifest.target_file; }
};

Migrated migrate_fixture(const std::string& name) {
    Migrated m;
    m.dir = g_work / name;
    fs::remove_all(m.dir);
    fs::create_directories(m.dir);
    m.gen_rc = cli({"--seed", "7", "gen-fixture", "--out", m.dir.string(), "--students-per-source", "1000"},
                   m.dir / "gen.log");
    m.manifest = FixtureManifest::from_json(json::parse(slurp(m.dir / "manifest.json")));
    auto t0 = std::chrono::steady_clock::now();
    m.migrate_rc = cli({"--config", (m.dir / "migration.json").string(), "--report", m.report().string(), "migrate"},
                       m.dir / "migrate.log");
    m.migrate_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.validate_rc = cli({"--config", (m.dir / "migration.json").string(), "validate"}, m.dir / "validate.log");
    return m;
}

const Migrated& first_run() {
    static Migrated m = migrate_fixture("run_a");
    return m;
}

sql::Database open_ro(const fs::path& p) { return sql::Database::open(p, sql::Database::Mode::ReadOnly); }

// ---------------------------------------------------------------------------

Outcome ac1_end_to_end() {
    Checker c;
    const Migrated& m = first_run();
    c.expect(m.gen_rc == 0, "gen-fixture exited " + std::to_string(m.gen_rc));
    c.expect(m.migrate_rc == 0, "migrate exited " + std::to_string(m.migrate_rc));
    c.expect(m.validate_rc == 0, "validate exited " + std::to_string(m.validate_rc));
    c.expect(m.migrate_seconds < 60.0, "migrate took " + std::to_string(m.migrate_seconds) + " s");

    auto db = open_ro(m.target());
    std::int64_t dangling = 0;
    auto fkc = db.prepare("PRAGMA foreign_key_check");
    while (fkc.step()) ++dangling;
    c.expect(dangling == 0, std::to_string(dangling) + " dangling foreign keys");

    std::int64_t duplicates = 0;
    SchemaModel target = fixture_target_schema();
    for (const auto& [name, t] : target.tables()) {
        duplicates += db.query_int("SELECT count(*) - count(DISTINCT " + sql::quote_ident(t.primary_key) + ") FROM " +
                                   sql::quote_ident(name));
    }
    c.expect(duplicates == 0, std::to_string(duplicates) + " duplicate primary keys");

    char buf[64];
    std::snprintf(buf, sizeof buf, "migrate %.2f s", m.migrate_seconds);
    c.note(buf);
    c.note("0 dangling, 0 duplicate keys");
    return c.done();
}

Outcome ac2_conservation() {
    Checker c;
    const Migrated& m = first_run();
    auto report = read_report(m.report());
    c.expect(report.size() == 7, "report has " + std::to_string(report.size()) + " tables");
    auto db = open_ro(m.target());
    for (const auto& [name, r] : report) {
        c.expect(r.extracted == r.loaded + r.rejected, name + ": extracted != loaded + rejected");
        c.expect(static_cast<std::int64_t>(r.loaded) == testing::count_rows(db, name), name + ": loaded != rows in target");
    }
    std::size_t expected = 3000 - m.manifest.dirty_students();
    auto it = report.find("Student");
    c.expect(it != report.end() && it->second.loaded == expected,
             "students loaded " + (it == report.end() ? std::string("?") : std::to_string(it->second.loaded)) +
                 ", expected " + std::to_string(expected));
    c.expect(it != report.end() && it->second.extracted == 3000, "student rows extracted != 3000");
    c.note("students " + std::to_string(expected) + " = 3000 - " + std::to_string(m.manifest.dirty_students()) +
           " dirty");
    return c.done();
}

Outcome ac3_keymaps() {
    Checker c;
    const Migrated& m = first_run();
    auto report = read_report(m.report());
    MigrationConfig cfg = load_config_file(m.dir / "migration.json");
    auto db = open_ro(m.target());
    std::size_t checked = 0;
    for (const auto& [name, step] : cfg.tables) {
        if (step.mode.kind != LoadModeKind::GenerateKeys) continue;
        const std::string km = sql::quote_ident(keymap_table_name(name));
        if (!db.table_exists(keymap_table_name(name))) {
            c.expect(false, name + ": no persisted key map");
            continue;
        }
        std::int64_t entries = db.query_int("SELECT count(*) FROM " + km);
        std::int64_t sources = db.query_int("SELECT count(*) FROM (SELECT DISTINCT DBID, OldKey FROM " + km + ")");
        std::int64_t targets = db.query_int("SELECT count(DISTINCT NewKey) FROM " + km);
        std::int64_t orphans = db.query_int("SELECT count(*) FROM " + km + " k WHERE NOT EXISTS (SELECT 1 FROM " +
                                            sql::quote_ident(name) + " t WHERE t.ID = k.NewKey)");
        c.expect(static_cast<std::size_t>(entries) == report[name].loaded, name + ": entries != rows loaded");
        c.expect(sources == entries, name + ": (DBID, OldKey) repeats");
        c.expect(targets == entries, name + ": NewKey repeats (not injective)");
        c.expect(orphans == 0, name + ": NewKey missing from target");
        ++checked;
    }
    c.expect(checked == 4, "expected 4 generateKeys tables, saw " + std::to_string(checked));
    c.note(std::to_string(checked) + " generateKeys maps injective and complete");
    return c.done();
}

Outcome ac4_relationships() {
    Checker c;
    const Migrated& m = first_run();
    std::multiset<std::pair<std::string, std::string>> expected;
    for (const auto& s : m.manifest.sources) {
        auto db = open_ro(m.dir / s.file);
        auto pairs = testing::link_pairs(db, "ProgrammesCourses", "ProgrammeID", "Programme", "CourseID", "Course");
        expected.insert(pairs.begin(), pairs.end());
    }
    auto target = open_ro(m.target());
    auto actual = testing::link_pairs(target, "ProgrammesCourses", "ProgrammeID", "Programme", "CourseID", "Course");
    c.expect(actual == expected, "pair multisets differ (" + std::to_string(actual.size()) + " vs " +
                                     std::to_string(expected.size()) + ")");
    c.note(std::to_string(actual.size()) + " (programme, course) pairs match");
    return c.done();
}

Outcome ac5_identity() {
    Checker c;
    const Migrated& m = first_run();
    std::vector<std::int64_t> source_ids, target_ids;
    {
        auto src = open_ro(m.dir / m.manifest.sources.at(0).file);
        auto st = src.prepare("SELECT ID FROM Faculty ORDER BY ID");
        while (st.step()) source_ids.push_back(st.column_int(0));
        auto tgt = open_ro(m.target());
        auto tt = tgt.prepare("SELECT ID FROM Faculty ORDER BY ID");
        while (tt.step()) target_ids.push_back(tt.column_int(0));
    }
    c.expect(source_ids == target_ids, "Faculty key sets differ");
    bool gaps = !source_ids.empty() && source_ids.back() > static_cast<std::int64_t>(source_ids.size());
    c.expect(gaps, "fixture Faculty keys have no gaps to preserve");

    fs::path copy = g_work / "identity_probe.db";
    fs::copy_file(m.target(), copy, fs::copy_options::overwrite_existing);
    auto db = sql::Database::open(copy, sql::Database::Mode::ReadWrite);
    db.exec("INSERT INTO Faculty(Name) VALUES ('Post-migration faculty')");
    std::int64_t got = db.last_insert_rowid();
    std::int64_t want = source_ids.empty() ? 1 : source_ids.back() + 1;
    c.expect(got == want, "new Faculty got " + std::to_string(got) + ", expected " + std::to_string(want));
    c.note(std::to_string(target_ids.size()) + " keys kept with gaps, next insert " + std::to_string(got));
    return c.done();
}

std::string fold(std::string v) {
    auto b = v.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string::npos) return {};
    v = v.substr(b, v.find_last_not_of(" \t\r\n\f\v") - b + 1);
    for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return v;
}

Outcome ac6_distinct() {
    Checker c;
    const Migrated& m = first_run();
    MigrationConfig cfg = load_config_file(m.dir / "migration.json");
    const LookupStep& lk = cfg.lookups.at("Nationality");

    // Brute force over raw cells.
    std::set<std::string> oracle;
    std::size_t cells = 0;
    for (const auto& s : m.manifest.sources) {
        auto db = open_ro(m.dir / s.file);
        for (const auto& col : lk.spec.source_columns) {
            auto st = db.prepare("SELECT " + sql::quote_ident(col.column) + " FROM " + sql::quote_ident(col.table));
            while (st.step()) {
                ++cells;
                if (st.is_null(0)) continue;
                std::string k = fold(st.column_text(0));
                if (!k.empty()) oracle.insert(k);
            }
        }
    }
    c.expect(cells <= 10000, "oracle scanned more than 10^4 values");

    auto target = open_ro(m.target());
    std::vector<std::string> keys;
    auto st = target.prepare("SELECT Name FROM Nationality ORDER BY ID");
    while (st.step()) keys.push_back(fold(st.column_text(0)));
    std::set<std::string> unique(keys.begin(), keys.end());
    c.expect(unique.size() == keys.size(), "two lookup rows share a normalized key");
    c.expect(unique == oracle, "lookup keys differ from the brute-force union");

    std::vector<Source> sources;
    for (const auto& s : cfg.sources) sources.push_back(Source::open(s.path, s.tag));
    std::vector<Source*> ptrs;
    for (auto& s : sources) ptrs.push_back(&s);
    DistinctResult a = extract_distinct(ptrs, cfg.source_schema, lk.spec);
    DistinctResult b = extract_distinct(ptrs, cfg.source_schema, lk.spec);
    c.expect(a.entries == b.entries, "re-extraction differs");
    std::vector<std::pair<std::int64_t, std::string>> loaded, extracted;
    auto st2 = target.prepare("SELECT ID, Name FROM Nationality ORDER BY ID");
    while (st2.step()) loaded.emplace_back(st2.column_int(0), st2.column_text(1));
    for (const auto& e : a.entries) extracted.emplace_back(e.id, e.value);
    c.expect(loaded == extracted, "re-extraction does not reproduce the loaded lookup table");
    c.note(std::to_string(keys.size()) + " distinct keys from " + std::to_string(cells) + " cells, idempotent");
    return c.done();
}

Outcome ac7_load_order() {
    Checker c;
    std::mt19937_64 rng(7);
    std::size_t ok_orders = 0, cycles_found = 0, max_fks = 0;
    for (int i = 0; i < 1000; ++i) {
        auto dag = testing::random_dag(rng, 20, 40);
        max_fks = std::max(max_fks, dag.fks.size());
        try {
            LoadOrder o = load_order(SchemaModel::from_tables(dag.tables));
            bool good = o.tables.size() == dag.tables.size();
            for (const auto& [from, to] : dag.fks) good = good && o.position(to) < o.position(from);
            if (good) ++ok_orders;
        } catch (const Error&) {
        }
    }
    for (int i = 0; i < 1000; ++i) {
        auto dag = testing::random_dag(rng, 20, 39);
        if (dag.tables.size() < 2) {
            // A one-table schema can only cycle through itself, which is a
            // self-reference rather than a cycle; add a second table.
            TableDef t;
            t.name = "Extra";
            t.primary_key = "ID";
            t.columns.push_back(ColumnDef{"ID", DataKind::Integer, false, true, 2});
            dag.tables.push_back(t);
        }
        // Close a cycle along an existing path, or between two fresh tables.
        std::size_t a = rng() % dag.tables.size();
        std::size_t b = rng() % dag.tables.size();
        while (b == a) b = rng() % dag.tables.size();
        auto link = [](TableDef& from, const std::string& to, const std::string& col) {
            from.columns.push_back(ColumnDef{col, DataKind::Integer, true, false, 2});
            from.foreign_keys.push_back(ForeignKeyDef{from.name, col, to, "ID"});
        };
        std::string an = dag.tables[a].name, bn = dag.tables[b].name;
        link(dag.tables[a], bn, "CycleOut");
        link(dag.tables[b], an, "CycleBack");
        try {
            load_order(SchemaModel::from_tables(dag.tables));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::CyclicDependency) ++cycles_found;
        }
    }
    c.expect(ok_orders == 1000, std::to_string(ok_orders) + "/1000 acyclic orders valid");
    c.expect(cycles_found == 1000, std::to_string(cycles_found) + "/1000 cycles detected");
    c.note("1000/1000 orders valid, 1000/1000 cycles detected, up to " + std::to_string(max_fks) + " FKs");
    return c.done();
}

Outcome ac8_rules() {
    Checker c;
    // Code map.
    auto gender = parse_rule(json::parse(R"({"kind": "translateCoded", "column": "Gender",
        "map": [{"from": 1, "to": "M"}, {"from": 2, "to": "F"}]})"));
    std::vector<Row> rows{testing::make_row("Student", 1, {{"ID", Value{std::int64_t{1}}}, {"Gender", Value{std::int64_t{1}}}}),
                          testing::make_row("Student", 1, {{"ID", Value{std::int64_t{2}}}, {"Gender", Value{std::int64_t{2}}}})};
    auto out = apply_rule(gender, rows, {}, RowPolicy::RejectRow);
    c.expect(out.rows.size() == 2 && to_display(out.rows[0].get("Gender")) == "M" &&
                 to_display(out.rows[1].get("Gender")) == "F",
             "1->M, 2->F not reproduced");

    // After-tax derivation.
    auto tax = parse_rule(json::parse(R"j({"kind": "deriveColumn", "target": "AfterTax",
        "expression": "Amount * (1 + Rate)", "scale": 2})j"));
    auto taxed = apply_rule(tax,
                            {testing::make_row("S", 1, {{"Amount", Value{*Decimal::parse("100.00")}},
                                                        {"Rate", Value{*Decimal::parse("0.18")}}})},
                            {}, RowPolicy::RejectRow);
    std::string after = taxed.rows.empty() ? "?" : to_display(taxed.rows[0].get("AfterTax"));
    c.expect(after == "118.00", "afterTax(100.00, 0.18) = " + after);

    // Unknown code through a whole run: only unknown-gender rows stay dirty.
    fs::path dir = g_work / "policy";
    fs::remove_all(dir);
    FixtureManifest man = gen_fixture(FixtureSpec{dir, 200, 7});
    std::size_t unknown = 0;
    for (const auto& s : man.sources) {
        auto db = sql::Database::open(dir / s.file, sql::Database::Mode::ReadWrite);
        db.exec("UPDATE Student SET EmbgNumber = '0000000000000' WHERE EmbgNumber IS NULL");
        db.exec("UPDATE Student SET Year = '1' WHERE Year = 'n/a'");
        unknown += s.dirty.unknown_gender;
    }
    c.expect(unknown > 0, "fixture planted no unknown codes");
    fs::copy_file(dir / "iknow.db", dir / "pristine.db", fs::copy_options::overwrite_existing);

    MigrationConfig cfg = load_config_file(dir / "migration.json");
    MigrationPlan plan = compile_plan(cfg);
    RunOptions abort_opts;
    abort_opts.policy = RowPolicy::Abort;
    RunResult halted = run(plan, cfg, abort_opts);
    c.expect(halted.report.aborted, "abort policy did not halt");
    c.expect(halted.report.abort_cause.find("UnknownCode") != std::string::npos,
             "abort cause: " + halted.report.abort_cause);
    {
        auto db = open_ro(cfg.target);
        c.expect(testing::count_rows(db, "Student") == 0, "Student rows survived the abort");
        c.expect(!db.table_exists(keymap_table_name("Student")), "Student key map survived the abort");
        c.expect(testing::count_rows(db, "Course") > 0, "earlier steps were lost");
    }

    fs::copy_file(dir / "pristine.db", cfg.target, fs::copy_options::overwrite_existing);
    RunResult rejected = run(plan, cfg);
    const TableReport* s = rejected.report.find("Student");
    c.expect(!rejected.report.aborted, "reject policy aborted");
    c.expect(s && s->rejected == unknown, "rejected " + std::to_string(s ? s->rejected : 0) + ", expected " +
                                               std::to_string(unknown));
    bool all_unknown = s != nullptr;
    if (s) {
        for (const auto& r : s->reject_reasons) all_unknown = all_unknown && r.fault.describe() == "UnknownCode(7)";
    }
    c.expect(all_unknown, "rejects other than UnknownCode(7)");
    c.note("M/F mapped, 118.00, " + std::to_string(unknown) + " UnknownCode rejected, abort rolled back Student");
    return c.done();
}

Outcome ac9_pagination() {
    Checker c;
    auto db = sql::Database::in_memory();
    paging::create_user_table(db, 1000, 7);
    std::vector<std::string> all;
    auto st = db.prepare("SELECT LoweredUserName FROM aspnet_Users ORDER BY LoweredUserName");
    while (st.step()) all.push_back(st.column_text(0));
    std::size_t pages_checked = 0;
    for (std::size_t size : {1u, 7u, 10u}) {
        std::vector<std::string> by_offset, by_keyset;
        std::optional<std::string> after;
        for (std::size_t p = 0;; ++p) {
            auto off = paging::page_offset(db, paging::PageRequest{p, size, {}});
            auto ks = paging::page_keyset(db, paging::PageRequest{p, size, after});
            c.expect(off == ks.rows, "page " + std::to_string(p) + " size " + std::to_string(size) + " differs");
            if (off.empty() && ks.rows.empty()) break;
            for (const auto& r : off) by_offset.push_back(r.lowered_user_name);
            for (const auto& r : ks.rows) by_keyset.push_back(r.lowered_user_name);
            after = ks.next_after_key;
            ++pages_checked;
            if (p > 2000) break;
        }
        c.expect(by_offset == all, "offset pages do not partition the table at size " + std::to_string(size));
        c.expect(by_keyset == all, "keyset pages do not partition the table at size " + std::to_string(size));
    }
    c.note(std::to_string(pages_checked) + " pages equal across sizes 1, 7, 10");
    return c.done();
}

Outcome ac10_trend() {
    Checker c;
    paging::BenchSpec spec; // 10^3, 10^4, 10^5 records; page size 10; 30 repetitions
    auto t0 = std::chrono::steady_clock::now();
    paging::BenchResult r = paging::bench(spec);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(g_work / "bench.csv") << r.to_csv();
    auto t = paging::check_trend(r, 100000, spec.keyset_bound);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "offset p%zu %.4f ms vs p%zu %.4f ms, keyset %.4f vs %.4f ms, bench %.1f s",
                  t.offset_last.page_index, t.offset_last.stats.mean, t.offset_first.page_index,
                  t.offset_first.stats.mean, t.keyset_last.stats.mean, t.keyset_first.stats.mean, seconds);
    c.expect(spec.page_size == 10 && spec.repetitions == 30, "bench not at 10 rows x 30 reps");
    c.expect(t.offset_diverges, std::string("offset does not diverge: ") + buf);
    c.expect(t.keyset_flat, std::string("keyset not flat: ") + buf);
    c.expect(seconds <= 600.0, std::string("bench exceeded 10 minutes: ") + buf);
    c.note(buf);
    return c.done();
}

Outcome ac11_determinism() {
    Checker c;
    const Migrated& a = first_run();
    Migrated b = migrate_fixture("run_b");
    c.expect(b.migrate_rc == 0, "second migrate exited " + std::to_string(b.migrate_rc));
    c.expect(slurp(a.report()) == slurp(b.report()), "LoadReport CSVs differ");
    auto da = open_ro(a.target());
    auto db = open_ro(b.target());
    SchemaModel target = fixture_target_schema();
    for (const auto& [name, t] : target.tables()) {
        c.expect(testing::dump_table(da, name, t.primary_key) == testing::dump_table(db, name, t.primary_key),
                 name + " contents differ");
    }
    c.expect(dump_sql(da) == dump_sql(db), "full target dumps differ");
    c.note("report CSVs byte-identical, " + std::to_string(target.size()) + " tables identical by PK");
    return c.done();
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: dbmerge_acceptance <work dir> <dbmerge executable>\n";
        return 2;
    }
    g_work = fs::absolute(argv[1]);
    g_cli = fs::absolute(argv[2]);
    fs::create_directories(g_work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"end-to-end migration: clean target in under 60 s", ac1_end_to_end},
        {"conservation: extracted = loaded + rejected, students = 3000 - dirty", ac2_conservation},
        {"key maps complete and injective", ac3_keymaps},
        {"programme/course pairs preserved", ac4_relationships},
        {"Faculty keys preserved, next insert gets max + 1", ac5_identity},
        {"distinct lookup extraction", ac6_distinct},
        {"load order on random schemas", ac7_load_order},
        {"transformation rules and row policies", ac8_rules},
        {"offset and keyset pages agree", ac9_pagination},
        {"pagination trend at 100000 rows", ac10_trend},
        {"two runs are byte-identical", ac11_determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.ok) ++failed;
        std::cout << (o.ok ? "PASS" : "FAIL") << " AC" << (i + 1) << " " << criteria[i].first;
        if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
        std::cout << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
