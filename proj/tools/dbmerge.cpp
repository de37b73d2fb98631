// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: plan, migrate, validate, gen-fixture, cleanup, bench.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dbmerge/config.hpp"
#include "dbmerge/error.hpp"
#include "dbmerge/fixture.hpp"
#include "dbmerge/keymap.hpp"
#include "dbmerge/load.hpp"
#include "dbmerge/paging.hpp"
#include "dbmerge/pipeline.hpp"

namespace {

using namespace dbmerge;

struct Options {
    std::string config = "migration.json";
    std::string policy;
    std::string report;
    std::uint64_t seed = 7;
    std::size_t jobs = 1;
    bool quiet = false;

    std::string out;
    std::size_t students = 1000;

    std::vector<std::size_t> records = {1000, 10000, 100000};
    std::size_t page_size = 10;
    std::size_t reps = 30;
    double keyset_bound = 3.0;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Error(ErrorCode::IOError, "cannot write " + path);
}

std::string rejects_path(const std::string& report) {
    auto dot = report.rfind(".csv");
    return (dot == std::string::npos ? report : report.substr(0, dot)) + ".rejects.csv";
}

int cmd_plan(const Options& o) {
    MigrationConfig cfg = load_config_file(o.config);
    std::cout << compile_plan(cfg).to_text();
    return 0;
}

int cmd_migrate(const Options& o) {
    MigrationConfig cfg = load_config_file(o.config);
    MigrationPlan plan = compile_plan(cfg);
    RunOptions ro;
    ro.jobs = o.jobs;
    if (!o.policy.empty()) ro.policy = parse_row_policy(o.policy);
    RunResult r = run(plan, cfg, ro);
    std::cout << r.report.to_text() << r.integrity.to_text();
    if (!o.report.empty()) {
        write_file(o.report, r.report.to_csv());
        write_file(rejects_path(o.report), r.report.rejects_csv());
    }
    return r.exit_code();
}

int cmd_validate(const Options& o) {
    MigrationConfig cfg = load_config_file(o.config);
    auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadOnly);
    IntegrityReport r = verify_target(db, cfg.target_schema);
    std::cout << r.to_text();
    return r.clean() ? 0 : 1;
}

int cmd_gen_fixture(const Options& o) {
    FixtureManifest m = gen_fixture(FixtureSpec{o.out, o.students, o.seed});
    std::cout << "wrote fixture to " << o.out << ": " << m.sources.size() << " sources, " << m.dirty_students()
              << " dirty student rows, " << m.expected_students() << " expected to load\n";
    return 0;
}

int cmd_cleanup(const Options& o) {
    MigrationConfig cfg = load_config_file(o.config);
    auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadWrite);
    std::size_t n = drop_migration_tables(db);
    std::cout << "dropped " << n << " migration table" << (n == 1 ? "" : "s") << "\n";
    return 0;
}

int cmd_bench(const Options& o) {
    paging::BenchSpec spec;
    spec.record_counts = o.records;
    spec.page_size = o.page_size;
    spec.repetitions = o.reps;
    spec.keyset_bound = o.keyset_bound;
    spec.seed = o.seed;
    paging::BenchResult r = paging::bench(spec);
    if (o.out.empty()) {
        std::cout << r.to_csv();
    } else {
        write_file(o.out, r.to_csv());
    }
    std::size_t largest = *std::max_element(spec.record_counts.begin(), spec.record_counts.end());
    auto t = paging::check_trend(r, largest, spec.keyset_bound);
    spdlog::info("offset page {} vs page {}: {:.4f} ms vs {:.4f} ms, diverges={}", t.offset_last.page_index,
                 t.offset_first.page_index, t.offset_last.stats.mean, t.offset_first.stats.mean, t.offset_diverges);
    spdlog::info("keyset page {} vs page {}: {:.4f} ms vs {:.4f} ms, flat={}", t.keyset_last.page_index,
                 t.keyset_first.page_index, t.keyset_last.stats.mean, t.keyset_first.stats.mean, t.keyset_flat);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Consolidates structurally identical legacy databases into one target."};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "Migration config (JSON)");
    app.add_option("--policy", o.policy, "Row failure policy, overrides the config")
        ->check(CLI::IsMember({"reject", "abort"}));
    app.add_option("--report", o.report, "Write the load report CSV here (rejects go next to it)");
    app.add_option("--seed", o.seed, "Seed for gen-fixture and bench");
    app.add_option("--jobs", o.jobs, "Steps run concurrently")->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", o.quiet, "Only warnings and errors on stderr");

    auto* plan = app.add_subcommand("plan", "Print the migration plan");
    auto* migrate = app.add_subcommand("migrate", "Run the migration");
    auto* validate = app.add_subcommand("validate", "Check the target for dangling keys and duplicates");
    auto* fixture = app.add_subcommand("gen-fixture", "Write the synthetic three-source fixture");
    fixture->add_option("--out", o.out, "Output directory")->required();
    fixture->add_option("--students-per-source", o.students, "Student rows per source");
    auto* cleanup = app.add_subcommand("cleanup", "Drop key-map and journal tables from the target");
    auto* bench = app.add_subcommand("bench", "Time offset against keyset pagination");
    bench->add_option("--records", o.records, "Table sizes")->delimiter(',');
    bench->add_option("--page-size", o.page_size, "Rows per page")->check(CLI::PositiveNumber);
    bench->add_option("--reps", o.reps, "Timed repetitions per point")->check(CLI::Range(2, 100000));
    bench->add_option("--keyset-bound", o.keyset_bound, "Keyset last/first ratio counted as flat");
    bench->add_option("--out", o.out, "CSV output (stdout when omitted)");
    for (auto* sub : {plan, migrate, validate, fixture, cleanup, bench}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(o.quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*plan) return cmd_plan(o);
        if (*migrate) return cmd_migrate(o);
        if (*validate) return cmd_validate(o);
        if (*fixture) return cmd_gen_fixture(o);
        if (*cleanup) return cmd_cleanup(o);
        if (*bench) return cmd_bench(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
