// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "dbmerge/config.hpp"
#include "dbmerge/error.hpp"
#include "dbmerge/fixture.hpp"
#include "dbmerge/pipeline.hpp"
#include "support.hpp"

namespace dbmerge {
namespace {

using nlohmann::json;
using testing::count_rows;
using testing::TempDir;

const std::vector<std::string> kFixtureOrder = {"StudyCycle", "Faculty",  "Nationality",      "Course",
                                                "Programme",  "Student", "ProgrammesCourses"};

MigrationConfig fixture_in(const TempDir& dir, std::size_t students, std::uint64_t seed = 7) {
    gen_fixture(FixtureSpec{dir.path(), students, seed});
    return load_config_file(dir / "migration.json");
}

std::string target_dump(const MigrationConfig& cfg) {
    auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadOnly);
    return dump_sql(db);
}

TEST(Plan, FixtureOrder) {
    TempDir dir;
    MigrationPlan plan = compile_plan(fixture_in(dir, 5));
    EXPECT_EQ(plan.tables(), kFixtureOrder);
    EXPECT_EQ(plan.find("StudyCycle")->kind, StepKind::Seed);
    EXPECT_EQ(plan.find("Nationality")->kind, StepKind::Lookup);
    EXPECT_EQ(plan.find("Faculty")->mode.kind, LoadModeKind::PreserveKeys);
    EXPECT_EQ(plan.find("Student")->depends_on, (std::vector<std::string>{"Faculty", "Nationality", "StudyCycle"}));
    EXPECT_TRUE(plan.find("Course")->backfill);
    EXPECT_FALSE(plan.find("Faculty")->backfill);
    EXPECT_NE(plan.to_text().find("1. StudyCycle [seed]"), std::string::npos);
}

TEST(Plan, ExplicitOrderKeptWhenValid) {
    TempDir dir;
    gen_fixture(FixtureSpec{dir.path(), 5, 7});
    json doc = json::parse(std::ifstream(dir / "migration.json"));
    std::vector<std::string> order{"StudyCycle", "Nationality", "Faculty", "Programme",
                                   "Course",     "ProgrammesCourses", "Student"};
    doc["steps"] = order;
    EXPECT_EQ(compile_plan(parse_config(doc, dir.path())).tables(), order);

    doc["steps"] = {"StudyCycle", "Nationality", "Course", "Faculty", "Programme", "ProgrammesCourses", "Student"};
    try {
        compile_plan(parse_config(doc, dir.path()));
        FAIL() << "order with Course before Faculty accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigValidationError);
    }
    doc["steps"] = {"StudyCycle", "Faculty"};
    EXPECT_THROW(compile_plan(parse_config(doc, dir.path())), Error);
}

TEST(Plan, UncoveredForeignKeyIsRejected) {
    TempDir dir;
    gen_fixture(FixtureSpec{dir.path(), 5, 7});
    json doc = json::parse(std::ifstream(dir / "migration.json"));
    doc["tables"]["Course"]["rules"] = json::array();
    try {
        compile_plan(parse_config(doc, dir.path()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigValidationError);
        EXPECT_NE(e.detail().find("FacultyID"), std::string::npos);
    }
}

TEST(Run, FixtureConservesRowsAndVerifiesClean) {
    TempDir dir;
    MigrationConfig cfg = fixture_in(dir, 200);
    auto manifest = FixtureManifest::from_json(json::parse(std::ifstream(dir / "manifest.json")));
    RunResult r = run(compile_plan(cfg), cfg);
    EXPECT_EQ(r.exit_code(), 0) << r.report.to_text();
    EXPECT_TRUE(r.report.reconciles());
    EXPECT_TRUE(r.integrity.clean()) << r.integrity.to_text();
    const TableReport* s = r.report.find("Student");
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->extracted, 600u);
    EXPECT_EQ(s->loaded, manifest.expected_students());
    EXPECT_EQ(s->rejected, manifest.dirty_students());
    EXPECT_EQ(r.report.find("Faculty")->loaded, manifest.faculty_ids.size());
    EXPECT_EQ(r.report.find("StudyCycle")->loaded, 3u);
    std::vector<std::string> order;
    for (const auto& [name, _] : r.report.tables) order.push_back(name);
    EXPECT_EQ(order, kFixtureOrder);
}

TEST(Run, EmptySourcesLoadNothing) {
    TempDir dir;
    MigrationConfig cfg = fixture_in(dir, 0);
    for (const auto& src : cfg.sources) {
        auto db = sql::Database::open(src.path, sql::Database::Mode::ReadWrite);
        for (const auto& [name, _] : cfg.source_schema.tables()) db.exec("DELETE FROM " + sql::quote_ident(name));
    }
    RunResult r = run(compile_plan(cfg), cfg);
    EXPECT_EQ(r.exit_code(), 0);
    for (const auto& [name, t] : r.report.tables) {
        if (name == "StudyCycle") continue; // seeded from the config
        EXPECT_EQ(t.extracted, 0u) << name;
        EXPECT_EQ(t.loaded, 0u) << name;
        EXPECT_EQ(t.rejected, 0u) << name;
    }
}

TEST(Run, UnreachableDatabasesFailBeforeAnyStep) {
    TempDir dir;
    MigrationConfig cfg = fixture_in(dir, 5);
    MigrationPlan plan = compile_plan(cfg);
    MigrationConfig bad_target = cfg;
    bad_target.target = dir / "no" / "such" / "dir" / "t.db";
    try {
        run(plan, bad_target);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConnectionError);
    }
    MigrationConfig bad_source = cfg;
    bad_source.sources[1].path = dir / "missing.db";
    try {
        run(plan, bad_source);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConnectionError);
    }
    auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadOnly);
    EXPECT_EQ(count_rows(db, "StudyCycle"), 0);
}

TEST(Run, AbortThenResume) {
    TempDir fresh_dir;
    MigrationConfig fresh = fixture_in(fresh_dir, 100);
    RunResult baseline = run(compile_plan(fresh), fresh);
    ASSERT_EQ(baseline.exit_code(), 0);

    TempDir dir;
    MigrationConfig cfg = fixture_in(dir, 100);
    MigrationPlan plan = compile_plan(cfg);
    RunOptions abort_opts;
    abort_opts.policy = RowPolicy::Abort;
    RunResult aborted = run(plan, cfg, abort_opts);
    EXPECT_TRUE(aborted.report.aborted);
    EXPECT_NE(aborted.report.abort_cause.find("Student"), std::string::npos) << aborted.report.abort_cause;
    EXPECT_EQ(aborted.exit_code(), 1);
    {
        auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadOnly);
        EXPECT_EQ(count_rows(db, "Student"), 0);
        EXPECT_GT(count_rows(db, "Course"), 0);
        EXPECT_EQ(count_rows(db, std::string(kStepJournal)), 5);
    }

    RunResult resumed = run(plan, cfg);
    EXPECT_EQ(resumed.exit_code(), 0);
    EXPECT_TRUE(resumed.report.find("Faculty")->resumed);
    EXPECT_TRUE(resumed.report.find("Programme")->resumed);
    EXPECT_FALSE(resumed.report.find("Student")->resumed);
    EXPECT_EQ(resumed.report.to_csv(), baseline.report.to_csv());
    EXPECT_EQ(target_dump(cfg), target_dump(fresh));

    RunResult again = run(plan, cfg); // everything journaled: nothing new
    EXPECT_EQ(again.report.to_csv(), baseline.report.to_csv());
    EXPECT_EQ(target_dump(cfg), target_dump(fresh));
}

TEST(Run, ParallelStepsMatchSerialRun) {
    TempDir a;
    TempDir b;
    MigrationConfig ca = fixture_in(a, 150);
    MigrationConfig cb = fixture_in(b, 150);
    RunOptions serial;
    RunOptions parallel;
    parallel.jobs = 4;
    RunResult ra = run(compile_plan(ca), ca, serial);
    RunResult rb = run(compile_plan(cb), cb, parallel);
    EXPECT_EQ(ra.report.to_csv(), rb.report.to_csv());
    EXPECT_EQ(ra.report.rejects_csv(), rb.report.rejects_csv());
    EXPECT_EQ(target_dump(ca), target_dump(cb));
}

// Two sources of a department/employee layout. Employees reference their
// manager in the same table, and the e-mail column moves to a table of its
// own.
json split_config(const TempDir& dir) {
    json source = json::parse(R"({"tables": [
      {"name": "Dept", "primaryKey": "ID", "columns": [
        {"name": "ID", "dataKind": "integer", "nullable": false}, {"name": "Name", "dataKind": "text"}]},
      {"name": "Employee", "primaryKey": "ID", "columns": [
        {"name": "ID", "dataKind": "integer", "nullable": false}, {"name": "DeptID", "dataKind": "integer"},
        {"name": "ManagerID", "dataKind": "integer"}, {"name": "Name", "dataKind": "text"},
        {"name": "Email", "dataKind": "text"}],
       "foreignKeys": [{"fromColumn": "DeptID", "toTable": "Dept", "toColumn": "ID"},
                       {"fromColumn": "ManagerID", "toTable": "Employee", "toColumn": "ID"}]}]})");
    json target = json::parse(R"({"tables": [
      {"name": "Dept", "primaryKey": "ID", "columns": [
        {"name": "ID", "dataKind": "integer", "nullable": false, "isIdentity": true},
        {"name": "Name", "dataKind": "text"}]},
      {"name": "Employee", "primaryKey": "ID", "columns": [
        {"name": "ID", "dataKind": "integer", "nullable": false, "isIdentity": true},
        {"name": "DeptID", "dataKind": "integer"}, {"name": "ManagerID", "dataKind": "integer"},
        {"name": "Name", "dataKind": "text"}],
       "foreignKeys": [{"fromColumn": "DeptID", "toTable": "Dept", "toColumn": "ID"},
                       {"fromColumn": "ManagerID", "toTable": "Employee", "toColumn": "ID"}]},
      {"name": "EmployeeContact", "primaryKey": "ContactID", "columns": [
        {"name": "ContactID", "dataKind": "integer", "nullable": false, "isIdentity": true},
        {"name": "ID", "dataKind": "integer", "nullable": false}, {"name": "Email", "dataKind": "text"}],
       "foreignKeys": [{"fromColumn": "ID", "toTable": "Employee", "toColumn": "ID"}]}]})");

    for (int dbid = 1; dbid <= 2; ++dbid) {
        auto db = sql::Database::open(dir / ("s" + std::to_string(dbid) + ".db"), sql::Database::Mode::Create);
        db.exec(sqlite_ddl(parse_schema(source)));
        std::string p = "e" + std::to_string(dbid) + "_";
        db.exec("INSERT INTO Dept VALUES (1, 'd" + std::to_string(dbid) + "');");
        // Managers listed after their reports, ids overlap across sources.
        db.exec("INSERT INTO Employee VALUES (5, 1, 9, '" + p + "5', '" + p + "5@x'), (7, 1, 5, '" + p + "7', '" + p +
                "7@x'), (9, 1, NULL, '" + p + "9', '" + p + "9@x');");
    }
    {
        auto db = sql::Database::open(dir / "target.db", sql::Database::Mode::Create);
        db.exec(sqlite_ddl(parse_schema(target)));
    }
    json cfg;
    cfg["sources"] = {{{"path", "s1.db"}, {"dbid", 1}, {"label", "one"}},
                      {{"path", "s2.db"}, {"dbid", 2}, {"label", "two"}}};
    cfg["target"] = "target.db";
    cfg["sourceSchema"] = source;
    cfg["targetSchema"] = target;
    cfg["tables"]["Dept"] = json::object();
    cfg["tables"]["Employee"]["rules"] = json::array(
        {{{"kind", "splitTable"}, {"into", "EmployeeContact"}, {"columns", {"Email"}}, {"carriedKey", "ID"}},
         {{"kind", "remapForeignKey"}, {"column", "DeptID"}, {"references", "Dept"}}});
    return cfg;
}

TEST(Run, SplitTableAndSelfReference) {
    TempDir dir;
    MigrationConfig cfg = parse_config(split_config(dir), dir.path());
    MigrationPlan plan = compile_plan(cfg);
    const PlanStep* emp = plan.find("Employee");
    ASSERT_NE(emp, nullptr);
    ASSERT_EQ(emp->secondary.size(), 1u);
    EXPECT_EQ(emp->secondary[0].table, "EmployeeContact");
    EXPECT_EQ(emp->deferred_columns, std::vector<std::string>{"ManagerID"});

    RunResult r = run(plan, cfg);
    EXPECT_EQ(r.exit_code(), 0) << r.report.to_text() << r.integrity.to_text();
    EXPECT_EQ(r.report.find("EmployeeContact")->loaded, 6u);

    auto db = sql::Database::open(cfg.target, sql::Database::Mode::ReadOnly);
    auto names = testing::id_to_text(db, "Employee", "Name");
    std::map<std::string, std::string> manager_of;
    auto st = db.prepare("SELECT e.Name, m.Name FROM Employee e LEFT JOIN Employee m ON m.ID = e.ManagerID");
    while (st.step()) manager_of[st.column_text(0)] = st.is_null(1) ? "" : st.column_text(1);
    for (std::string p : {"e1_", "e2_"}) {
        EXPECT_EQ(manager_of.at(p + "5"), p + "9");
        EXPECT_EQ(manager_of.at(p + "7"), p + "5");
        EXPECT_EQ(manager_of.at(p + "9"), "");
    }
    auto mail = db.prepare("SELECT e.Name, c.Email FROM EmployeeContact c JOIN Employee e ON e.ID = c.ID");
    int n = 0;
    while (mail.step()) {
        EXPECT_EQ(mail.column_text(0) + "@x", mail.column_text(1));
        ++n;
    }
    EXPECT_EQ(n, 6);
}

TEST(Plan, SplitTableRestrictions) {
    TempDir dir;
    const json base = split_config(dir);
    json doc = base;
    doc["tables"]["EmployeeContact"] = json::object();
    EXPECT_THROW(compile_plan(parse_config(doc, dir.path())), Error);

    json doc2 = base;
    doc2["tables"]["Employee"]["rules"][0]["carriedKey"] = "DeptID";
    EXPECT_THROW(compile_plan(parse_config(doc2, dir.path())), Error);
}

} // namespace
} // namespace dbmerge
