// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/fixture.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "dbmerge/error.hpp"
#include "dbmerge/load.hpp"

namespace dbmerge {

namespace {

using nlohmann::json;

json column(const char* name, const char* kind, bool nullable = true) {
    return {{"name", name}, {"dataKind", kind}, {"nullable", nullable}};
}

json identity(const char* name = "ID") {
    return {{"name", name}, {"dataKind", "integer"}, {"nullable", false}, {"isIdentity", true}};
}

json fk(const char* from, const char* to) { return {{"fromColumn", from}, {"toTable", to}, {"toColumn", "ID"}}; }

json table(const char* name, json columns, json fks = json::array()) {
    return {{"name", name}, {"columns", std::move(columns)}, {"primaryKey", "ID"}, {"foreignKeys", std::move(fks)}};
}

json source_schema_doc() {
    json tables = json::array();
    tables.push_back(table("Faculty", {identity(), column("Name", "text", false)}));
    tables.push_back(table("Programme",
                           {identity(), column("FacultyID", "integer", false), column("Name", "text", false),
                            column("Code", "text")},
                           {fk("FacultyID", "Faculty")}));
    tables.push_back(table("Course",
                           {identity(), column("FacultyID", "integer", false), column("Name", "text", false),
                            column("Credits", "integer")},
                           {fk("FacultyID", "Faculty")}));
    tables.push_back(table("ProgrammesCourses",
                           {identity(), column("ProgrammeID", "integer", false), column("CourseID", "integer", false)},
                           {fk("ProgrammeID", "Programme"), fk("CourseID", "Course")}));
    json tuition = column("Tuition", "decimal");
    tuition["scale"] = 2;
    json tax = column("TaxRate", "decimal");
    tax["scale"] = 4;
    tables.push_back(table("Student",
                           {identity(), column("FacultyID", "integer", false), column("FullName", "text", false),
                            column("Gender", "integer"), column("Nationality", "text"), column("EmbgNumber", "text"),
                            column("Year", "integer"), tuition, tax},
                           {fk("FacultyID", "Faculty")}));
    tables.push_back(table("Teacher", {identity(), column("FullName", "text", false), column("Nationality", "text")}));
    return {{"tables", tables}};
}

json target_schema_doc() {
    json tables = json::array();
    tables.push_back(table("StudyCycle", {identity(), column("Name", "text", false)}));
    tables.push_back(table("Faculty", {identity(), column("Name", "text", false)}));
    tables.push_back(table("Nationality", {identity(), column("Name", "text", false)}));
    tables.push_back(table("Programme",
                           {identity(), column("FacultyID", "integer", false), column("Name", "text", false),
                            column("StudyCycleID", "integer", false)},
                           {fk("FacultyID", "Faculty"), fk("StudyCycleID", "StudyCycle")}));
    tables.push_back(table("Course",
                           {identity(), column("FacultyID", "integer", false), column("Name", "text", false),
                            column("Credits", "integer"), column("StudyCycleID", "integer", false)},
                           {fk("FacultyID", "Faculty"), fk("StudyCycleID", "StudyCycle")}));
    tables.push_back(table("ProgrammesCourses",
                           {identity(), column("ProgrammeID", "integer", false), column("CourseID", "integer", false)},
                           {fk("ProgrammeID", "Programme"), fk("CourseID", "Course")}));
    json tuition = column("Tuition", "decimal");
    tuition["scale"] = 2;
    json after_tax = column("TuitionAfterTax", "decimal");
    after_tax["scale"] = 2;
    tables.push_back(table("Student",
                           {identity(), column("FacultyID", "integer", false), column("FirstName", "text", false),
                            column("LastName", "text"), column("Gender", "text", false),
                            column("NationalityID", "integer"), column("EmbgNumber", "text", false),
                            column("Year", "integer", false), tuition, after_tax,
                            column("StudyCycleID", "integer", false)},
                           {fk("FacultyID", "Faculty"), fk("NationalityID", "Nationality"),
                            fk("StudyCycleID", "StudyCycle")}));
    return {{"tables", tables}};
}

constexpr std::array<std::int64_t, 12> kFacultyIds = {1, 2, 5, 9, 10, 13, 17, 18, 22, 25, 30, 31};
constexpr std::array<const char*, 12> kFacultyNames = {
    "Faculty of Computer Science and Engineering",
    "Faculty of Electrical Engineering",
    "Faculty of Mechanical Engineering",
    "Faculty of Law",
    "Faculty of Economics",
    "Faculty of Medicine",
    "Faculty of Philosophy",
    "Faculty of Philology",
    "Faculty of Natural Sciences and Mathematics",
    "Faculty of Architecture",
    "Faculty of Civil Engineering",
    "Faculty of Dentistry",
};
constexpr std::array<const char*, 12> kSubjects = {
    "Software Engineering", "Computer Networks", "Informatics",     "Power Systems",
    "Mechatronics",         "Business Law",      "Finance",         "General Medicine",
    "English Language",     "Mathematics",       "Urban Design",    "Structural Engineering",
};
constexpr std::array<const char*, 3> kCycleSuffix = {"(BSc)", "(MSc)", "(PhD)"};
constexpr std::array<const char*, 3> kCycleNames = {"First cycle", "Second cycle", "Third cycle"};
constexpr std::array<const char*, 15> kTopics = {
    "Algorithms", "Databases",  "Calculus",   "Physics",     "Statistics",
    "Economics",  "Anatomy",    "Grammar",    "Programming", "Electronics",
    "Mechanics",  "Accounting", "Civil Law",  "Geometry",    "Operating Systems",
};
constexpr std::array<const char*, 20> kFirstNames = {
    "Ana",   "Marko", "Elena",  "Petar", "Ivana", "Nikola", "Sara",  "Stefan", "Marija", "Aleksandar",
    "Jovana", "Filip", "Teodora", "David", "Mila",  "Luka",   "Eva",   "Bojan",  "Kristina", "Goran",
};
constexpr std::array<const char*, 20> kLastNames = {
    "Petrovski", "Nikolovska", "Stojanovski", "Trajkovska", "Georgievski", "Ristovska", "Dimitrov",
    "Angelovska", "Jovanovski", "Kostovska",  "Ilievski",   "Pavlovska",   "Todorov",   "Mitrevska",
    "Spasovski", "Zdravkovska", "Hoxha",      "Berisha",    "Yilmaz",      "Demir",
};
constexpr std::array<const char*, 8> kNationalities = {
    "Macedonian", "Albanian", "Turkish", "Serbian", "Roma", "Bosniak", "Vlach", "Croatian",
};
constexpr std::array<const char*, 4> kTuitions = {"600.00", "900.00", "1200.00", "1500.50"};
constexpr std::array<const char*, 3> kTaxRates = {"0.18", "0.05", "0"};

/// Seeded draws. Bounded values come from a plain modulo so the sequence
/// is identical on every standard library.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    std::uint64_t below(std::uint64_t n) { return rng_() % n; }
    template <typename T, std::size_t N>
    const T& pick(const std::array<T, N>& a) {
        return a[below(N)];
    }

private:
    std::mt19937_64 rng_;
};

std::string noisy(Draw& d, std::string value) {
    switch (d.below(10)) {
    case 0: std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::tolower(c); }); break;
    case 1: std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::toupper(c); }); break;
    case 2: value = "  " + value; break;
    case 3: value += " "; break;
    default: break;
    }
    return value;
}

Value nationality(Draw& d) {
    std::uint64_t r = d.below(100);
    if (r < 5) return Value{};
    if (r < 7) return Value{std::string("  ")};
    return Value{noisy(d, d.pick(kNationalities))};
}

void insert(sql::Database& db, const std::string& table, const std::vector<std::string>& columns,
            const std::vector<std::vector<Value>>& rows) {
    std::string sql = "INSERT INTO " + sql::quote_ident(table) + " (";
    std::string params;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        sql += (i ? ", " : "") + sql::quote_ident(columns[i]);
        params += i ? ", ?" : "?";
    }
    auto st = db.prepare(sql + ") VALUES (" + params + ")");
    for (const auto& row : rows) {
        st.reset();
        st.bind_all(row);
        st.step();
    }
}

FixtureSource write_source(const std::filesystem::path& path, int dbid, std::size_t students, Draw& d,
                           const SchemaModel& schema) {
    FixtureSource out;
    out.dbid = dbid;
    out.label = "saa_" + std::to_string(dbid);
    out.file = path.filename().string();
    out.students = students;

    auto db = sql::Database::open(path, sql::Database::Mode::Create);
    db.exec(sqlite_ddl(schema));
    sql::Transaction tx(db);

    std::vector<std::vector<Value>> rows;
    for (std::size_t i = 0; i < kFacultyIds.size(); ++i) {
        rows.push_back({Value{kFacultyIds[i]}, Value{std::string(kFacultyNames[i])}});
    }
    insert(db, "Faculty", {"ID", "Name"}, rows);

    auto faculty = [&] { return Value{d.pick(kFacultyIds)}; };
    const std::size_t programmes = 10;
    const std::size_t courses = 30;

    rows.clear();
    std::vector<std::size_t> subjects(kSubjects.size());
    std::iota(subjects.begin(), subjects.end(), 0);
    for (std::size_t i = 0; i < programmes; ++i) {
        std::swap(subjects[i], subjects[i + d.below(subjects.size() - i)]);
        std::string name = std::string(kSubjects[subjects[i]]) + " " + kCycleSuffix[(dbid - 1) % 3];
        std::string code = std::string(1, static_cast<char>('A' + subjects[i])) + std::to_string(dbid);
        rows.push_back({Value{static_cast<std::int64_t>(i + 1)}, faculty(), Value{name}, Value{code}});
    }
    insert(db, "Programme", {"ID", "FacultyID", "Name", "Code"}, rows);

    rows.clear();
    for (std::size_t i = 0; i < courses; ++i) {
        std::string name = std::string(kTopics[i % kTopics.size()]) + (i < kTopics.size() ? " I" : " II");
        rows.push_back({Value{static_cast<std::int64_t>(i + 1)}, faculty(), Value{name},
                        Value{static_cast<std::int64_t>(3 + d.below(6))}});
    }
    insert(db, "Course", {"ID", "FacultyID", "Name", "Credits"}, rows);

    rows.clear();
    std::int64_t link = 1;
    for (std::size_t p = 0; p < programmes; ++p) {
        std::vector<std::int64_t> pool(courses);
        std::iota(pool.begin(), pool.end(), 1);
        for (std::size_t k = 0; k < 6; ++k) {
            std::swap(pool[k], pool[k + d.below(pool.size() - k)]);
            rows.push_back({Value{link++}, Value{static_cast<std::int64_t>(p + 1)}, Value{pool[k]}});
        }
    }
    insert(db, "ProgrammesCourses", {"ID", "ProgrammeID", "CourseID"}, rows);

    rows.clear();
    for (std::size_t i = 0; i < students; ++i) {
        std::string full = d.pick(kFirstNames);
        full += std::string(" ") + d.pick(kLastNames);
        Value gender{static_cast<std::int64_t>(1 + d.below(2))};
        Value nat = nationality(d);
        std::string embg;
        for (int k = 0; k < 13; ++k) embg += static_cast<char>('0' + d.below(10));
        Value embg_v{embg};
        Value year{static_cast<std::int64_t>(1 + d.below(4))};
        Value tuition{std::string(d.pick(kTuitions))};
        Value tax{std::string(d.pick(kTaxRates))};
        switch (d.below(100)) {
        case 0:
            gender = Value{std::int64_t{7}};
            ++out.dirty.unknown_gender;
            break;
        case 1:
            embg_v = Value{};
            ++out.dirty.null_embg;
            break;
        case 2:
            year = Value{std::string("n/a")};
            ++out.dirty.bad_year;
            break;
        default: break;
        }
        rows.push_back({Value{static_cast<std::int64_t>(i + 1)}, faculty(), Value{full}, gender, nat, embg_v, year,
                        tuition, tax});
    }
    insert(db, "Student",
           {"ID", "FacultyID", "FullName", "Gender", "Nationality", "EmbgNumber", "Year", "Tuition", "TaxRate"}, rows);

    rows.clear();
    for (std::size_t i = 0; i < 10; ++i) {
        std::string full = d.pick(kFirstNames);
        full += std::string(" ") + d.pick(kLastNames);
        Value nat = i == 0 ? Value{noisy(d, "Slovenian")} : nationality(d);
        rows.push_back({Value{static_cast<std::int64_t>(i + 1)}, Value{full}, nat});
    }
    insert(db, "Teacher", {"ID", "FullName", "Nationality"}, rows);
    tx.commit();
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
}

void remove_db(const std::filesystem::path& path) {
    std::error_code ec;
    for (const char* suffix : {"", "-journal", "-wal", "-shm"}) {
        std::filesystem::remove(path.string() + suffix, ec);
    }
}

std::string sql_literal(sql::Statement& st, int col) {
    Value v = st.column_value(col);
    if (is_null(v)) return "NULL";
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<Decimal>(&v)) return d->to_string();
    std::string s = to_display(v);
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

} // namespace

std::size_t FixtureManifest::dirty_students() const {
    std::size_t n = 0;
    for (const auto& s : sources) n += s.dirty.total();
    return n;
}

std::size_t FixtureManifest::expected_students() const {
    std::size_t n = 0;
    for (const auto& s : sources) n += s.students;
    return n - dirty_students();
}

json FixtureManifest::to_json() const {
    json srcs = json::array();
    for (const auto& s : sources) {
        srcs.push_back({{"dbid", s.dbid},
                        {"label", s.label},
                        {"file", s.file},
                        {"students", s.students},
                        {"dirty",
                         {{"unknownGender", s.dirty.unknown_gender},
                          {"nullEmbgNumber", s.dirty.null_embg},
                          {"uncoercibleYear", s.dirty.bad_year}}}});
    }
    return {{"seed", seed},
            {"studentsPerSource", students_per_source},
            {"sources", srcs},
            {"facultyIds", faculty_ids},
            {"target", target_file},
            {"dirtyStudents", dirty_students()},
            {"expectedStudents", expected_students()}};
}

FixtureManifest FixtureManifest::from_json(const json& j) {
    try {
        FixtureManifest m;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.students_per_source = j.at("studentsPerSource").get<std::size_t>();
        m.faculty_ids = j.at("facultyIds").get<std::vector<std::int64_t>>();
        m.target_file = j.at("target").get<std::string>();
        for (const auto& s : j.at("sources")) {
            FixtureSource fs;
            fs.dbid = s.at("dbid").get<int>();
            fs.label = s.at("label").get<std::string>();
            fs.file = s.at("file").get<std::string>();
            fs.students = s.at("students").get<std::size_t>();
            const auto& d = s.at("dirty");
            fs.dirty.unknown_gender = d.at("unknownGender").get<std::size_t>();
            fs.dirty.null_embg = d.at("nullEmbgNumber").get<std::size_t>();
            fs.dirty.bad_year = d.at("uncoercibleYear").get<std::size_t>();
            m.sources.push_back(std::move(fs));
        }
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, std::string("manifest: ") + e.what());
    }
}

SchemaModel fixture_source_schema() { return parse_schema(source_schema_doc()); }
SchemaModel fixture_target_schema() { return parse_schema(target_schema_doc()); }

json fixture_config() {
    json sources = json::array();
    json value_by_source = json::object();
    json cycles = json::array();
    for (int dbid = 1; dbid <= kFixtureSources; ++dbid) {
        sources.push_back({{"path", "saa_" + std::to_string(dbid) + ".db"}, {"dbid", dbid},
                           {"label", "saa_" + std::to_string(dbid)}});
        value_by_source[std::to_string(dbid)] = dbid;
        cycles.push_back({{"ID", dbid}, {"Name", kCycleNames[dbid - 1]}});
    }
    auto remap = [](const char* column, const char* references) {
        return json{{"kind", "remapForeignKey"}, {"column", column}, {"references", references}};
    };
    json student_rules = json::array({
        {{"kind", "translateCoded"},
         {"column", "Gender"},
         {"map", json::array({{{"from", 1}, {"to", "M"}}, {{"from", 2}, {"to", "F"}}})},
         {"unknownPolicy", "rejectRow"}},
        {{"kind", "splitColumn"}, {"column", "FullName"}, {"into", json::array({"FirstName", "LastName"})}, {"delimiter", " "}},
        {{"kind", "joinLookup"}, {"column", "Nationality"}, {"lookupTable", "Nationality"}, {"produce", "NationalityID"}},
        {{"kind", "validateRow"},
         {"checks", json::array({{{"check", "notNull"}, {"column", "EmbgNumber"}},
                                 {{"check", "range"}, {"column", "Year"}, {"min", 1}, {"max", 6}}})}},
        {{"kind", "deriveColumn"}, {"target", "TuitionAfterTax"}, {"expression", "Tuition * (1 + TaxRate)"}},
        {{"kind", "selectColumns"},
         {"columns", json::array({"ID", "FacultyID", "FirstName", "LastName", "Gender", "NationalityID",
                                   "EmbgNumber", "Year", "Tuition", "TuitionAfterTax"})}},
        remap("FacultyID", "Faculty"),
    });
    json tables = {
        {"Faculty", {{"mode", "preserveKeys"}, {"sources", json::array({1})}}},
        {"Nationality",
         {{"lookup",
           {{"sourceColumns", json::array({{{"table", "Student"}, {"column", "Nationality"}},
                                           {{"table", "Teacher"}, {"column", "Nationality"}}})},
            {"valueColumn", "Name"},
            {"normalization", {{"trimWhitespace", true}, {"caseFoldKey", true}}}}}}},
        {"Programme",
         {{"extract", {{"columns", json::array({"ID", "FacultyID", "Name"})}}}, {"rules", json::array({remap("FacultyID", "Faculty")})}}},
        {"Course", {{"rules", json::array({remap("FacultyID", "Faculty")})}}},
        {"Student", {{"rules", student_rules}}},
        {"ProgrammesCourses",
         {{"rules", json::array({remap("ProgrammeID", "Programme"), remap("CourseID", "Course")})}}},
    };
    return {{"sources", sources},
            {"target", "iknow.db"},
            {"sourceSchema", "source_schema.json"},
            {"targetSchema", "target_schema.json"},
            {"policy", "reject"},
            {"batchSize", 500},
            {"discriminator",
             {{"table", "StudyCycle"}, {"column", "StudyCycleID"}, {"valueBySource", value_by_source}, {"rows", cycles}}},
            {"tables", tables}};
}

FixtureManifest gen_fixture(const FixtureSpec& spec) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw Error(ErrorCode::IOError, "cannot create " + spec.out_dir.string() + ": " + ec.message());

    const SchemaModel source = fixture_source_schema();
    const SchemaModel target = fixture_target_schema();

    FixtureManifest manifest;
    manifest.seed = spec.seed;
    manifest.students_per_source = spec.students_per_source;
    manifest.faculty_ids.assign(kFacultyIds.begin(), kFacultyIds.end());
    manifest.target_file = "iknow.db";

    Draw draw(spec.seed);
    for (int dbid = 1; dbid <= kFixtureSources; ++dbid) {
        const auto path = spec.out_dir / ("saa_" + std::to_string(dbid) + ".db");
        remove_db(path);
        manifest.sources.push_back(write_source(path, dbid, spec.students_per_source, draw, source));
        auto db = sql::Database::open(path, sql::Database::Mode::ReadOnly);
        write_text(spec.out_dir / ("saa_" + std::to_string(dbid) + ".sql"), dump_sql(db));
    }

    const auto target_path = spec.out_dir / manifest.target_file;
    remove_db(target_path);
    {
        auto db = sql::Database::open(target_path, sql::Database::Mode::Create);
        db.exec(sqlite_ddl(target));
        write_text(spec.out_dir / "iknow.sql", dump_sql(db));
    }

    write_text(spec.out_dir / "source_schema.json", schema_to_json(source).dump(2) + "\n");
    write_text(spec.out_dir / "target_schema.json", schema_to_json(target).dump(2) + "\n");
    write_text(spec.out_dir / "migration.json", fixture_config().dump(2) + "\n");
    write_text(spec.out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

std::string dump_sql(sql::Database& db) {
    std::string out;
    for (const auto& name : db.table_names()) {
        auto ddl = db.prepare("SELECT sql FROM sqlite_master WHERE type = 'table' AND name = ?1");
        ddl.bind(1, Value{name});
        if (ddl.step()) out += ddl.column_text(0) + ";\n";
        auto cols = db.column_names(name);
        std::string order;
        for (std::size_t i = 0; i < cols.size(); ++i) order += (i ? ", " : "") + std::to_string(i + 1);
        auto st = db.prepare("SELECT * FROM " + sql::quote_ident(name) + " ORDER BY " + order);
        while (st.step()) {
            out += "INSERT INTO " + sql::quote_ident(name) + " VALUES (";
            for (int c = 0; c < st.column_count(); ++c) out += (c ? ", " : "") + sql_literal(st, c);
            out += ");\n";
        }
    }
    return out;
}

} // namespace dbmerge
