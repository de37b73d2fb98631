// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/paging.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "dbmerge/error.hpp"

namespace dbmerge::paging {

namespace {

constexpr const char* kColumns = "UserId, UserName, LoweredUserName, Email";

UserRow read_user(sql::Statement& st) {
    return UserRow{st.column_int(0), st.column_text(1), st.column_text(2), st.column_text(3)};
}

void require_page_size(std::size_t page_size) {
    if (page_size == 0) throw Error(ErrorCode::PreconditionError, "page size must be at least 1");
}

} // namespace

void create_user_table(sql::Database& db, std::size_t records, std::uint64_t seed) {
    db.exec(std::string("DROP TABLE IF EXISTS ") + kUserTable);
    db.exec(std::string("CREATE TABLE ") + kUserTable +
            " (UserId INTEGER PRIMARY KEY, UserName TEXT NOT NULL, LoweredUserName TEXT NOT NULL,"
            " Email TEXT NOT NULL, LastActivityDate TEXT NOT NULL)");
    db.exec(std::string("CREATE UNIQUE INDEX idx_users_lowered ON ") + kUserTable + " (LoweredUserName)");

    std::mt19937_64 rng(seed);
    sql::Transaction tx(db);
    auto st = db.prepare(std::string("INSERT INTO ") + kUserTable + " VALUES (?1, ?2, ?3, ?4, ?5)");
    for (std::size_t i = 0; i < records; ++i) {
        // Six random letters, then the row number: unique, and unrelated to
        // insertion order.
        std::string name;
        for (int k = 0; k < 6; ++k) {
            char base = (rng() % 2) ? 'A' : 'a';
            name += static_cast<char>(base + rng() % 26);
        }
        name += std::to_string(i);
        std::string lowered = name;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        char date[11];
        std::snprintf(date, sizeof date, "2024-%02d-%02d", static_cast<int>(1 + rng() % 12),
                      static_cast<int>(1 + rng() % 28));
        st.reset();
        st.bind_all({Value{static_cast<std::int64_t>(i + 1)}, Value{name}, Value{lowered},
                     Value{lowered + "@example.org"}, Value{std::string(date)}});
        st.step();
    }
    tx.commit();
    db.exec(std::string("ANALYZE ") + kUserTable);
}

Pager::Pager(sql::Database& db)
    : offset_(db.prepare(std::string("SELECT ") + kColumns + " FROM " + kUserTable +
                         " ORDER BY LoweredUserName LIMIT ?1 OFFSET ?2")),
      first_(db.prepare(std::string("SELECT ") + kColumns + " FROM " + kUserTable +
                        " ORDER BY LoweredUserName LIMIT ?1")),
      after_(db.prepare(std::string("SELECT ") + kColumns + " FROM " + kUserTable +
                        " WHERE LoweredUserName > ?1 ORDER BY LoweredUserName LIMIT ?2")),
      key_at_(db.prepare(std::string("SELECT LoweredUserName FROM ") + kUserTable +
                         " ORDER BY LoweredUserName LIMIT 1 OFFSET ?1")) {}

std::vector<UserRow> Pager::offset(std::size_t page_index, std::size_t page_size) {
    require_page_size(page_size);
    offset_.reset();
    offset_.bind(1, Value{static_cast<std::int64_t>(page_size)});
    offset_.bind(2, Value{static_cast<std::int64_t>(page_index * page_size)});
    std::vector<UserRow> rows;
    while (offset_.step()) rows.push_back(read_user(offset_));
    return rows;
}

KeysetPage Pager::keyset(const std::optional<std::string>& after_key, std::size_t page_size) {
    require_page_size(page_size);
    sql::Statement& st = after_key ? after_ : first_;
    st.reset();
    if (after_key) {
        st.bind(1, Value{*after_key});
        st.bind(2, Value{static_cast<std::int64_t>(page_size)});
    } else {
        st.bind(1, Value{static_cast<std::int64_t>(page_size)});
    }
    KeysetPage page;
    while (st.step()) page.rows.push_back(read_user(st));
    page.next_after_key = page.rows.empty() ? after_key : std::optional(page.rows.back().lowered_user_name);
    return page;
}

std::optional<std::string> Pager::key_before(std::size_t page_index, std::size_t page_size) {
    if (page_index == 0) return std::nullopt;
    key_at_.reset();
    key_at_.bind(1, Value{static_cast<std::int64_t>(page_index * page_size - 1)});
    if (!key_at_.step()) return std::nullopt;
    return key_at_.column_text(0);
}

std::vector<UserRow> page_offset(sql::Database& db, const PageRequest& req) {
    return Pager(db).offset(req.page_index, req.page_size);
}

KeysetPage page_keyset(sql::Database& db, const PageRequest& req) {
    return Pager(db).keyset(req.after_key, req.page_size);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> sampled_pages(const BenchSpec& spec, std::size_t records) {
    const std::size_t pages = (records + spec.page_size - 1) / spec.page_size;
    std::vector<std::size_t> out;
    for (double f : spec.page_fractions) {
        auto p = static_cast<std::size_t>(std::llround(f * static_cast<double>(pages)));
        p = std::min(p, pages == 0 ? 0 : pages - 1);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Stats summarize(const std::vector<double>& samples) {
    Stats s;
    s.n = samples.size();
    if (s.n == 0) return s;
    double sum = 0;
    for (double x : samples) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double sq = 0;
        for (double x : samples) sq += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(s.n - 1));
    }
    return s;
}

Interval Stats::ci95() const {
    if (n < 2) return {mean, mean};
    boost::math::students_t dist(static_cast<double>(n - 1));
    double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    double half = t * stddev / std::sqrt(static_cast<double>(n));
    return {mean - half, mean + half};
}

const BenchPoint* BenchResult::find(std::string_view strategy, std::size_t records, std::size_t page) const {
    for (const auto& p : points) {
        if (p.strategy == strategy && p.record_count == records && p.page_index == page) return &p;
    }
    return nullptr;
}

std::string BenchResult::to_csv() const {
    std::string out = "strategy,record_count,page_index,mean_ms,stddev_ms\n";
    char buf[160];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f,%.6f\n", p.strategy.c_str(), p.record_count, p.page_index,
                      p.stats.mean, p.stats.stddev);
        out += buf;
    }
    return out;
}

BenchResult bench(const BenchSpec& spec) {
    require_page_size(spec.page_size);
    if (spec.repetitions < 2) throw Error(ErrorCode::PreconditionError, "bench needs at least two repetitions");
    using clock = std::chrono::steady_clock;
    BenchResult result;
    for (std::size_t records : spec.record_counts) {
        if (records == 0) throw Error(ErrorCode::PreconditionError, "record counts must be positive");
        auto db = sql::Database::in_memory();
        create_user_table(db, records, spec.seed);
        Pager pager(db);
        const auto pages = sampled_pages(spec, records);

        for (const char* strategy : {"offset", "keyset"}) {
            const bool keyset = std::string_view(strategy) == "keyset";
            for (std::size_t page : pages) {
                // Locating the seek key is the client's job, so it stays untimed.
                const auto after = keyset ? pager.key_before(page, spec.page_size) : std::nullopt;
                std::vector<double> samples;
                for (std::size_t rep = 0; rep <= spec.repetitions; ++rep) {
                    auto t0 = clock::now();
                    std::size_t got = keyset ? pager.keyset(after, spec.page_size).rows.size()
                                             : pager.offset(page, spec.page_size).size();
                    auto ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
                    if (got == 0) throw Error(ErrorCode::PreconditionError, "sampled page is empty");
                    if (rep > 0) samples.push_back(ms);
                }
                result.points.push_back(BenchPoint{strategy, records, page, summarize(samples)});
            }
        }
    }
    return result;
}

TrendCheck check_trend(const BenchResult& result, std::size_t records, double keyset_bound) {
    auto edge = [&](std::string_view strategy, bool last) {
        const BenchPoint* best = nullptr;
        for (const auto& p : result.points) {
            if (p.strategy != strategy || p.record_count != records) continue;
            if (!best || (last ? p.page_index > best->page_index : p.page_index < best->page_index)) best = &p;
        }
        if (!best) {
            throw Error(ErrorCode::PreconditionError,
                        "no " + std::string(strategy) + " points for " + std::to_string(records) + " records");
        }
        return *best;
    };
    TrendCheck t;
    t.offset_first = edge("offset", false);
    t.offset_last = edge("offset", true);
    t.keyset_first = edge("keyset", false);
    t.keyset_last = edge("keyset", true);
    t.offset_diverges = t.offset_last.stats.mean > t.offset_first.stats.mean &&
                        !t.offset_last.stats.ci95().overlaps(t.offset_first.stats.ci95());
    t.keyset_flat = t.keyset_last.stats.ci95().overlaps(t.keyset_first.stats.ci95()) ||
                    t.keyset_last.stats.mean <= keyset_bound * t.keyset_first.stats.mean;
    return t;
}

} // namespace dbmerge::paging
