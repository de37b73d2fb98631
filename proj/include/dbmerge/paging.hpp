// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbmerge/sqlite.hpp"

namespace dbmerge::paging {

inline constexpr const char* kUserTable = "aspnet_Users";

struct UserRow {
    std::int64_t user_id = 0;
    std::string user_name;
    /// Unique, indexed order key.
    std::string lowered_user_name;
    std::string email;

    bool operator==(const UserRow&) const = default;
};

struct PageRequest {
    std::size_t page_index = 0;
    std::size_t page_size = 10;
    /// Keyset mode: last key of the previous page; nullopt for the first page.
    std::optional<std::string> after_key;
};

struct KeysetPage {
    std::vector<UserRow> rows;
    /// Last key returned, or the request's after_key when the page is empty.
    std::optional<std::string> next_after_key;
};

/// Creates and fills the user table with `records` seeded rows. Insertion
/// order differs from key order so the index does real work.
void create_user_table(sql::Database& db, std::size_t records, std::uint64_t seed = 7);

/// Rows [index * size, index * size + size) of the key order. Past the end
/// yields an empty page. Throws Error(PreconditionError) for page_size 0.
std::vector<UserRow> page_offset(sql::Database& db, const PageRequest& req);

/// The page_size rows whose key is strictly greater than after_key.
KeysetPage page_keyset(sql::Database& db, const PageRequest& req);

/// Prepared statements for both strategies, reused across calls.
class Pager {
public:
    explicit Pager(sql::Database& db);

    std::vector<UserRow> offset(std::size_t page_index, std::size_t page_size);
    KeysetPage keyset(const std::optional<std::string>& after_key, std::size_t page_size);
    /// Key of the last row on the page before `page_index` (nullopt for 0).
    std::optional<std::string> key_before(std::size_t page_index, std::size_t page_size);

private:
    sql::Statement offset_;
    sql::Statement first_;
    sql::Statement after_;
    sql::Statement key_at_;
};

struct BenchSpec {
    std::vector<std::size_t> record_counts = {1000, 10000, 100000};
    /// Sampled pages, as fractions of each table's page count.
    std::vector<double> page_fractions = {0.0, 0.01, 0.1, 0.5, 0.99};
    std::size_t page_size = 10;
    std::size_t repetitions = 30;
    /// Keyset last/first mean ratio still counted as flat.
    double keyset_bound = 3.0;
    std::uint64_t seed = 7;
};

/// Page indices sampled for a table of `records` rows.
std::vector<std::size_t> sampled_pages(const BenchSpec& spec, std::size_t records);

struct Interval {
    double low = 0;
    double high = 0;

    bool overlaps(const Interval& o) const { return low <= o.high && o.low <= high; }
};

struct Stats {
    double mean = 0;
    double stddev = 0;
    std::size_t n = 0;

    /// Two-sided 95% interval for the mean (Student t).
    Interval ci95() const;
};

/// Sample mean and (n - 1) standard deviation.
Stats summarize(const std::vector<double>& samples);

struct BenchPoint {
    std::string strategy;
    std::size_t record_count = 0;
    std::size_t page_index = 0;
    Stats stats;
};

struct BenchResult {
    std::vector<BenchPoint> points;

    const BenchPoint* find(std::string_view strategy, std::size_t records, std::size_t page) const;
    /// `strategy,record_count,page_index,mean_ms,stddev_ms`.
    std::string to_csv() const;
};

/// Times both strategies at every sampled page of every table size. Each
/// point runs one discarded warm-up and then `repetitions` timed queries.
BenchResult bench(const BenchSpec& spec);

struct TrendCheck {
    BenchPoint offset_first;
    BenchPoint offset_last;
    BenchPoint keyset_first;
    BenchPoint keyset_last;
    /// Offset at the last sampled page is slower with disjoint intervals.
    bool offset_diverges = false;
    /// Keyset intervals overlap or the means stay within the bound.
    bool keyset_flat = false;
};

/// Throws Error(PreconditionError) when the result lacks the table size.
TrendCheck check_trend(const BenchResult& result, std::size_t records, double keyset_bound);

} // namespace dbmerge::paging
