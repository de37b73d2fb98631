// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>

#include "dbmerge/load.hpp"

namespace dbmerge {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

TableReport& LoadReport::table(const std::string& name) {
    for (auto& [n, r] : tables) {
        if (n == name) return r;
    }
    tables.emplace_back(name, TableReport{});
    return tables.back().second;
}

const TableReport* LoadReport::find(std::string_view name) const {
    for (const auto& [n, r] : tables) {
        if (n == name) return &r;
    }
    return nullptr;
}

bool LoadReport::reconciles() const {
    return std::all_of(tables.begin(), tables.end(), [](const auto& t) { return t.second.reconciles(); });
}

std::string LoadReport::to_csv() const {
    std::ostringstream os;
    os << "table,extracted,transformed,loaded,rejected\n";
    for (const auto& [n, r] : tables) {
        os << csv_field(n) << ',' << r.extracted << ',' << r.transformed << ',' << r.loaded << ',' << r.rejected
           << '\n';
    }
    return os.str();
}

std::string LoadReport::rejects_csv() const {
    std::ostringstream os;
    os << "table,dbid,ref,reason\n";
    for (const auto& [n, r] : tables) {
        for (const auto& rej : r.reject_reasons) {
            os << csv_field(rej.table.empty() ? n : rej.table) << ',' << rej.dbid << ',' << csv_field(rej.ref) << ','
               << csv_field(rej.fault.describe()) << '\n';
        }
    }
    return os.str();
}

std::string LoadReport::to_text(std::size_t max_rejects) const {
    std::ostringstream os;
    std::size_t width = 5;
    for (const auto& [n, _] : tables) width = std::max(width, n.size());
    os << "table" << std::string(width - 5, ' ') << "  extracted  transformed     loaded   rejected\n";
    std::size_t total_rejects = 0;
    for (const auto& [n, r] : tables) {
        os << n << std::string(width - n.size(), ' ');
        for (std::size_t v : {r.extracted, r.transformed, r.loaded, r.rejected}) {
            std::string s = std::to_string(v);
            os << std::string(s.size() < 11 ? 11 - s.size() : 1, ' ') << s;
        }
        if (r.resumed) os << "  (resumed)";
        if (!r.reconciles()) os << "  MISMATCH";
        os << '\n';
        total_rejects += r.reject_reasons.size();
    }
    if (aborted) os << "aborted: " << abort_cause << '\n';
    if (total_rejects) {
        os << "rejected rows (" << total_rejects << "):\n";
        std::size_t shown = 0;
        for (const auto& [n, r] : tables) {
            for (const auto& rej : r.reject_reasons) {
                if (shown == max_rejects) break;
                os << "  " << n << " " << rej.ref << ": " << rej.fault.describe() << '\n';
                ++shown;
            }
        }
        if (total_rejects > shown) os << "  ... " << (total_rejects - shown) << " more\n";
    }
    return os.str();
}

} // namespace dbmerge
