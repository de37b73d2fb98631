// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include "dbmerge/value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dbmerge {

namespace {

__extension__ typedef __int128 i128;

constexpr std::array<std::int64_t, 19> kPow10 = [] {
    std::array<std::int64_t, 19> p{};
    p[0] = 1;
    for (std::size_t i = 1; i < p.size(); ++i) p[i] = p[i - 1] * 10;
    return p;
}();

i128 pow10_wide(int n) {
    i128 r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

std::int64_t narrow(i128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("decimal overflow");
    }
    return static_cast<std::int64_t>(v);
}

// Half-even division of integers, denominator > 0.
i128 div_half_even(i128 num, i128 den) {
    bool neg = num < 0;
    i128 n = neg ? -num : num;
    i128 q = n / den;
    i128 r = n % den;
    i128 twice = r * 2;
    if (twice > den || (twice == den && (q % 2) != 0)) ++q;
    return neg ? -q : q;
}

} // namespace

std::string_view to_string(DataKind kind) noexcept {
    switch (kind) {
    case DataKind::Integer: return "integer";
    case DataKind::Decimal: return "decimal";
    case DataKind::Text: return "text";
    case DataKind::Date: return "date";
    case DataKind::Boolean: return "boolean";
    }
    return "text";
}

std::optional<DataKind> parse_data_kind(std::string_view s) noexcept {
    if (s == "integer") return DataKind::Integer;
    if (s == "decimal") return DataKind::Decimal;
    if (s == "text") return DataKind::Text;
    if (s == "date") return DataKind::Date;
    if (s == "boolean") return DataKind::Boolean;
    return std::nullopt;
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    bool neg = false;
    std::size_t i = 0;
    if (text[0] == '+' || text[0] == '-') {
        neg = text[0] == '-';
        ++i;
    }
    i128 units = 0;
    int scale = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') return std::nullopt;
        any_digit = true;
        units = units * 10 + (c - '0');
        if (seen_dot) ++scale;
        if (scale > kMaxScale || units > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
    }
    if (!any_digit) return std::nullopt;
    return Decimal(static_cast<std::int64_t>(neg ? -units : units), scale);
}

Decimal Decimal::rescaled(int scale) const {
    if (scale < 0 || scale > kMaxScale) throw std::invalid_argument("decimal scale out of range");
    if (scale == scale_) return *this;
    if (scale > scale_) {
        return Decimal(narrow(static_cast<i128>(units_) * kPow10[scale - scale_]), scale);
    }
    return Decimal(narrow(div_half_even(units_, kPow10[scale_ - scale])), scale);
}

Decimal Decimal::normalized() const {
    Decimal d = *this;
    while (d.scale_ > 0 && d.units_ % 10 == 0) {
        d.units_ /= 10;
        --d.scale_;
    }
    return d;
}

std::optional<std::int64_t> Decimal::to_integer() const {
    Decimal n = normalized();
    if (n.scale_ != 0) return std::nullopt;
    return n.units_;
}

double Decimal::to_double() const noexcept {
    return static_cast<double>(units_) / static_cast<double>(kPow10[scale_]);
}

std::string Decimal::to_string() const {
    i128 u = units_;
    bool neg = u < 0;
    if (neg) u = -u;
    std::string digits;
    do {
        digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    } while (u > 0);
    if (scale_ > 0) {
        if (static_cast<int>(digits.size()) <= scale_) {
            digits.insert(digits.begin(), static_cast<std::size_t>(scale_ + 1) - digits.size(), '0');
        }
        digits.insert(digits.end() - scale_, '.');
    }
    return neg ? "-" + digits : digits;
}

Decimal operator+(const Decimal& a, const Decimal& b) {
    int s = std::max(a.scale_, b.scale_);
    Decimal x = a.rescaled(s), y = b.rescaled(s);
    return Decimal(narrow(static_cast<i128>(x.units_) + y.units_), s);
}

Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }

Decimal Decimal::operator-() const { return Decimal(narrow(-static_cast<i128>(units_)), scale_); }

Decimal operator*(const Decimal& a, const Decimal& b) {
    i128 p = static_cast<i128>(a.units_) * b.units_;
    int s = a.scale_ + b.scale_;
    if (s > Decimal::kMaxScale) {
        p = div_half_even(p, pow10_wide(s - Decimal::kMaxScale));
        s = Decimal::kMaxScale;
    }
    return Decimal(narrow(p), s);
}

Decimal Decimal::divide(const Decimal& a, const Decimal& b, int result_scale) {
    if (b.units_ == 0) throw std::domain_error("division by zero");
    // a/b = (ua / ub) * 10^(sb - sa); want units at result_scale.
    int shift = result_scale + b.scale_ - a.scale_;
    i128 num = a.units_;
    i128 den = b.units_;
    if (shift >= 0) {
        num *= pow10_wide(shift);
    } else {
        den *= pow10_wide(-shift);
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    return Decimal(narrow(div_half_even(num, den)), result_scale);
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    int s = std::max(a.scale_, b.scale_);
    i128 x = static_cast<i128>(a.units_) * pow10_wide(s - a.scale_);
    i128 y = static_cast<i128>(b.units_) * pow10_wide(s - b.scale_);
    return x <=> y;
}

namespace {

int type_rank(const Value& v) {
    switch (v.index()) {
    case 0: return 0;
    case 1:
    case 2: return 1;
    case 3: return 2;
    default: return 3;
    }
}

Decimal as_decimal(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return Decimal::from_integer(*i);
    return std::get<Decimal>(v);
}

} // namespace

std::strong_ordering compare_values(const Value& a, const Value& b) {
    int ra = type_rank(a), rb = type_rank(b);
    if (ra != rb) return ra <=> rb;
    switch (ra) {
    case 0: return std::strong_ordering::equal;
    case 1:
        if (a.index() == 1 && b.index() == 1) return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
        return as_decimal(a) <=> as_decimal(b);
    case 2: {
        int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return c <=> 0;
    }
    default: return std::get<bool>(a) <=> std::get<bool>(b);
    }
}

std::string to_display(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(const Decimal& d) const { return d.to_string(); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    };
    return std::visit(Visitor{}, v);
}

bool is_valid_iso_date(std::string_view s) noexcept {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
        auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
        return r.ec == std::errc{} && r.ptr == s.data() + pos + len;
    };
    int y = 0, m = 0, d = 0;
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return false;
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    int max_day = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
    return d <= max_day;
}

std::optional<Value> coerce(const Value& v, DataKind kind) {
    if (is_null(v)) return Value{};
    switch (kind) {
    case DataKind::Integer:
        if (auto* i = std::get_if<std::int64_t>(&v)) return Value{*i};
        if (auto* d = std::get_if<Decimal>(&v)) {
            if (auto i = d->to_integer()) return Value{*i};
            return std::nullopt;
        }
        if (auto* s = std::get_if<std::string>(&v)) {
            std::int64_t out = 0;
            auto r = std::from_chars(s->data(), s->data() + s->size(), out);
            if (r.ec == std::errc{} && r.ptr == s->data() + s->size() && !s->empty()) return Value{out};
            return std::nullopt;
        }
        if (auto* b = std::get_if<bool>(&v)) return Value{std::int64_t{*b ? 1 : 0}};
        return std::nullopt;
    case DataKind::Decimal:
        if (auto* i = std::get_if<std::int64_t>(&v)) return Value{Decimal::from_integer(*i)};
        if (std::holds_alternative<Decimal>(v)) return v;
        if (auto* s = std::get_if<std::string>(&v)) {
            if (auto d = Decimal::parse(*s)) return Value{*d};
        }
        return std::nullopt;
    case DataKind::Text:
        if (std::holds_alternative<bool>(v)) return std::nullopt;
        return Value{to_display(v)};
    case DataKind::Date:
        if (auto* s = std::get_if<std::string>(&v); s && is_valid_iso_date(*s)) return v;
        return std::nullopt;
    case DataKind::Boolean:
        if (std::holds_alternative<bool>(v)) return v;
        if (auto* i = std::get_if<std::int64_t>(&v); i && (*i == 0 || *i == 1)) return Value{*i == 1};
        if (auto* s = std::get_if<std::string>(&v)) {
            if (*s == "true" || *s == "1") return Value{true};
            if (*s == "false" || *s == "0") return Value{false};
        }
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace dbmerge
