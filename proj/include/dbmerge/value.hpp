// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace dbmerge {

enum class DataKind { Integer, Decimal, Text, Date, Boolean };

std::string_view to_string(DataKind kind) noexcept;
std::optional<DataKind> parse_data_kind(std::string_view s) noexcept;

inline bool is_numeric(DataKind k) noexcept {
    return k == DataKind::Integer || k == DataKind::Decimal;
}

enum class Rounding { HalfEven };

/// Exact fixed-point number: value = units / 10^scale.
///
/// Arithmetic is exact for +, - and *; division and rescaling round
/// half-to-even. Overflow of the 64-bit unit count throws std::overflow_error.
class Decimal {
public:
    static constexpr int kMaxScale = 18;

    constexpr Decimal() = default;
    constexpr Decimal(std::int64_t units, int scale) : units_(units), scale_(scale) {}

    static Decimal from_integer(std::int64_t v) { return Decimal(v, 0); }
    /// Accepts [-+]digits[.digits]; nullopt on anything else.
    static std::optional<Decimal> parse(std::string_view text);

    std::int64_t units() const noexcept { return units_; }
    int scale() const noexcept { return scale_; }

    Decimal rescaled(int scale) const;
    /// Drops trailing fractional zeros.
    Decimal normalized() const;
    bool is_zero() const noexcept { return units_ == 0; }
    /// Integral value when scale reduction is exact.
    std::optional<std::int64_t> to_integer() const;
    double to_double() const noexcept;
    std::string to_string() const;

    friend Decimal operator+(const Decimal& a, const Decimal& b);
    friend Decimal operator-(const Decimal& a, const Decimal& b);
    friend Decimal operator*(const Decimal& a, const Decimal& b);
    Decimal operator-() const;
    /// Quotient carried at `result_scale` fractional digits. Throws
    /// std::domain_error on a zero divisor.
    static Decimal divide(const Decimal& a, const Decimal& b, int result_scale);

    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);
    friend bool operator==(const Decimal& a, const Decimal& b) {
        return (a <=> b) == std::strong_ordering::equal;
    }

private:
    std::int64_t units_ = 0;
    int scale_ = 0;
};

/// A cell. Dates travel as ISO-8601 `YYYY-MM-DD` text.
using Value = std::variant<std::monostate, std::int64_t, Decimal, std::string, bool>;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<std::monostate>(v); }

/// Total order used for sorting and map keys: null < numbers < text < bool.
/// Integers and decimals compare by numeric value.
std::strong_ordering compare_values(const Value& a, const Value& b);

struct ValueLess {
    bool operator()(const Value& a, const Value& b) const { return compare_values(a, b) < 0; }
};

inline bool values_equal(const Value& a, const Value& b) { return compare_values(a, b) == 0; }

/// Human/CSV rendering. Null renders as the empty string.
std::string to_display(const Value& v);

/// Coerce a loosely-typed cell into `kind`. nullopt means the cell cannot
/// represent a value of that kind (a structure error for the row).
std::optional<Value> coerce(const Value& v, DataKind kind);

bool is_valid_iso_date(std::string_view s) noexcept;

} // namespace dbmerge
