// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <stdexcept>

#include "dbmerge/value.hpp"

namespace dbmerge {
namespace {

Decimal dec(const char* s) {
    auto d = Decimal::parse(s);
    EXPECT_TRUE(d.has_value()) << s;
    return d.value_or(Decimal{});
}

TEST(Decimal, ParsesAndPrints) {
    EXPECT_EQ(dec("118.00").to_string(), "118.00");
    EXPECT_EQ(dec("-0.5").to_string(), "-0.5");
    EXPECT_EQ(dec("+7").to_string(), "7");
    EXPECT_EQ(dec("0.18").scale(), 2);
    EXPECT_FALSE(Decimal::parse("").has_value());
    EXPECT_FALSE(Decimal::parse("1.2.3").has_value());
    EXPECT_FALSE(Decimal::parse("abc").has_value());
    EXPECT_FALSE(Decimal::parse("1e5").has_value());
}

TEST(Decimal, ExactArithmetic) {
    EXPECT_EQ((dec("100.00") * (dec("1") + dec("0.18"))).rescaled(2).to_string(), "118.00");
    EXPECT_EQ((dec("0.1") + dec("0.2")).to_string(), "0.3");
    EXPECT_EQ((dec("5") - dec("7.25")).to_string(), "-2.25");
    EXPECT_EQ((-dec("3.5")).to_string(), "-3.5");
    EXPECT_EQ(dec("1.50"), dec("1.5"));
    EXPECT_LT(dec("1.49"), dec("1.5"));
}

TEST(Decimal, RoundsHalfToEven) {
    EXPECT_EQ(dec("2.345").rescaled(2).to_string(), "2.34");
    EXPECT_EQ(dec("2.355").rescaled(2).to_string(), "2.36");
    EXPECT_EQ(dec("-2.345").rescaled(2).to_string(), "-2.34");
    EXPECT_EQ(dec("0.5").rescaled(0).to_string(), "0");
    EXPECT_EQ(dec("1.5").rescaled(0).to_string(), "2");
    EXPECT_EQ(dec("2.3451").rescaled(2).to_string(), "2.35");
    EXPECT_EQ(dec("7").rescaled(2).to_string(), "7.00");
}

TEST(Decimal, Divides) {
    EXPECT_EQ(Decimal::divide(dec("1"), dec("3"), 4).to_string(), "0.3333");
    EXPECT_EQ(Decimal::divide(dec("2"), dec("3"), 2).to_string(), "0.67");
    EXPECT_THROW(Decimal::divide(dec("1"), dec("0"), 2), std::domain_error);
}

TEST(Decimal, OverflowThrows) {
    Decimal big(INT64_MAX / 2, 0);
    EXPECT_THROW(big * dec("10"), std::overflow_error);
    EXPECT_THROW(dec("92233720368547758").rescaled(4), std::overflow_error);
}

TEST(Decimal, IntegerConversion) {
    EXPECT_EQ(dec("12.00").to_integer(), 12);
    EXPECT_FALSE(dec("12.5").to_integer().has_value());
    EXPECT_EQ(dec("12.500").normalized().to_string(), "12.5");
}

TEST(Value, OrdersAcrossKinds) {
    EXPECT_TRUE(compare_values(Value{}, Value{std::int64_t{0}}) < 0);
    EXPECT_TRUE(compare_values(Value{std::int64_t{5}}, Value{std::string("a")}) < 0);
    EXPECT_TRUE(compare_values(Value{std::string("z")}, Value{true}) < 0);
    EXPECT_TRUE(values_equal(Value{std::int64_t{2}}, Value{dec("2.00")}));
    EXPECT_TRUE(compare_values(Value{std::int64_t{2}}, Value{dec("2.01")}) < 0);
}

TEST(Value, CoercesToDeclaredKinds) {
    EXPECT_TRUE(values_equal(*coerce(Value{std::string("42")}, DataKind::Integer), Value{std::int64_t{42}}));
    EXPECT_FALSE(coerce(Value{std::string("n/a")}, DataKind::Integer).has_value());
    EXPECT_FALSE(coerce(Value{dec("1.5")}, DataKind::Integer).has_value());
    EXPECT_TRUE(values_equal(*coerce(Value{std::string("1200.50")}, DataKind::Decimal), Value{dec("1200.5")}));
    EXPECT_EQ(std::get<std::string>(*coerce(Value{std::int64_t{7}}, DataKind::Text)), "7");
    EXPECT_TRUE(coerce(Value{std::string("2024-02-29")}, DataKind::Date).has_value());
    EXPECT_FALSE(coerce(Value{std::string("2023-02-29")}, DataKind::Date).has_value());
    EXPECT_EQ(std::get<bool>(*coerce(Value{std::int64_t{1}}, DataKind::Boolean)), true);
    EXPECT_FALSE(coerce(Value{std::int64_t{2}}, DataKind::Boolean).has_value());
    EXPECT_TRUE(is_null(*coerce(Value{}, DataKind::Integer)));
}

TEST(Value, ParsesKindNames) {
    for (auto k : {DataKind::Integer, DataKind::Decimal, DataKind::Text, DataKind::Date, DataKind::Boolean}) {
        EXPECT_EQ(parse_data_kind(to_string(k)), k);
    }
    EXPECT_FALSE(parse_data_kind("money").has_value());
}

} // namespace
} // namespace dbmerge
