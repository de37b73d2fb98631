// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "dbmerge/expression.hpp"
#include "support.hpp"

namespace dbmerge {
namespace {

using testing::make_row;

Decimal dec(const char* s) { return *Decimal::parse(s); }

std::string eval(const char* text, const Row& row) {
    auto r = Expression::parse(text).evaluate(row);
    if (r.fault) return "fault:" + r.fault->kind;
    return r.value ? r.value->to_string() : "null";
}

TEST(Expression, TaxExample) {
    Row row = make_row("Student", 1, {{"Tuition", Value{dec("100.00")}}, {"TaxRate", Value{dec("0.18")}}});
    auto r = Expression::parse("Tuition * (1 + TaxRate)").evaluate(row);
    ASSERT_TRUE(r.value.has_value());
    EXPECT_EQ(r.value->rescaled(2).to_string(), "118.00");
}

TEST(Expression, PrecedenceAndUnaryMinus) {
    Row row = make_row("T", 1, {{"a", Value{std::int64_t{2}}}, {"b", Value{dec("3")}}});
    EXPECT_EQ(eval("a + b * 2", row), "8");
    EXPECT_EQ(eval("(a + b) * 2", row), "10");
    EXPECT_EQ(eval("-a - -b", row), "1");
    EXPECT_EQ(eval("a - b - 1", row), "-2");
}

TEST(Expression, NullPropagates) {
    Row row = make_row("T", 1, {{"a", Value{}}, {"b", Value{std::int64_t{1}}}});
    EXPECT_EQ(eval("a * b + 1", row), "null");
    EXPECT_EQ(eval("missing + 1", row), "null");
}

TEST(Expression, FaultsInsteadOfThrowing) {
    Row row = make_row("T", 1, {{"a", Value{std::int64_t{1}}}, {"z", Value{std::int64_t{0}}}, {"s", Value{std::string("x")}}});
    EXPECT_EQ(eval("a / z", row), "fault:TransformError");
    EXPECT_EQ(eval("s + 1", row), "fault:TransformError");
}

TEST(Expression, ListsColumns) {
    auto e = Expression::parse("Tuition * (1 + TaxRate)");
    EXPECT_EQ(e.columns(), (std::set<std::string>{"Tuition", "TaxRate"}));
}

TEST(Expression, RejectsMalformedText) {
    for (const char* bad : {"", "a +", "(a", "a b", "1 ++", "a)", "3 $ 4"}) {
        try {
            Expression::parse(bad);
            ADD_FAILURE() << "accepted: " << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::RuleParameterError) << bad;
        }
    }
}

} // namespace
} // namespace dbmerge
