// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "dbmerge/error.hpp"
#include "dbmerge/row.hpp"
#include "dbmerge/value.hpp"

namespace dbmerge {

/// Infix arithmetic over bare column names and decimal literals:
/// `+ - * /`, unary minus, parentheses. Evaluated in exact decimal
/// arithmetic; a null operand makes the result null.
class Expression {
public:
    /// Throws Error(RuleParameterError) with the offending position.
    static Expression parse(std::string_view text);

    const std::string& text() const noexcept { return text_; }
    /// Every column name the expression reads.
    const std::set<std::string>& columns() const noexcept { return columns_; }

    struct Result {
        std::optional<Decimal> value;
        /// Set on division by zero, overflow or a non-numeric operand.
        std::optional<RowFault> fault;
    };
    Result evaluate(const Row& row) const;

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
    std::set<std::string> columns_;
};

} // namespace dbmerge
