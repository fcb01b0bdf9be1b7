#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "copl/syntax/ast.hpp"
#include "copl/syntax/token.hpp"

namespace copl::syntax {

/// Recursive-descent parser over a complete token stream. Fails fast with
/// a ParseError ("expected X, found Y") on the first problem.
///
/// Concept names are collected from the whole stream before parsing so a
/// colon expression can be classified as left cast, right cast or
/// concatenation without a later rewrite.
SourceProgram parse(const std::vector<Token>& tokens);

inline SourceProgram parse_source(std::string_view source) { return parse(tokenize(source)); }

/// Canonical CopLang text; parse(tokenize(pretty_print(p))) is structurally
/// equal to p.
std::string pretty_print(const SourceProgram& program);
std::string pretty_print(const Expr& expr);

/// Indented tree dump used by `--dump-ast`. Positions are included unless
/// `with_positions` is false.
std::string dump_ast(const SourceProgram& program, bool with_positions = true);

/// Equality of trees ignoring source positions.
bool structurally_equal(const SourceProgram& a, const SourceProgram& b);

}  // namespace copl::syntax
