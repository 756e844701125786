#pragma once

#include "anylens/python/ast.hpp"
#include "anylens/python/lexer.hpp"

#include <string_view>

namespace anylens::python
{

/// Parses a whole module. Throws SyntaxError.
Module parse_module( std::string_view source );

/// Parses a single expression (as found in an annotation). Throws SyntaxError.
Expr parse_expression( std::string_view source );

/// Source slice covered by an expression.
inline std::string_view source_of( std::string_view source, const Expr& e )
{
    return e.end >= e.begin && e.end <= source.size() ? source.substr( e.begin, e.end - e.begin ) : std::string_view {};
}

}  // namespace anylens::python
