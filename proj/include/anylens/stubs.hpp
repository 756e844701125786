#pragma once

#include "anylens/model.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace anylens
{

enum class AnyFlag
{
    FirstParamOnly,
    InCallableArg,
    InDictValue,
    OtherPosition,
    None,
};

std::string_view to_string( AnyFlag flag );

/// Where the Any occurrences of one signature sit. `None` is set alone when
/// the signature has no Any; `FirstParamOnly` is likewise exclusive.
struct AnyClassification
{
    std::set<AnyFlag> flags;

    bool has( AnyFlag f ) const { return flags.count( f ) > 0; }
    bool is_only( AnyFlag f ) const { return flags.size() == 1 && has( f ); }

    friend bool operator==( const AnyClassification&, const AnyClassification& ) = default;
};

/// Normalized type of a parameter, with a missing annotation read as Any.
TypeExpr slot_type( const Parameter& p );
/// Normalized return type, with a missing annotation read as Any.
TypeExpr return_slot_type( const Declaration& d );

AnyClassification classify_signature( const Declaration& d );
AnyClassification classify_variable( const VariableDecl& v );

struct StubLine
{
    std::string       text;
    std::string       qualified_name;
    SourceLocation    location;
    AnyClassification classification;
    int               explicit_any = 0;  // Any nodes written in annotations
    int               implicit_any = 0;  // unannotated slots, one Any each
};

/// `def name(p: T, *args: T, **kw: T) -> R: ...` with normalized types;
/// unannotated slots (receiver included) render as Any.
StubLine render_stub_line( const Declaration& d );
/// `name: T`
StubLine render_stub_line( const VariableDecl& v );

struct FilterResult
{
    std::vector<StubLine> kept;
    int                   dropped_first_param_only = 0;
    int                   dropped_duplicates       = 0;
};

/// Drops receiver-only-Any lines, then exact duplicate texts (the first by
/// file and line is kept). Input is one project's lines in any order.
FilterResult filter_pipeline( std::vector<StubLine> lines );

}  // namespace anylens
