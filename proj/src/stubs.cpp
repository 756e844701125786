#include "anylens/stubs.hpp"

#include <algorithm>
#include <unordered_set>

namespace anylens
{

std::string_view to_string( AnyFlag flag )
{
    switch ( flag )
    {
        case AnyFlag::FirstParamOnly: return "first_param_only";
        case AnyFlag::InCallableArg: return "in_callable_arg";
        case AnyFlag::InDictValue: return "in_dict_value";
        case AnyFlag::OtherPosition: return "other_position";
        case AnyFlag::None: return "none";
    }
    return "none";
}

TypeExpr slot_type( const Parameter& p ) { return p.annotation ? p.annotation->normalized : TypeExpr::any(); }

TypeExpr return_slot_type( const Declaration& d )
{
    return d.return_annotation ? d.return_annotation->normalized : TypeExpr::any();
}

namespace
{

// Any nodes of a parameter type that belong to a callable or to the value of
// a top-level dict-like type.
int covered_any( const TypeExpr& t, bool top_level )
{
    if ( t.kind == TypeKind::Callable ) return count_any( t );
    if ( top_level && t.kind == TypeKind::Union )
    {
        int n = 0;
        for ( const auto& m : t.args ) n += covered_any( m, true );
        return n;
    }
    if ( top_level && t.kind == TypeKind::Generic && is_dict_like_head( t.name ) && t.args.size() == 2 )
        return covered_any( t.args[0], false ) + count_any( t.args[1] );
    int n = 0;
    for ( const auto& a : t.args ) n += covered_any( a, false );
    return n;
}

AnyClassification classify_slots( const std::vector<TypeExpr>& params, const TypeExpr& ret, bool is_method )
{
    AnyClassification c;
    int               total = count_any( ret );
    for ( const auto& p : params ) total += count_any( p );
    if ( total == 0 )
    {
        c.flags.insert( AnyFlag::None );
        return c;
    }
    if ( is_method && !params.empty() && count_any( params[0] ) == total )
    {
        c.flags.insert( AnyFlag::FirstParamOnly );
        return c;
    }
    bool other = count_any( ret ) > 0;
    for ( std::size_t i = 0; i < params.size(); ++i )
    {
        const TypeExpr& t = params[i];
        if ( contains_any_under_callable( t ) ) c.flags.insert( AnyFlag::InCallableArg );
        if ( has_any_dict_value( t ) ) c.flags.insert( AnyFlag::InDictValue );
        if ( is_method && i == 0 ) continue;
        if ( count_any( t ) > covered_any( t, true ) ) other = true;
    }
    if ( other ) c.flags.insert( AnyFlag::OtherPosition );
    return c;
}

std::string param_text( const Parameter& p )
{
    std::string prefix;
    if ( p.kind == ParameterKind::VarPositional ) prefix = "*";
    else if ( p.kind == ParameterKind::VarKeyword ) prefix = "**";
    return prefix + p.name + ": " + render( slot_type( p ) );
}

}  // namespace

AnyClassification classify_signature( const Declaration& d )
{
    std::vector<TypeExpr> params;
    params.reserve( d.params.size() );
    for ( const auto& p : d.params ) params.push_back( slot_type( p ) );
    return classify_slots( params, return_slot_type( d ), d.is_method );
}

AnyClassification classify_variable( const VariableDecl& v )
{
    AnyClassification c;
    c.flags.insert( count_any( v.annotation.normalized ) ? AnyFlag::OtherPosition : AnyFlag::None );
    return c;
}

StubLine render_stub_line( const Declaration& d )
{
    StubLine line;
    line.qualified_name = d.qualified_name;
    line.location       = d.location;
    line.classification = classify_signature( d );

    std::string params;
    bool        star_seen = false;
    for ( const auto& p : d.params )
    {
        if ( !params.empty() ) params += ", ";
        if ( p.kind == ParameterKind::VarPositional ) star_seen = true;
        if ( p.kind == ParameterKind::KeywordOnly && !star_seen )
        {
            params += "*, ";
            star_seen = true;
        }
        params += param_text( p );
        if ( p.annotation ) line.explicit_any += count_any( p.annotation->normalized );
        else ++line.implicit_any;
    }
    if ( d.return_annotation ) line.explicit_any += count_any( d.return_annotation->normalized );
    else ++line.implicit_any;

    line.text = "def " + d.name + "(" + params + ") -> " + render( return_slot_type( d ) ) + ": ...";
    return line;
}

StubLine render_stub_line( const VariableDecl& v )
{
    StubLine line;
    line.qualified_name = v.qualified_name;
    line.location       = v.location;
    line.classification = classify_variable( v );
    line.explicit_any   = count_any( v.annotation.normalized );
    line.text           = v.name + ": " + render( v.annotation.normalized );
    return line;
}

FilterResult filter_pipeline( std::vector<StubLine> lines )
{
    std::stable_sort( lines.begin(), lines.end(),
                      []( const StubLine& a, const StubLine& b ) { return a.location < b.location; } );
    FilterResult                    result;
    std::unordered_set<std::string> seen;
    for ( auto& line : lines )
    {
        if ( line.classification.is_only( AnyFlag::FirstParamOnly ) )
        {
            ++result.dropped_first_param_only;
            continue;
        }
        if ( !seen.insert( line.text ).second )
        {
            ++result.dropped_duplicates;
            continue;
        }
        result.kept.push_back( std::move( line ) );
    }
    return result;
}

}  // namespace anylens
