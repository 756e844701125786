#include "anylens/type_expr.hpp"

#include "anylens/python/parser.hpp"

#include <algorithm>
#include <array>
#include <cassert>

namespace anylens
{

TypeExpr TypeExpr::any() { return TypeExpr {}; }

TypeExpr TypeExpr::none()
{
    TypeExpr t;
    t.kind = TypeKind::NoneType;
    return t;
}

TypeExpr TypeExpr::named( std::string dotted )
{
    TypeExpr t;
    t.kind = TypeKind::Named;
    t.name = std::move( dotted );
    return t;
}

TypeExpr TypeExpr::generic( std::string head, std::vector<TypeExpr> args )
{
    TypeExpr t;
    t.kind = TypeKind::Generic;
    t.name = std::move( head );
    t.args = std::move( args );
    return t;
}

TypeExpr TypeExpr::callable( std::vector<TypeExpr> params, TypeExpr ret )
{
    TypeExpr t;
    t.kind = TypeKind::Callable;
    t.args = std::move( params );
    t.args.push_back( std::move( ret ) );
    return t;
}

TypeExpr TypeExpr::callable_any_params( TypeExpr ret )
{
    TypeExpr t        = callable( {}, std::move( ret ) );
    t.ellipsis_params = true;
    return t;
}

TypeExpr TypeExpr::union_of( std::vector<TypeExpr> members )
{
    TypeExpr t;
    t.kind = TypeKind::Union;
    t.args = std::move( members );
    return t;
}

TypeExpr TypeExpr::type_var( std::string name )
{
    TypeExpr t;
    t.kind = TypeKind::TypeVarRef;
    t.name = std::move( name );
    return t;
}

TypeExpr TypeExpr::self_type()
{
    TypeExpr t;
    t.kind = TypeKind::Self;
    return t;
}

TypeExpr TypeExpr::never()
{
    TypeExpr t;
    t.kind = TypeKind::Never;
    return t;
}

TypeExpr TypeExpr::forward( TypeExpr inner )
{
    TypeExpr t;
    t.kind = TypeKind::StringForward;
    t.args.push_back( std::move( inner ) );
    return t;
}

TypeExpr TypeExpr::opaque( std::string raw )
{
    TypeExpr t;
    t.kind = TypeKind::Opaque;
    t.name = std::move( raw );
    return t;
}

TypeExpr TypeExpr::ellipsis()
{
    TypeExpr t;
    t.kind = TypeKind::EllipsisMarker;
    return t;
}

std::span<const TypeExpr> TypeExpr::callable_params() const
{
    assert( kind == TypeKind::Callable && !args.empty() );
    return std::span<const TypeExpr>( args.data(), args.size() - 1 );
}

const TypeExpr& TypeExpr::callable_return() const
{
    assert( kind == TypeKind::Callable && !args.empty() );
    return args.back();
}

bool operator==( const TypeExpr& a, const TypeExpr& b )
{
    return a.kind == b.kind && a.name == b.name && a.ellipsis_params == b.ellipsis_params && a.args == b.args;
}

namespace
{

using python::Expr;

constexpr std::array<std::string_view, 3> kTypingModules { "typing", "typing_extensions", "collections.abc" };

constexpr std::array<std::string_view, 7> kTwoArgHeads {
    "Dict", "dict", "Mapping", "MutableMapping", "DefaultDict", "defaultdict", "OrderedDict",
};

constexpr std::array<std::string_view, 16> kOneArgHeads {
    "List",     "list",       "Set",        "set",      "FrozenSet", "frozenset", "Iterable", "Sequence",
    "Iterator", "Collection", "MutableSequence", "MutableSet", "AbstractSet", "Deque", "deque", "Type",
};

template <std::size_t N>
bool contains( const std::array<std::string_view, N>& list, std::string_view value )
{
    return std::find( list.begin(), list.end(), value ) != list.end();
}

// Dotted name of a Name/Attribute chain, or empty.
std::string dotted_name( const Expr& e )
{
    if ( e.kind == Expr::Kind::Name ) return e.text;
    if ( e.kind == Expr::Kind::Attribute )
    {
        std::string base = dotted_name( e.children[0] );
        if ( base.empty() ) return {};
        return base + "." + e.text;
    }
    return {};
}

struct ResolvedName
{
    std::string written;       // as in source
    std::string typing_member; // non-empty when the name denotes a typing construct
};

ResolvedName resolve( const std::string& written, const TypeContext& ctx )
{
    ResolvedName r { written, {} };
    const auto   dot   = written.find( '.' );
    const auto   first = written.substr( 0, dot );
    std::string  canonical;
    if ( ctx.aliases )
    {
        if ( auto it = ctx.aliases->find( first ); it != ctx.aliases->end() )
            canonical = it->second + ( dot == std::string::npos ? "" : written.substr( dot ) );
    }
    if ( canonical.empty() )
    {
        if ( dot == std::string::npos )
        {
            // Unqualified and not imported: typing spellings are recognized
            // directly so un-imported listings still read as intended.
            r.typing_member = written;
            return r;
        }
        canonical = written;
    }
    for ( auto module : kTypingModules )
    {
        const std::string prefix = std::string( module ) + ".";
        if ( canonical.rfind( prefix, 0 ) == 0 && canonical.find( '.', prefix.size() ) == std::string::npos )
        {
            r.typing_member = canonical.substr( prefix.size() );
            return r;
        }
    }
    return r;
}

class Converter
{
public:
    Converter( std::string_view source, const TypeContext& ctx ) : source_( source ), ctx_( ctx ) {}

    TypeExpr convert( const Expr& e, int depth = 0 )
    {
        if ( depth > 64 ) return opaque( e );
        switch ( e.kind )
        {
            case Expr::Kind::Constant:
                if ( e.text == "None" ) return TypeExpr::none();
                return opaque( e );
            case Expr::Kind::Ellipsis: return TypeExpr::ellipsis();
            case Expr::Kind::Str: return forward_reference( e, depth );
            case Expr::Kind::Name:
            case Expr::Kind::Attribute:
            {
                const std::string name = dotted_name( e );
                if ( name.empty() ) return opaque( e );
                return from_bare_name( name );
            }
            case Expr::Kind::Subscript: return from_subscript( e, depth );
            case Expr::Kind::BinOp:
                if ( e.text == "|" )
                {
                    std::vector<TypeExpr> members;
                    collect_pipe_union( e, members, depth );
                    return TypeExpr::union_of( std::move( members ) );
                }
                return opaque( e );
            default: return opaque( e );
        }
    }

private:
    TypeExpr opaque( const Expr& e ) const
    {
        std::string_view text = python::source_of( source_, e );
        std::string      collapsed;
        bool             space = false;
        for ( char c : text )
        {
            if ( c == ' ' || c == '\t' || c == '\n' || c == '\r' )
            {
                space = !collapsed.empty();
                continue;
            }
            if ( space ) collapsed.push_back( ' ' );
            space = false;
            collapsed.push_back( c );
        }
        return TypeExpr::opaque( collapsed.empty() ? std::string( "?" ) : collapsed );
    }

    void collect_pipe_union( const Expr& e, std::vector<TypeExpr>& out, int depth )
    {
        if ( e.kind == Expr::Kind::BinOp && e.text == "|" )
        {
            collect_pipe_union( e.children[0], out, depth + 1 );
            collect_pipe_union( e.children[1], out, depth + 1 );
            return;
        }
        out.push_back( convert( e, depth + 1 ) );
    }

    TypeExpr forward_reference( const Expr& e, int depth )
    {
        if ( e.is_bytes || e.is_fstring ) return opaque( e );
        try
        {
            const python::Expr inner = python::parse_expression( e.text );
            Converter          nested( e.text, ctx_ );
            return TypeExpr::forward( nested.convert( inner, depth + 1 ) );
        }
        catch ( const python::SyntaxError& )
        {
            return opaque( e );
        }
    }

    TypeExpr from_bare_name( const std::string& written )
    {
        const ResolvedName r = resolve( written, ctx_ );
        if ( r.typing_member == "AnyStr" ) return TypeExpr::type_var( "AnyStr" );
        if ( written.find( '.' ) == std::string::npos && ctx_.typevars && ctx_.typevars->count( written ) )
            return TypeExpr::type_var( written );
        const std::string& m = r.typing_member;
        if ( m == "Any" ) return TypeExpr::any();
        if ( m == "NoReturn" || m == "Never" ) return TypeExpr::never();
        if ( m == "Self" ) return TypeExpr::self_type();
        if ( m == "Callable" )
        {
            TypeExpr t = TypeExpr::callable_any_params( TypeExpr::any() );
            t.was_bare = true;
            return t;
        }
        TypeExpr t = TypeExpr::named( m.empty() ? written : m );
        t.was_bare = contains( kTwoArgHeads, t.name ) || contains( kOneArgHeads, t.name ) || t.name == "Tuple" ||
                     t.name == "tuple";
        return t;
    }

    std::vector<const Expr*> subscript_items( const Expr& index ) const
    {
        std::vector<const Expr*> items;
        if ( index.kind == Expr::Kind::Tuple && !index.children.empty() )
            for ( const auto& c : index.children ) items.push_back( &c );
        else items.push_back( &index );
        return items;
    }

    TypeExpr from_subscript( const Expr& e, int depth )
    {
        const std::string head_written = dotted_name( e.children[0] );
        if ( head_written.empty() ) return opaque( e );
        const ResolvedName r     = resolve( head_written, ctx_ );
        const std::string& m     = r.typing_member;
        const Expr&        index = e.children[1];
        const auto         items = subscript_items( index );

        if ( index.kind == Expr::Kind::Tuple && index.children.empty() ) return opaque( e );

        if ( m == "Union" )
        {
            std::vector<TypeExpr> members;
            for ( const Expr* item : items ) members.push_back( convert( *item, depth + 1 ) );
            if ( members.size() == 1 ) return std::move( members[0] );
            return TypeExpr::union_of( std::move( members ) );
        }
        if ( m == "Callable" )
        {
            if ( items.size() != 2 ) return opaque( e );
            TypeExpr ret = convert( *items[1], depth + 1 );
            if ( items[0]->kind == Expr::Kind::List )
            {
                std::vector<TypeExpr> params;
                for ( const auto& p : items[0]->children ) params.push_back( convert( p, depth + 1 ) );
                return TypeExpr::callable( std::move( params ), std::move( ret ) );
            }
            // `...`, a ParamSpec, or Concatenate[...]: arbitrary parameters.
            return TypeExpr::callable_any_params( std::move( ret ) );
        }
        if ( m == "Annotated" || m == "ClassVar" || m == "Final" || m == "Required" || m == "NotRequired" ||
             m == "ReadOnly" )
            return convert( *items[0], depth + 1 );
        if ( m == "Literal" )
        {
            std::vector<TypeExpr> values;
            for ( const Expr* item : items ) values.push_back( opaque( *item ) );
            return TypeExpr::generic( "Literal", std::move( values ) );
        }

        std::vector<TypeExpr> args;
        for ( const Expr* item : items )
        {
            if ( item->kind == Expr::Kind::List || item->kind == Expr::Kind::Slice ) args.push_back( opaque( *item ) );
            else args.push_back( convert( *item, depth + 1 ) );
        }
        return TypeExpr::generic( m.empty() ? head_written : m, std::move( args ) );
    }

    std::string_view   source_;
    const TypeContext& ctx_;
};

std::string join_rendered( const std::vector<TypeExpr>& items, std::size_t count )
{
    std::string out;
    for ( std::size_t i = 0; i < count; ++i )
    {
        if ( i ) out += ", ";
        out += render( items[i] );
    }
    return out;
}

void flatten_union_into( const TypeExpr& t, std::vector<TypeExpr>& out )
{
    if ( t.kind == TypeKind::Union )
    {
        for ( const auto& m : t.args ) flatten_union_into( m, out );
        return;
    }
    out.push_back( t );
}

bool contains_any( const TypeExpr& t ) { return count_any( t ) > 0; }

void replace_any( TypeExpr& t, int& counter )
{
    if ( t.kind == TypeKind::Any )
    {
        t = TypeExpr::type_var( "T" + std::to_string( counter++ ) );
        return;
    }
    for ( auto& a : t.args ) replace_any( a, counter );
}

}  // namespace

std::string typing_member( std::string_view dotted, const AliasMap* aliases )
{
    TypeContext ctx;
    ctx.aliases = aliases;
    return resolve( std::string( dotted ), ctx ).typing_member;
}

TypeExpr parse_type_expr( std::string_view raw, const TypeContext& context )
{
    try
    {
        const python::Expr e = python::parse_expression( raw );
        return Converter( raw, context ).convert( e );
    }
    catch ( const python::SyntaxError& )
    {
        std::string trimmed( raw );
        const auto  first = trimmed.find_first_not_of( " \t\r\n" );
        const auto  last  = trimmed.find_last_not_of( " \t\r\n" );
        trimmed           = first == std::string::npos ? std::string( "?" ) : trimmed.substr( first, last - first + 1 );
        return TypeExpr::opaque( trimmed );
    }
}

TypeExpr type_from_ast( const python::Expr& expr, std::string_view source, const TypeContext& context )
{
    return Converter( source, context ).convert( expr );
}

TypeExpr normalize( const TypeExpr& t )
{
    switch ( t.kind )
    {
        case TypeKind::Named:
        {
            if ( t.name == "Text" ) return TypeExpr::named( "str" );
            if ( t.name == "NoReturn" || t.name == "Never" ) return TypeExpr::never();
            if ( contains( kTwoArgHeads, t.name ) ) return TypeExpr::generic( t.name, { TypeExpr::any(), TypeExpr::any() } );
            if ( contains( kOneArgHeads, t.name ) ) return TypeExpr::generic( t.name, { TypeExpr::any() } );
            if ( t.name == "Tuple" || t.name == "tuple" )
                return TypeExpr::generic( t.name, { TypeExpr::any(), TypeExpr::ellipsis() } );
            if ( t.name == "Callable" ) return TypeExpr::callable_any_params( TypeExpr::any() );
            return TypeExpr::named( t.name );
        }
        case TypeKind::Generic:
        {
            if ( t.name == "Optional" && t.args.size() == 1 )
                return normalize( TypeExpr::union_of( { t.args[0], TypeExpr::none() } ) );
            std::vector<TypeExpr> args;
            args.reserve( t.args.size() );
            for ( const auto& a : t.args ) args.push_back( normalize( a ) );
            return TypeExpr::generic( t.name, std::move( args ) );
        }
        case TypeKind::Callable:
        {
            TypeExpr out        = t;
            out.was_bare        = false;
            for ( auto& a : out.args ) a = normalize( a );
            return out;
        }
        case TypeKind::StringForward: return normalize( t.args.at( 0 ) );
        case TypeKind::Union:
        {
            std::vector<TypeExpr> flat;
            for ( const auto& m : t.args ) flatten_union_into( normalize( m ), flat );
            std::vector<TypeExpr> unique;
            for ( auto& m : flat )
                if ( std::find( unique.begin(), unique.end(), m ) == unique.end() ) unique.push_back( std::move( m ) );
            std::stable_sort( unique.begin(), unique.end(), []( const TypeExpr& a, const TypeExpr& b ) {
                const bool a_none = a.kind == TypeKind::NoneType, b_none = b.kind == TypeKind::NoneType;
                if ( a_none != b_none ) return b_none;
                return render( a ) < render( b );
            } );
            if ( unique.size() == 1 ) return std::move( unique[0] );
            return TypeExpr::union_of( std::move( unique ) );
        }
        default:
        {
            TypeExpr out = t;
            out.was_bare = false;
            return out;
        }
    }
}

int count_any( const TypeExpr& t )
{
    int n = t.kind == TypeKind::Any ? 1 : 0;
    for ( const auto& a : t.args ) n += count_any( a );
    return n;
}

std::string render( const TypeExpr& t )
{
    switch ( t.kind )
    {
        case TypeKind::Any: return "Any";
        case TypeKind::NoneType: return "None";
        case TypeKind::Named:
        case TypeKind::TypeVarRef:
        case TypeKind::Opaque: return t.name;
        case TypeKind::Generic: return t.name + "[" + join_rendered( t.args, t.args.size() ) + "]";
        case TypeKind::Callable:
        {
            const std::string params =
                t.ellipsis_params ? std::string( "..." ) : "[" + join_rendered( t.args, t.args.size() - 1 ) + "]";
            return "Callable[" + params + ", " + render( t.callable_return() ) + "]";
        }
        case TypeKind::Union: return "Union[" + join_rendered( t.args, t.args.size() ) + "]";
        case TypeKind::Self: return "Self";
        case TypeKind::Never: return "NoReturn";
        case TypeKind::StringForward:
        {
            std::string inner = render( t.args.at( 0 ) );
            return inner.find( '\'' ) == std::string::npos ? "'" + inner + "'" : "\"" + inner + "\"";
        }
        case TypeKind::EllipsisMarker: return "...";
    }
    return "?";
}

bool contains_any_under_callable( const TypeExpr& t )
{
    if ( t.kind == TypeKind::Callable ) return contains_any( t );
    return std::any_of( t.args.begin(), t.args.end(), contains_any_under_callable );
}

bool is_dict_like_head( std::string_view head ) { return contains( kTwoArgHeads, head ); }

bool has_any_dict_value( const TypeExpr& t )
{
    if ( t.kind == TypeKind::Union ) return std::any_of( t.args.begin(), t.args.end(), has_any_dict_value );
    return t.kind == TypeKind::Generic && is_dict_like_head( t.name ) && t.args.size() == 2 && contains_any( t.args[1] );
}

TypeExpr replace_any_with_type_vars( const TypeExpr& t )
{
    TypeExpr out     = t;
    int      counter = 0;
    replace_any( out, counter );
    return out;
}

}  // namespace anylens
