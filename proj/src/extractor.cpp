#include "anylens/extractor.hpp"

#include "anylens/python/parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <tuple>

namespace anylens
{

using python::Expr;
using python::Stmt;

bool IgnoreComment::has_code( std::string_view code ) const
{
    return std::find( codes.begin(), codes.end(), code ) != codes.end();
}

bool Declaration::has_explicit_annotation() const
{
    if ( return_annotation ) return true;
    return std::any_of( params.begin(), params.end(), []( const Parameter& p ) { return !p.is_implicit_any; } );
}

std::string_view to_string( UseTag tag )
{
    switch ( tag )
    {
        case UseTag::Iterated: return "iterated";
        case UseTag::LengthTaken: return "length_taken";
        case UseTag::MethodCalled: return "method_called";
        case UseTag::SubscriptedWithStringLiteral: return "subscripted_with_string_literal";
        case UseTag::SubscriptedOther: return "subscripted_other";
        case UseTag::MembershipTestedWithStringLiteral: return "membership_tested_with_string_literal";
        case UseTag::BinaryOpWith: return "binary_op_with";
        case UseTag::ReturnedDirectly: return "returned_directly";
        case UseTag::PassedAlong: return "passed_along";
        case UseTag::TruthTested: return "truth_tested";
        case UseTag::AttributeSet: return "attribute_set";
        case UseTag::Other: return "other";
    }
    return "other";
}

std::string_view to_string( ParameterKind kind )
{
    switch ( kind )
    {
        case ParameterKind::Positional: return "positional";
        case ParameterKind::KeywordOnly: return "keyword_only";
        case ParameterKind::VarPositional: return "var_positional";
        case ParameterKind::VarKeyword: return "var_keyword";
    }
    return "positional";
}

std::string module_name_for( std::string_view path )
{
    std::string p( path );
    std::replace( p.begin(), p.end(), '\\', '/' );
    for ( std::string_view ext : { ".pyi", ".py" } )
        if ( p.size() > ext.size() && p.compare( p.size() - ext.size(), ext.size(), ext ) == 0 )
        {
            p.resize( p.size() - ext.size() );
            break;
        }
    std::replace( p.begin(), p.end(), '/', '.' );
    const std::string init = ".__init__";
    if ( p.size() > init.size() && p.compare( p.size() - init.size(), init.size(), init ) == 0 )
        p.resize( p.size() - init.size() );
    return p;
}

namespace
{

std::string dotted_name( const Expr& e )
{
    if ( e.kind == Expr::Kind::Name ) return e.text;
    if ( e.kind == Expr::Kind::Attribute )
    {
        std::string base = dotted_name( e.children[0] );
        return base.empty() ? std::string {} : base + "." + e.text;
    }
    return {};
}

std::string collapse_whitespace( std::string_view text )
{
    std::string out;
    bool        pending_space = false;
    for ( char c : text )
    {
        if ( c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\\' )
        {
            pending_space = !out.empty();
            continue;
        }
        if ( pending_space ) out.push_back( ' ' );
        pending_space = false;
        out.push_back( c );
    }
    return out;
}

bool is_name( const Expr& e, const std::set<std::string>& names )
{
    return e.kind == Expr::Kind::Name && names.count( e.text ) > 0;
}

bool is_plain_string( const Expr& e ) { return e.kind == Expr::Kind::Str && !e.is_bytes && !e.is_fstring; }

// Collects parameter uses and call shapes in a function body, following
// closures into nested functions and lambdas unless the name is rebound
// there as a parameter.
class UseCollector
{
public:
    explicit UseCollector( BodyFacts& facts ) : facts_( facts ) {}

    void block( const std::vector<Stmt>& stmts, const std::set<std::string>& active )
    {
        if ( active.empty() ) return;
        for ( const auto& s : stmts ) statement( s, active );
    }

private:
    void record( const std::string& name, UseTag tag, std::string detail = {} )
    {
        facts_.param_uses[name].push_back( UseKind { tag, std::move( detail ) } );
    }

    // A load of `e` in a context that gives it `tag` if `e` is a tracked name;
    // otherwise the expression is walked.
    void operand( const Expr& e, const std::set<std::string>& active, UseTag tag, std::string detail = {} )
    {
        if ( is_name( e, active ) ) record( e.text, tag, std::move( detail ) );
        else expr( e, active );
    }

    void store( const Expr& target, const std::set<std::string>& active )
    {
        switch ( target.kind )
        {
            case Expr::Kind::Name: return;
            case Expr::Kind::Attribute:
                if ( is_name( target.children[0], active ) )
                    record( target.children[0].text, UseTag::AttributeSet, target.text );
                else expr( target.children[0], active );
                return;
            case Expr::Kind::Subscript:
                subscript( target, active );
                return;
            case Expr::Kind::Tuple:
            case Expr::Kind::List:
                for ( const auto& c : target.children ) store( c, active );
                return;
            case Expr::Kind::Starred:
                store( target.children[0], active );
                return;
            default: expr( target, active );
        }
    }

    void subscript( const Expr& e, const std::set<std::string>& active )
    {
        const Expr& value = e.children[0];
        const Expr& index = e.children[1];
        if ( is_name( value, active ) )
        {
            if ( is_plain_string( index ) ) record( value.text, UseTag::SubscriptedWithStringLiteral, index.text );
            else record( value.text, UseTag::SubscriptedOther );
        }
        else expr( value, active );
        operand( index, active, UseTag::Other );
    }

    void statement( const Stmt& s, const std::set<std::string>& active )
    {
        switch ( s.kind )
        {
            case Stmt::Kind::FunctionDef:
            {
                for ( const auto& d : s.decorators ) expr( d, active );
                for ( const auto& p : s.params )
                {
                    if ( p.default_value ) operand( *p.default_value, active, UseTag::Other );
                }
                std::set<std::string> inner = active;
                for ( const auto& p : s.params ) inner.erase( p.name );
                block( s.body, inner );
                return;
            }
            case Stmt::Kind::ClassDef:
                for ( const auto& b : s.exprs )
                    operand( b.kind == Expr::Kind::Keyword ? b.children[0] : b, active, UseTag::Other );
                block( s.body, active );
                return;
            case Stmt::Kind::Return:
                if ( !s.exprs.empty() ) operand( s.exprs[0], active, UseTag::ReturnedDirectly );
                return;
            case Stmt::Kind::If:
            case Stmt::Kind::While:
                operand( s.exprs[0], active, UseTag::TruthTested );
                block( s.body, active );
                block( s.orelse, active );
                return;
            case Stmt::Kind::For:
                store( s.exprs[0], active );
                operand( s.exprs[1], active, UseTag::Iterated );
                block( s.body, active );
                block( s.orelse, active );
                return;
            case Stmt::Kind::Try:
                block( s.body, active );
                for ( const auto& h : s.handlers )
                {
                    for ( const auto& e : h.exprs ) operand( e, active, UseTag::Other );
                    block( h.body, active );
                }
                block( s.orelse, active );
                block( s.finalbody, active );
                return;
            case Stmt::Kind::With:
                for ( const auto& item : s.exprs )
                {
                    operand( item.children[0], active, UseTag::Other );
                    if ( item.children.size() > 1 ) store( item.children[1], active );
                }
                block( s.body, active );
                return;
            case Stmt::Kind::Match:
                operand( s.exprs[0], active, UseTag::Other );
                for ( const auto& c : s.handlers )
                {
                    if ( c.exprs.size() > 1 ) operand( c.exprs[1], active, UseTag::TruthTested );
                    block( c.body, active );
                }
                return;
            case Stmt::Kind::Assign:
                for ( std::size_t i = 0; i + 1 < s.exprs.size(); ++i ) store( s.exprs[i], active );
                operand( s.exprs.back(), active, UseTag::Other );
                return;
            case Stmt::Kind::AnnAssign:
                store( s.exprs[0], active );
                if ( s.exprs.size() > 1 ) operand( s.exprs[1], active, UseTag::Other );
                return;
            case Stmt::Kind::AugAssign:
                if ( is_name( s.exprs[0], active ) ) record( s.exprs[0].text, UseTag::Other );
                else store( s.exprs[0], active );
                operand( s.exprs[1], active, UseTag::Other );
                return;
            case Stmt::Kind::Assert:
                operand( s.exprs[0], active, UseTag::TruthTested );
                if ( s.exprs.size() > 1 ) operand( s.exprs[1], active, UseTag::Other );
                return;
            case Stmt::Kind::Del:
                for ( const auto& e : s.exprs ) store( e, active );
                return;
            case Stmt::Kind::Raise:
            case Stmt::Kind::ExprStmt:
            case Stmt::Kind::TypeAlias:
                for ( const auto& e : s.exprs ) operand( e, active, UseTag::Other );
                return;
            default: return;
        }
    }

    void call( const Expr& e, const std::set<std::string>& active )
    {
        const Expr& func = e.children[0];
        if ( is_name( func, active ) )
        {
            CallShape shape;
            bool      leading = true;
            for ( std::size_t i = 1; i < e.children.size(); ++i )
            {
                const Expr& arg = e.children[i];
                if ( arg.kind == Expr::Kind::Starred ) shape.has_star_args = true;
                else if ( arg.kind == Expr::Kind::DoubleStarred ) shape.has_double_star_kwargs = true;
                if ( arg.kind != Expr::Kind::Starred && arg.kind != Expr::Kind::DoubleStarred &&
                     arg.kind != Expr::Kind::Keyword && leading )
                    ++shape.leading_positional_count;
                else leading = false;
            }
            facts_.param_call_sites[func.text].push_back( shape );
            record( func.text, UseTag::Other );
        }
        else if ( func.kind == Expr::Kind::Attribute && is_name( func.children[0], active ) )
            record( func.children[0].text, UseTag::MethodCalled, func.text );
        else expr( func, active );

        const bool is_len = func.kind == Expr::Kind::Name && func.text == "len" && e.children.size() == 2;
        for ( std::size_t i = 1; i < e.children.size(); ++i )
        {
            const Expr& arg = e.children[i];
            switch ( arg.kind )
            {
                case Expr::Kind::Starred: operand( arg.children[0], active, UseTag::Iterated ); break;
                case Expr::Kind::DoubleStarred:
                case Expr::Kind::Keyword: operand( arg.children[0], active, UseTag::PassedAlong ); break;
                default: operand( arg, active, is_len ? UseTag::LengthTaken : UseTag::PassedAlong );
            }
        }
    }

    void compare( const Expr& e, const std::set<std::string>& active )
    {
        const auto& xs = e.children;
        for ( std::size_t j = 0; j < xs.size(); ++j )
        {
            if ( !is_name( xs[j], active ) )
            {
                expr( xs[j], active );
                continue;
            }
            if ( j > 0 && ( e.ops[j - 1] == "in" || e.ops[j - 1] == "not in" ) && is_plain_string( xs[j - 1] ) )
                record( xs[j].text, UseTag::MembershipTestedWithStringLiteral, xs[j - 1].text );
            else if ( j > 0 && is_name( xs[j - 1], active ) )
                record( xs[j].text, UseTag::BinaryOpWith, xs[j - 1].text );
            else if ( j + 1 < xs.size() && is_name( xs[j + 1], active ) )
                record( xs[j].text, UseTag::BinaryOpWith, xs[j + 1].text );
            else record( xs[j].text, UseTag::Other );
        }
    }

    void comprehension( const Expr& e, const std::set<std::string>& active )
    {
        std::set<std::string> inner = active;
        bool                  first = true;
        for ( std::size_t i = 1; i < e.children.size(); ++i )
        {
            const Expr& clause = e.children[i];
            operand( clause.children[1], first ? active : inner, UseTag::Iterated );
            first = false;
            erase_bound( clause.children[0], inner );
            for ( std::size_t k = 2; k < clause.children.size(); ++k )
                operand( clause.children[k], inner, UseTag::TruthTested );
        }
        if ( !e.children.empty() ) operand( e.children[0], inner, UseTag::Other );
    }

    static void erase_bound( const Expr& target, std::set<std::string>& names )
    {
        if ( target.kind == Expr::Kind::Name ) names.erase( target.text );
        for ( const auto& c : target.children )
            if ( target.kind == Expr::Kind::Tuple || target.kind == Expr::Kind::List ||
                 target.kind == Expr::Kind::Starred )
                erase_bound( c, names );
    }

    void expr( const Expr& e, const std::set<std::string>& active )
    {
        if ( active.empty() ) return;
        switch ( e.kind )
        {
            case Expr::Kind::Name:
                if ( active.count( e.text ) ) record( e.text, UseTag::Other );
                return;
            case Expr::Kind::Call: return call( e, active );
            case Expr::Kind::Subscript: return subscript( e, active );
            case Expr::Kind::Compare: return compare( e, active );
            case Expr::Kind::Comprehension: return comprehension( e, active );
            case Expr::Kind::BinOp:
            {
                const Expr& lhs = e.children[0];
                const Expr& rhs = e.children[1];
                if ( is_name( lhs, active ) && is_name( rhs, active ) )
                {
                    record( lhs.text, UseTag::BinaryOpWith, rhs.text );
                    record( rhs.text, UseTag::BinaryOpWith, lhs.text );
                    return;
                }
                operand( lhs, active, UseTag::Other );
                operand( rhs, active, UseTag::Other );
                return;
            }
            case Expr::Kind::UnaryOp:
                operand( e.children[0], active, e.text == "not" ? UseTag::TruthTested : UseTag::Other );
                return;
            case Expr::Kind::BoolOp:
                for ( const auto& c : e.children ) operand( c, active, UseTag::TruthTested );
                return;
            case Expr::Kind::IfExp:
                operand( e.children[0], active, UseTag::TruthTested );
                operand( e.children[1], active, UseTag::Other );
                operand( e.children[2], active, UseTag::Other );
                return;
            case Expr::Kind::Starred: operand( e.children[0], active, UseTag::Iterated ); return;
            case Expr::Kind::Lambda:
            {
                for ( std::size_t i = 1; i < e.children.size(); ++i ) operand( e.children[i], active, UseTag::Other );
                std::set<std::string> inner = active;
                for ( const auto& n : e.names ) inner.erase( n );
                operand( e.children[0], inner, UseTag::Other );
                return;
            }
            case Expr::Kind::Str: return;
            default:
                for ( const auto& c : e.children ) operand( c, active, UseTag::Other );
        }
    }

    BodyFacts& facts_;
};

// Facts about the function's own scope: returns, yields and raise structure.
class ScopeFacts
{
public:
    ScopeFacts( BodyFacts& facts, std::string first_param ) : facts_( facts ), first_param_( std::move( first_param ) ) {}

    void block( const std::vector<Stmt>& stmts )
    {
        for ( const auto& s : stmts ) statement( s );
    }

private:
    void statement( const Stmt& s )
    {
        switch ( s.kind )
        {
            case Stmt::Kind::FunctionDef:
                for ( const auto& d : s.decorators ) expr( d );
                return;
            case Stmt::Kind::ClassDef:
                // Class bodies are their own scope for return/yield purposes.
                return;
            case Stmt::Kind::Return:
                ++facts_.total_return_statements;
                if ( !s.exprs.empty() )
                {
                    const Expr& v = s.exprs[0];
                    if ( !first_param_.empty() && v.kind == Expr::Kind::Name && v.text == first_param_ )
                        ++facts_.returns_of_first_param;
                    expr( v );
                }
                return;
            default: break;
        }
        for ( const auto& e : s.exprs ) expr( e );
        if ( s.annotation ) expr( *s.annotation );
        block( s.body );
        block( s.orelse );
        block( s.finalbody );
        for ( const auto& h : s.handlers )
        {
            for ( const auto& e : h.exprs ) expr( e );
            block( h.body );
        }
    }

    void expr( const Expr& e )
    {
        if ( e.kind == Expr::Kind::Yield || e.kind == Expr::Kind::YieldFrom ) facts_.has_yield = true;
        if ( e.kind == Expr::Kind::Lambda ) return;
        for ( const auto& c : e.children ) expr( c );
    }

    BodyFacts&  facts_;
    std::string first_param_;
};

bool terminates_in_raise( const std::vector<Stmt>& stmts );

bool statement_terminates( const Stmt& s )
{
    if ( s.kind == Stmt::Kind::Raise ) return true;
    if ( s.kind == Stmt::Kind::If )
        return !s.orelse.empty() && terminates_in_raise( s.body ) && terminates_in_raise( s.orelse );
    // Loops, try, with and match are treated as possibly falling through.
    return false;
}

bool terminates_in_raise( const std::vector<Stmt>& stmts )
{
    return std::any_of( stmts.begin(), stmts.end(), statement_terminates );
}

std::string canonical_module( std::string module )
{
    if ( module == "typing_extensions" ) return "typing";
    if ( module.rfind( "typing_extensions.", 0 ) == 0 ) return "typing" + module.substr( 17 );
    return module;
}

void collect_imports( const std::vector<Stmt>& stmts, AliasMap& out )
{
    for ( const auto& s : stmts )
    {
        if ( s.kind == Stmt::Kind::Import )
        {
            for ( const auto& n : s.imports )
            {
                if ( !n.alias.empty() ) out[n.alias] = canonical_module( n.dotted );
                else
                {
                    const std::string top = n.dotted.substr( 0, n.dotted.find( '.' ) );
                    out[top]              = canonical_module( top );
                }
            }
        }
        else if ( s.kind == Stmt::Kind::ImportFrom )
        {
            const std::string module = std::string( static_cast<std::size_t>( s.level ), '.' ) +
                                       ( s.level ? s.module : canonical_module( s.module ) );
            for ( const auto& n : s.imports )
            {
                if ( n.dotted == "*" ) continue;
                const std::string local = n.alias.empty() ? n.dotted : n.alias;
                out[local] = module.empty() || module.back() == '.' ? module + n.dotted : module + "." + n.dotted;
            }
        }
        collect_imports( s.body, out );
        collect_imports( s.orelse, out );
        collect_imports( s.finalbody, out );
        for ( const auto& h : s.handlers ) collect_imports( h.body, out );
    }
}

bool is_typevar_call( const Expr& value, const AliasMap& aliases )
{
    if ( value.kind != Expr::Kind::Call ) return false;
    const std::string callee = dotted_name( value.children[0] );
    return !callee.empty() && typing_member( callee, &aliases ) == "TypeVar";
}

// TypeVar targets anywhere outside function bodies.
void collect_typevar_names( const std::vector<Stmt>& stmts, const AliasMap& aliases, std::set<std::string>& out )
{
    for ( const auto& s : stmts )
    {
        if ( s.kind == Stmt::Kind::Assign && s.exprs.size() == 2 && s.exprs[0].kind == Expr::Kind::Name &&
             is_typevar_call( s.exprs[1], aliases ) )
            out.insert( s.exprs[0].text );
        if ( s.kind == Stmt::Kind::FunctionDef ) continue;
        collect_typevar_names( s.body, aliases, out );
        collect_typevar_names( s.orelse, aliases, out );
        collect_typevar_names( s.finalbody, aliases, out );
        for ( const auto& h : s.handlers ) collect_typevar_names( h.body, aliases, out );
    }
}

class Extractor
{
public:
    Extractor( FileModel& model, std::string_view source, const TypeContext& ctx )
        : model_( model ), source_( source ), ctx_( ctx )
    {
    }

    void run( const python::Module& module )
    {
        Scope top { ScopeKind::Module, model_.module_name.empty() ? std::string {} : model_.module_name + ".", nullptr };
        visit_block( module.body, top );
    }

private:
    enum class ScopeKind
    {
        Module,
        Class,
        Function,
    };

    struct Scope
    {
        ScopeKind   kind;
        std::string prefix;
        ClassDecl*  cls;
    };

    SourceLocation location( int line, int column ) const { return SourceLocation { model_.file_path, line, column }; }

    Annotation annotation( const Expr& e ) const
    {
        Annotation a;
        a.raw        = collapse_whitespace( python::source_of( source_, e ) );
        a.parsed     = type_from_ast( e, source_, ctx_ );
        a.normalized = normalize( a.parsed );
        return a;
    }

    std::string source_text( const Expr& e ) const { return collapse_whitespace( python::source_of( source_, e ) ); }

    void visit_block( const std::vector<Stmt>& stmts, const Scope& scope )
    {
        for ( const auto& s : stmts ) visit( s, scope );
    }

    void visit( const Stmt& s, const Scope& scope )
    {
        switch ( s.kind )
        {
            case Stmt::Kind::FunctionDef: function( s, scope ); return;
            case Stmt::Kind::ClassDef: class_def( s, scope ); return;
            case Stmt::Kind::Assign:
                if ( scope.kind != ScopeKind::Function ) typevar( s );
                return;
            case Stmt::Kind::AnnAssign:
                if ( scope.kind != ScopeKind::Function && s.exprs[0].kind == Expr::Kind::Name )
                {
                    VariableDecl v;
                    v.name           = s.exprs[0].text;
                    v.qualified_name = scope.prefix + v.name;
                    v.annotation     = annotation( *s.annotation );
                    v.location       = location( s.line, s.column );
                    model_.variables.push_back( std::move( v ) );
                }
                return;
            default: break;
        }
        visit_block( s.body, scope );
        visit_block( s.orelse, scope );
        visit_block( s.finalbody, scope );
        for ( const auto& h : s.handlers ) visit_block( h.body, scope );
    }

    void typevar( const Stmt& s )
    {
        if ( s.exprs.size() != 2 || s.exprs[0].kind != Expr::Kind::Name ) return;
        const Expr& call = s.exprs[1];
        if ( !is_typevar_call( call, *ctx_.aliases ) ) return;
        TypeVarDecl tv;
        tv.target_name = s.exprs[0].text;
        tv.location    = location( s.line, s.column );
        bool first     = true;
        for ( std::size_t i = 1; i < call.children.size(); ++i )
        {
            const Expr& arg = call.children[i];
            if ( arg.kind == Expr::Kind::Keyword )
            {
                if ( arg.text == "bound" ) tv.bound = source_text( arg.children[0] );
                continue;
            }
            if ( arg.kind == Expr::Kind::Starred || arg.kind == Expr::Kind::DoubleStarred ) continue;
            if ( first )
            {
                tv.declared_name = arg.kind == Expr::Kind::Str ? arg.text : source_text( arg );
                first            = false;
                continue;
            }
            tv.constraints.push_back( source_text( arg ) );
        }
        model_.typevars.push_back( std::move( tv ) );
    }

    static bool has_decorator( const std::vector<std::string>& decorators, std::string_view name )
    {
        return std::any_of( decorators.begin(), decorators.end(), [&]( const std::string& d ) {
            return d == name || ( d.size() > name.size() && d.compare( d.size() - name.size(), name.size(), name ) == 0 &&
                                  d[d.size() - name.size() - 1] == '.' );
        } );
    }

    void function( const Stmt& s, const Scope& scope )
    {
        Declaration d;
        d.name           = s.name;
        d.qualified_name = scope.prefix + s.name;
        d.is_async       = s.is_async;
        d.is_nested      = scope.kind == ScopeKind::Function;
        d.location       = location( s.line, s.column );
        for ( const auto& dec : s.decorators )
        {
            const Expr& target = dec.kind == Expr::Kind::Call ? dec.children[0] : dec;
            std::string name   = dotted_name( target );
            d.decorators.push_back( name.empty() ? source_text( dec ) : name );
        }
        d.is_method = scope.kind == ScopeKind::Class && !has_decorator( d.decorators, "staticmethod" );

        for ( const auto& p : s.params )
        {
            Parameter param;
            param.name = p.name;
            switch ( p.kind )
            {
                case python::ParamKind::Positional: param.kind = ParameterKind::Positional; break;
                case python::ParamKind::KeywordOnly: param.kind = ParameterKind::KeywordOnly; break;
                case python::ParamKind::VarPositional: param.kind = ParameterKind::VarPositional; break;
                case python::ParamKind::VarKeyword: param.kind = ParameterKind::VarKeyword; break;
            }
            if ( p.annotation )
            {
                param.annotation      = annotation( *p.annotation );
                param.is_implicit_any = false;
            }
            d.params.push_back( std::move( param ) );
        }
        if ( s.returns ) d.return_annotation = annotation( *s.returns );

        const std::string first_param =
            !d.params.empty() && d.params[0].kind == ParameterKind::Positional ? d.params[0].name : std::string {};
        ScopeFacts( d.body_facts, first_param ).block( s.body );
        d.body_facts.all_paths_raise = !d.body_facts.has_yield && d.body_facts.total_return_statements == 0 &&
                                       terminates_in_raise( s.body );
        std::set<std::string> names;
        for ( const auto& p : d.params ) names.insert( p.name );
        UseCollector( d.body_facts ).block( s.body, names );

        for ( const auto& ignore : model_.ignores )
            if ( ignore.location.line >= s.line && ignore.location.line <= s.header_end_line )
            {
                d.trailing_ignore = ignore;
                break;
            }

        if ( scope.kind == ScopeKind::Class && scope.cls ) scope.cls->methods.push_back( d );
        const std::string inner_prefix = d.qualified_name + ".<locals>.";
        model_.declarations.push_back( std::move( d ) );

        Scope inner { ScopeKind::Function, inner_prefix, nullptr };
        visit_block( s.body, inner );
    }

    void class_def( const Stmt& s, const Scope& scope )
    {
        ClassDecl c;
        c.qualified_name = scope.prefix + s.name;
        c.location       = location( s.line, s.column );
        for ( const auto& b : s.exprs )
        {
            if ( b.kind == Expr::Kind::Keyword || b.kind == Expr::Kind::Starred || b.kind == Expr::Kind::DoubleStarred )
                continue;
            const Expr& head = b.kind == Expr::Kind::Subscript ? b.children[0] : b;
            std::string name = dotted_name( head );
            c.base_names.push_back( name.empty() ? source_text( b ) : name );
        }
        // Methods are appended while visiting the body; the class is stored
        // afterwards so nested classes keep a stable order by location.
        Scope inner { ScopeKind::Class, c.qualified_name + ".", &c };
        visit_block( s.body, inner );
        model_.classes.push_back( std::move( c ) );
    }

    FileModel&         model_;
    std::string_view   source_;
    const TypeContext& ctx_;
};

bool declares_foreign_encoding( std::string_view source )
{
    // Only the first two lines may carry an encoding declaration.
    std::size_t start = 0;
    for ( int line = 0; line < 2 && start < source.size(); ++line )
    {
        std::size_t end = source.find( '\n', start );
        if ( end == std::string_view::npos ) end = source.size();
        std::string_view text = source.substr( start, end - start );
        start                 = end + 1;
        const auto hash       = text.find( '#' );
        if ( hash == std::string_view::npos || text.find_first_not_of( " \t\f" ) != hash ) continue;
        const auto key = text.find( "coding", hash );
        if ( key == std::string_view::npos ) continue;
        std::size_t i = key + 6;
        if ( i >= text.size() || ( text[i] != ':' && text[i] != '=' ) ) continue;
        ++i;
        while ( i < text.size() && ( text[i] == ' ' || text[i] == '\t' ) ) ++i;
        std::string name;
        while ( i < text.size() && ( std::isalnum( static_cast<unsigned char>( text[i] ) ) || text[i] == '-' ||
                                     text[i] == '_' || text[i] == '.' ) )
            name.push_back( static_cast<char>( std::tolower( static_cast<unsigned char>( text[i++] ) ) ) );
        std::replace( name.begin(), name.end(), '_', '-' );
        return !( name == "utf-8" || name == "utf8" || name.rfind( "utf-8-", 0 ) == 0 );
    }
    return false;
}

std::string normalize_path( std::string_view path )
{
    std::string p( path );
    std::replace( p.begin(), p.end(), '\\', '/' );
    while ( p.rfind( "./", 0 ) == 0 ) p.erase( 0, 2 );
    return p;
}

}  // namespace

std::vector<IgnoreComment> scan_ignore_comments( std::string_view source, std::string_view file_path )
{
    std::vector<IgnoreComment> out;
    const std::string          path = normalize_path( file_path );
    for ( const auto& comment : python::scan_comments( source ) )
    {
        const std::string_view text = comment.text;
        for ( std::size_t hash = text.find( '#' ); hash != std::string_view::npos; hash = text.find( '#', hash + 1 ) )
        {
            std::size_t i    = hash + 1;
            auto        skip = [&] {
                while ( i < text.size() && ( text[i] == ' ' || text[i] == '\t' ) ) ++i;
            };
            skip();
            if ( text.substr( i, 5 ) != "type:" ) continue;
            i += 5;
            skip();
            if ( text.substr( i, 6 ) != "ignore" ) continue;
            i += 6;
            if ( i < text.size() && ( std::isalnum( static_cast<unsigned char>( text[i] ) ) || text[i] == '_' ) ) continue;

            IgnoreComment ignore;
            ignore.location = SourceLocation { path, comment.line, comment.column + static_cast<int>( hash ) };
            skip();
            if ( i < text.size() && text[i] == '[' )
            {
                const auto close = text.find( ']', i );
                if ( close != std::string_view::npos )
                {
                    std::string_view list = text.substr( i + 1, close - i - 1 );
                    std::size_t      pos  = 0;
                    while ( pos <= list.size() )
                    {
                        std::size_t comma = list.find( ',', pos );
                        if ( comma == std::string_view::npos ) comma = list.size();
                        std::string code;
                        for ( char c : list.substr( pos, comma - pos ) )
                            if ( c != ' ' && c != '\t' )
                                code.push_back( static_cast<char>( std::tolower( static_cast<unsigned char>( c ) ) ) );
                        if ( !code.empty() ) ignore.codes.push_back( std::move( code ) );
                        pos = comma + 1;
                    }
                }
            }
            out.push_back( std::move( ignore ) );
            break;
        }
    }
    return out;
}

AliasMap resolve_import_aliases( const python::Module& module )
{
    AliasMap aliases;
    collect_imports( module.body, aliases );
    return aliases;
}

AliasMap resolve_import_aliases( std::string_view source )
{
    try
    {
        return resolve_import_aliases( python::parse_module( source ) );
    }
    catch ( const python::SyntaxError& )
    {
        return {};
    }
}

FileModel parse_source_file( std::string_view path, std::string_view source )
{
    FileModel model;
    model.file_path   = normalize_path( path );
    model.module_name = module_name_for( model.file_path );
    try
    {
        if ( !python::is_valid_utf8( source ) ) throw python::SyntaxError( "source is not valid UTF-8", 1, 0 );
        if ( source.substr( 0, 3 ) == "\xEF\xBB\xBF" ) source.remove_prefix( 3 );
        if ( declares_foreign_encoding( source ) )
            throw python::SyntaxError( "unsupported source encoding (only UTF-8 is accepted)", 1, 0 );

        const python::Module module = python::parse_module( source );
        model.ignores               = scan_ignore_comments( source, model.file_path );
        model.import_aliases        = resolve_import_aliases( module );
        std::set<std::string> typevar_names;
        collect_typevar_names( module.body, model.import_aliases, typevar_names );
        TypeContext ctx { &model.import_aliases, &typevar_names };
        Extractor( model, source, ctx ).run( module );

        const auto by_location = []( const auto& a, const auto& b ) { return a.location < b.location; };
        std::stable_sort( model.declarations.begin(), model.declarations.end(), by_location );
        std::stable_sort( model.classes.begin(), model.classes.end(), by_location );
    }
    catch ( const python::SyntaxError& e )
    {
        FileModel failed;
        failed.file_path      = model.file_path;
        failed.module_name    = model.module_name;
        failed.failed         = true;
        failed.failure_reason = "line " + std::to_string( e.line() ) + ": " + e.what();
        return failed;
    }
    catch ( const std::exception& e )
    {
        FileModel failed;
        failed.file_path      = model.file_path;
        failed.module_name    = model.module_name;
        failed.failed         = true;
        failed.failure_reason = std::string( "internal error: " ) + e.what();
        return failed;
    }
    return model;
}

ProjectModel merge_models( std::string project_id, std::vector<FileModel> files )
{
    std::sort( files.begin(), files.end(),
               []( const FileModel& a, const FileModel& b ) { return a.file_path < b.file_path; } );
    for ( std::size_t i = 1; i < files.size(); ++i )
        if ( files[i].file_path == files[i - 1].file_path ) throw DuplicatePathError( files[i].file_path );

    ProjectModel project;
    project.project_id = std::move( project_id );
    for ( auto& f : files )
    {
        project.files.push_back( f.file_path );
        if ( f.failed )
        {
            ++project.files_failed;
            project.failures.push_back( ParseFailure { f.file_path, f.failure_reason } );
            continue;
        }
        ++project.files_parsed;
        auto append = []( auto& into, auto& from ) {
            into.insert( into.end(), std::make_move_iterator( from.begin() ), std::make_move_iterator( from.end() ) );
        };
        append( project.declarations, f.declarations );
        append( project.classes, f.classes );
        append( project.typevars, f.typevars );
        append( project.variables, f.variables );
        append( project.ignores, f.ignores );
        project.import_aliases[f.file_path] = std::move( f.import_aliases );
    }
    return project;
}

namespace
{

std::vector<const ClassDecl*> find_base_candidates( const ProjectModel& model, const ClassDecl& cls,
                                                    const std::string& base )
{
    std::string canonical = base;
    if ( auto file = model.import_aliases.find( cls.location.file_path ); file != model.import_aliases.end() )
    {
        const auto dot   = base.find( '.' );
        const auto first = base.substr( 0, dot );
        if ( auto it = file->second.find( first ); it != file->second.end() )
            canonical = it->second + ( dot == std::string::npos ? "" : base.substr( dot ) );
    }
    while ( !canonical.empty() && canonical.front() == '.' ) canonical.erase( 0, 1 );

    const std::string module    = module_name_for( cls.location.file_path );
    const std::string same_file = module.empty() ? base : module + "." + base;

    std::vector<const ClassDecl*> local, suffix;
    auto ends_with_segment = []( const std::string& name, const std::string& tail ) {
        if ( tail.empty() || name.size() < tail.size() ) return false;
        if ( name.compare( name.size() - tail.size(), tail.size(), tail ) != 0 ) return false;
        return name.size() == tail.size() || name[name.size() - tail.size() - 1] == '.';
    };
    for ( const auto& candidate : model.classes )
    {
        if ( &candidate == &cls || candidate.qualified_name == cls.qualified_name ) continue;
        if ( candidate.qualified_name == same_file ) local.push_back( &candidate );
        else if ( ends_with_segment( candidate.qualified_name, canonical ) ||
                  ends_with_segment( candidate.qualified_name, base ) )
            suffix.push_back( &candidate );
    }
    auto by_name = []( const ClassDecl* a, const ClassDecl* b ) {
        return std::tie( a->qualified_name, a->location ) < std::tie( b->qualified_name, b->location );
    };
    std::sort( local.begin(), local.end(), by_name );
    std::sort( suffix.begin(), suffix.end(), by_name );
    local.insert( local.end(), suffix.begin(), suffix.end() );
    return local;
}

struct ParentSearch
{
    const ProjectModel&           model;
    std::string_view              method;
    std::vector<std::string>      path;
    bool                          unresolved = false;
    std::string                   note;

    ParentLookup search( const ClassDecl& cls )
    {
        if ( path.size() > 64 )
        {
            unresolved = true;
            note       = "inheritance chain too deep";
            return {};
        }
        for ( const auto& base : cls.base_names )
        {
            const auto candidates = find_base_candidates( model, cls, base );
            if ( candidates.empty() )
            {
                unresolved = true;
                continue;
            }
            const ClassDecl& parent = *candidates.front();
            if ( std::find( path.begin(), path.end(), parent.qualified_name ) != path.end() )
            {
                unresolved = true;
                note       = "cycle in base classes through " + parent.qualified_name;
                continue;
            }
            for ( const auto& m : parent.methods )
                if ( m.name == method )
                    return ParentLookup { ParentLookup::Status::Found, &m, &parent, {} };
            path.push_back( parent.qualified_name );
            ParentLookup deeper = search( parent );
            path.pop_back();
            if ( deeper.status == ParentLookup::Status::Found ) return deeper;
        }
        return {};
    }
};

}  // namespace

ParentLookup resolve_parent_method( const ProjectModel& model, const ClassDecl& cls, std::string_view method )
{
    ParentSearch search { model, method, { cls.qualified_name }, false, {} };
    ParentLookup found = search.search( cls );
    if ( found.status == ParentLookup::Status::Found ) return found;
    ParentLookup result;
    result.status = search.unresolved ? ParentLookup::Status::ParentClassUnresolved
                                      : ParentLookup::Status::MethodNotInAncestors;
    result.note   = search.note;
    return result;
}

}  // namespace anylens
