#include "anylens/python/parser.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string>

namespace anylens::python
{

namespace
{

constexpr std::array<std::string_view, 35> kKeywords {
    "False", "None",   "True",    "and",      "as",     "assert", "async", "await", "break",
    "class", "continue", "def",   "del",      "elif",   "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",     "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",    "while",  "with",  "yield",
};

bool is_keyword( std::string_view word )
{
    return std::find( kKeywords.begin(), kKeywords.end(), word ) != kKeywords.end();
}

constexpr int kMaxDepth = 1000;

std::string decode_string_body( std::string_view token, bool& is_bytes, bool& is_fstring )
{
    std::size_t prefix_len = 0;
    bool        raw        = false;
    while ( prefix_len < token.size() && token[prefix_len] != '\'' && token[prefix_len] != '"' )
    {
        const char c = token[prefix_len];
        if ( c == 'r' || c == 'R' ) raw = true;
        if ( c == 'b' || c == 'B' ) is_bytes = true;
        if ( c == 'f' || c == 'F' ) is_fstring = true;
        ++prefix_len;
    }
    std::string_view body = token.substr( prefix_len );
    const std::size_t quote_len =
        body.size() >= 6 && body[0] == body[1] && body[1] == body[2] ? 3 : 1;
    body = body.substr( quote_len, body.size() - 2 * quote_len );
    if ( raw || is_fstring ) return std::string( body );

    std::string out;
    out.reserve( body.size() );
    for ( std::size_t i = 0; i < body.size(); ++i )
    {
        if ( body[i] != '\\' || i + 1 >= body.size() )
        {
            out.push_back( body[i] );
            continue;
        }
        const char e = body[++i];
        switch ( e )
        {
            case 'n': out.push_back( '\n' ); break;
            case 't': out.push_back( '\t' ); break;
            case 'r': out.push_back( '\r' ); break;
            case '0': out.push_back( '\0' ); break;
            case '\\': out.push_back( '\\' ); break;
            case '\'': out.push_back( '\'' ); break;
            case '"': out.push_back( '"' ); break;
            case '\n': break;
            default:
                out.push_back( '\\' );
                out.push_back( e );
        }
    }
    return out;
}

class Parser
{
public:
    explicit Parser( std::vector<Token> tokens ) : tokens_( std::move( tokens ) ) {}

    Module parse_file()
    {
        Module module;
        while ( !at( TokenKind::EndOfFile ) )
        {
            if ( at( TokenKind::Newline ) )
            {
                advance();
                continue;
            }
            if ( at( TokenKind::Indent ) ) fail( "unexpected indent" );
            parse_statement( module.body );
        }
        return module;
    }

    Expr parse_standalone_expression()
    {
        while ( at( TokenKind::Newline ) || at( TokenKind::Indent ) ) advance();
        Expr e = parse_star_expressions();
        while ( at( TokenKind::Newline ) || at( TokenKind::Dedent ) ) advance();
        if ( !at( TokenKind::EndOfFile ) ) fail( "unexpected trailing tokens" );
        return e;
    }

private:
    struct DepthGuard
    {
        explicit DepthGuard( Parser& p ) : parser( p )
        {
            if ( ++parser.depth_ > kMaxDepth ) parser.fail( "too many nested expressions or blocks" );
        }
        ~DepthGuard() { --parser.depth_; }
        DepthGuard( const DepthGuard& )            = delete;
        DepthGuard& operator=( const DepthGuard& ) = delete;
        Parser& parser;
    };

    // --- token helpers ---------------------------------------------------

    const Token& peek( std::size_t ahead = 0 ) const
    {
        const std::size_t i = std::min( pos_ + ahead, tokens_.size() - 1 );
        return tokens_[i];
    }

    bool at( TokenKind kind ) const { return peek().kind == kind; }

    bool at_op( std::string_view op, std::size_t ahead = 0 ) const
    {
        const Token& t = peek( ahead );
        return t.kind == TokenKind::Op && t.text == op;
    }

    bool at_name( std::string_view word, std::size_t ahead = 0 ) const
    {
        const Token& t = peek( ahead );
        return t.kind == TokenKind::Name && t.text == word;
    }

    const Token& advance()
    {
        const Token& t = tokens_[pos_];
        if ( pos_ + 1 < tokens_.size() ) ++pos_;
        prev_end_ = t.end;
        return t;
    }

    [[noreturn]] void fail( const std::string& message ) const
    {
        const Token& t = peek();
        throw SyntaxError( message, t.line, t.column );
    }

    [[noreturn]] void fail_unexpected() const
    {
        const Token& t = peek();
        switch ( t.kind )
        {
            case TokenKind::Newline: fail( "invalid syntax: unexpected end of line" );
            case TokenKind::Indent: fail( "unexpected indent" );
            case TokenKind::Dedent: fail( "unexpected unindent" );
            case TokenKind::EndOfFile: fail( "unexpected end of file" );
            default: fail( "invalid syntax near '" + std::string( t.text ) + "'" );
        }
    }

    void expect_op( std::string_view op )
    {
        if ( !at_op( op ) ) fail( "expected '" + std::string( op ) + "'" );
        advance();
    }

    void expect_name( std::string_view word )
    {
        if ( !at_name( word ) ) fail( "expected '" + std::string( word ) + "'" );
        advance();
    }

    std::string expect_identifier()
    {
        const Token& t = peek();
        if ( t.kind != TokenKind::Name || is_keyword( t.text ) ) fail( "expected an identifier" );
        advance();
        return std::string( t.text );
    }

    void expect( TokenKind kind, const char* what )
    {
        if ( !at( kind ) ) fail( std::string( "expected " ) + what );
        advance();
    }

    bool at_simple_end() const { return at( TokenKind::Newline ) || at_op( ";" ) || at( TokenKind::EndOfFile ); }

    bool can_start_expression() const
    {
        const Token& t = peek();
        switch ( t.kind )
        {
            case TokenKind::Number:
            case TokenKind::String: return true;
            case TokenKind::Name:
                return !is_keyword( t.text ) || t.text == "None" || t.text == "True" || t.text == "False" ||
                       t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "yield";
            case TokenKind::Op:
                return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
                       t.text == "~" || t.text == "*" || t.text == "..." || t.text == "**";
            default: return false;
        }
    }

    Expr make( Expr::Kind kind, const Token& start ) const
    {
        Expr e;
        e.kind   = kind;
        e.line   = start.line;
        e.column = start.column;
        e.begin  = start.begin;
        e.end    = start.end;
        return e;
    }

    Expr wrap( Expr::Kind kind, Expr first ) const
    {
        Expr e;
        e.kind   = kind;
        e.line   = first.line;
        e.column = first.column;
        e.begin  = first.begin;
        e.children.push_back( std::move( first ) );
        return e;
    }

    void finish( Expr& e ) const { e.end = std::max( e.begin, prev_end_ ); }

    // --- statements ------------------------------------------------------

    void parse_statement( std::vector<Stmt>& out )
    {
        DepthGuard guard( *this );
        const Token& t = peek();
        if ( at_op( "@" ) )
        {
            std::vector<Expr> decorators;
            while ( at_op( "@" ) )
            {
                advance();
                decorators.push_back( parse_namedexpr_test() );
                expect( TokenKind::Newline, "newline after decorator" );
            }
            Stmt s;
            if ( at_name( "def" ) ) s = parse_funcdef( false );
            else if ( at_name( "async" ) && at_name( "def", 1 ) )
            {
                advance();
                s = parse_funcdef( true );
            }
            else if ( at_name( "class" ) ) s = parse_classdef();
            else fail( "expected a function or class after decorators" );
            s.decorators = std::move( decorators );
            out.push_back( std::move( s ) );
            return;
        }
        if ( t.kind == TokenKind::Name )
        {
            const std::string_view w = t.text;
            if ( w == "def" ) return out.push_back( parse_funcdef( false ) );
            if ( w == "class" ) return out.push_back( parse_classdef() );
            if ( w == "if" ) return out.push_back( parse_if() );
            if ( w == "while" ) return out.push_back( parse_while() );
            if ( w == "for" ) return out.push_back( parse_for( false ) );
            if ( w == "try" ) return out.push_back( parse_try() );
            if ( w == "with" ) return out.push_back( parse_with( false ) );
            if ( w == "async" )
            {
                if ( at_name( "def", 1 ) )
                {
                    advance();
                    return out.push_back( parse_funcdef( true ) );
                }
                if ( at_name( "for", 1 ) )
                {
                    advance();
                    return out.push_back( parse_for( true ) );
                }
                if ( at_name( "with", 1 ) )
                {
                    advance();
                    return out.push_back( parse_with( true ) );
                }
                fail_unexpected();
            }
            if ( w == "match" && !at_op( "=", 1 ) && !at_op( ".", 1 ) )
            {
                if ( auto m = try_parse_match() )
                {
                    out.push_back( std::move( *m ) );
                    return;
                }
            }
            if ( w == "elif" || w == "else" || w == "except" || w == "finally" )
                fail( "invalid syntax: '" + std::string( w ) + "' without matching block" );
        }
        parse_simple_statements( out );
    }

    Stmt start_stmt( Stmt::Kind kind ) const
    {
        Stmt s;
        s.kind   = kind;
        s.line   = peek().line;
        s.column = peek().column;
        return s;
    }

    void parse_block( Stmt& owner, std::vector<Stmt>& body )
    {
        if ( !at_op( ":" ) ) fail( "expected ':'" );
        owner.header_end_line = std::max( owner.header_end_line, peek().line );
        advance();
        if ( at( TokenKind::Newline ) )
        {
            advance();
            if ( !at( TokenKind::Indent ) ) fail( "expected an indented block" );
            advance();
            while ( !at( TokenKind::Dedent ) && !at( TokenKind::EndOfFile ) ) parse_statement( body );
            if ( at( TokenKind::Dedent ) ) advance();
            return;
        }
        parse_simple_statements( body );
    }

    void skip_type_params()
    {
        if ( !at_op( "[" ) ) return;
        int depth = 0;
        do
        {
            if ( at_op( "[" ) ) ++depth;
            else if ( at_op( "]" ) ) --depth;
            else if ( at( TokenKind::EndOfFile ) || at( TokenKind::Newline ) ) fail( "unterminated type parameter list" );
            advance();
        } while ( depth > 0 );
    }

    Stmt parse_funcdef( bool is_async )
    {
        Stmt s     = start_stmt( Stmt::Kind::FunctionDef );
        s.is_async = is_async;
        if ( is_async )
        {
            // `async` was consumed; report the location of `async`.
            const Token& prev = tokens_[pos_ - 1];
            s.line            = prev.line;
            s.column          = prev.column;
        }
        expect_name( "def" );
        s.name = expect_identifier();
        skip_type_params();
        expect_op( "(" );
        s.params = parse_parameters( ")", true );
        expect_op( ")" );
        if ( at_op( "->" ) )
        {
            advance();
            s.returns = parse_test();
        }
        s.header_end_line = s.line;
        parse_block( s, s.body );
        return s;
    }

    std::vector<Param> parse_parameters( std::string_view closer, bool allow_annotations )
    {
        std::vector<Param>    params;
        std::set<std::string> seen;
        bool                  star_seen = false, kwargs_seen = false;
        std::size_t           checked   = 0;
        while ( !at_op( closer ) )
        {
            if ( kwargs_seen ) fail( "arguments cannot follow var-keyword argument" );
            Param p;
            p.line   = peek().line;
            p.column = peek().column;
            if ( at_op( "/" ) )
            {
                advance();
                if ( star_seen ) fail( "/ must be ahead of *" );
            }
            else if ( at_op( "*" ) )
            {
                if ( star_seen ) fail( "* argument may appear only once" );
                star_seen = true;
                advance();
                if ( at_op( "," ) || at_op( closer ) )
                {
                    if ( at_op( closer ) ) fail( "named arguments must follow bare *" );
                }
                else
                {
                    p.name = expect_identifier();
                    p.kind = ParamKind::VarPositional;
                    if ( allow_annotations && at_op( ":" ) )
                    {
                        advance();
                        p.annotation = at_op( "*" ) ? parse_star_expression() : parse_test();
                    }
                    params.push_back( std::move( p ) );
                }
            }
            else if ( at_op( "**" ) )
            {
                advance();
                p.name = expect_identifier();
                p.kind = ParamKind::VarKeyword;
                if ( allow_annotations && at_op( ":" ) )
                {
                    advance();
                    p.annotation = parse_test();
                }
                kwargs_seen = true;
                params.push_back( std::move( p ) );
            }
            else
            {
                p.name = expect_identifier();
                p.kind = star_seen ? ParamKind::KeywordOnly : ParamKind::Positional;
                if ( allow_annotations && at_op( ":" ) )
                {
                    advance();
                    p.annotation = parse_test();
                }
                if ( at_op( "=" ) )
                {
                    advance();
                    p.default_value = parse_test();
                }
                params.push_back( std::move( p ) );
            }
            if ( params.size() > checked )
            {
                checked = params.size();
                if ( !seen.insert( params.back().name ).second )
                    fail( "duplicate argument '" + params.back().name + "' in function definition" );
            }
            if ( at_op( "," ) )
            {
                advance();
                continue;
            }
            if ( !at_op( closer ) ) fail_unexpected();
        }
        return params;
    }

    Stmt parse_classdef()
    {
        Stmt s = start_stmt( Stmt::Kind::ClassDef );
        expect_name( "class" );
        s.name = expect_identifier();
        skip_type_params();
        if ( at_op( "(" ) )
        {
            advance();
            s.exprs = parse_call_arguments();
            expect_op( ")" );
        }
        s.header_end_line = s.line;
        parse_block( s, s.body );
        return s;
    }

    Stmt parse_if()
    {
        Stmt s = start_stmt( Stmt::Kind::If );
        advance();  // if / elif
        s.exprs.push_back( parse_namedexpr_test() );
        s.header_end_line = s.line;
        parse_block( s, s.body );
        if ( at_name( "elif" ) ) s.orelse.push_back( parse_if() );
        else if ( at_name( "else" ) )
        {
            advance();
            parse_block( s, s.orelse );
        }
        return s;
    }

    Stmt parse_while()
    {
        Stmt s = start_stmt( Stmt::Kind::While );
        advance();
        s.exprs.push_back( parse_namedexpr_test() );
        s.header_end_line = s.line;
        parse_block( s, s.body );
        if ( at_name( "else" ) )
        {
            advance();
            parse_block( s, s.orelse );
        }
        return s;
    }

    Stmt parse_for( bool is_async )
    {
        Stmt s     = start_stmt( Stmt::Kind::For );
        s.is_async = is_async;
        expect_name( "for" );
        s.exprs.push_back( parse_target_list() );
        expect_name( "in" );
        s.exprs.push_back( parse_star_expressions() );
        s.header_end_line = s.line;
        parse_block( s, s.body );
        if ( at_name( "else" ) )
        {
            advance();
            parse_block( s, s.orelse );
        }
        return s;
    }

    Stmt parse_try()
    {
        Stmt s = start_stmt( Stmt::Kind::Try );
        expect_name( "try" );
        s.header_end_line = s.line;
        parse_block( s, s.body );
        while ( at_name( "except" ) )
        {
            Stmt h = start_stmt( Stmt::Kind::ExceptHandler );
            advance();
            if ( at_op( "*" ) ) advance();
            if ( !at_op( ":" ) )
            {
                h.exprs.push_back( parse_test() );
                if ( at_name( "as" ) )
                {
                    advance();
                    h.name = expect_identifier();
                }
            }
            h.header_end_line = h.line;
            parse_block( h, h.body );
            s.handlers.push_back( std::move( h ) );
        }
        if ( at_name( "else" ) )
        {
            if ( s.handlers.empty() ) fail( "expected 'except' or 'finally' block" );
            advance();
            parse_block( s, s.orelse );
        }
        if ( at_name( "finally" ) )
        {
            advance();
            parse_block( s, s.finalbody );
        }
        if ( s.handlers.empty() && s.finalbody.empty() ) fail( "expected 'except' or 'finally' block" );
        return s;
    }

    void parse_with_item( Stmt& s )
    {
        Expr item = wrap( Expr::Kind::WithItem, parse_test() );
        if ( at_name( "as" ) )
        {
            advance();
            item.children.push_back( parse_star_target() );
        }
        finish( item );
        s.exprs.push_back( std::move( item ) );
    }

    Stmt parse_with( bool is_async )
    {
        Stmt s     = start_stmt( Stmt::Kind::With );
        s.is_async = is_async;
        expect_name( "with" );
        bool parsed = false;
        if ( at_op( "(" ) )
        {
            const std::size_t saved      = pos_;
            const std::size_t saved_end  = prev_end_;
            try
            {
                Stmt probe = s;
                advance();
                while ( !at_op( ")" ) )
                {
                    parse_with_item( probe );
                    if ( at_op( "," ) ) advance();
                    else break;
                }
                expect_op( ")" );
                if ( !at_op( ":" ) ) fail( "expected ':'" );
                s      = std::move( probe );
                parsed = true;
            }
            catch ( const SyntaxError& )
            {
                pos_      = saved;
                prev_end_ = saved_end;
            }
        }
        if ( !parsed )
        {
            parse_with_item( s );
            while ( at_op( "," ) )
            {
                advance();
                parse_with_item( s );
            }
        }
        s.header_end_line = s.line;
        parse_block( s, s.body );
        return s;
    }

    std::optional<Stmt> try_parse_match()
    {
        const std::size_t saved     = pos_;
        const std::size_t saved_end = prev_end_;
        Stmt              s         = start_stmt( Stmt::Kind::Match );
        try
        {
            advance();
            s.exprs.push_back( parse_star_expressions() );
            if ( !at_op( ":" ) ) fail( "expected ':'" );
            s.header_end_line = peek().line;
            advance();
            expect( TokenKind::Newline, "newline" );
            expect( TokenKind::Indent, "indent" );
            if ( !at_name( "case" ) ) fail( "expected 'case'" );
        }
        catch ( const SyntaxError& )
        {
            pos_      = saved;
            prev_end_ = saved_end;
            return std::nullopt;
        }
        while ( at_name( "case" ) )
        {
            Stmt c = start_stmt( Stmt::Kind::MatchCase );
            advance();
            in_pattern_ = true;
            c.exprs.push_back( parse_star_expressions() );
            in_pattern_ = false;
            if ( at_name( "if" ) )
            {
                advance();
                c.exprs.push_back( parse_namedexpr_test() );
            }
            c.header_end_line = c.line;
            parse_block( c, c.body );
            s.handlers.push_back( std::move( c ) );
        }
        if ( !at( TokenKind::Dedent ) ) fail( "expected 'case'" );
        advance();
        return s;
    }

    void parse_simple_statements( std::vector<Stmt>& out )
    {
        while ( true )
        {
            out.push_back( parse_small_statement() );
            if ( at_op( ";" ) )
            {
                advance();
                if ( at( TokenKind::Newline ) || at( TokenKind::EndOfFile ) ) break;
                continue;
            }
            break;
        }
        if ( at( TokenKind::EndOfFile ) ) return;
        if ( !at( TokenKind::Newline ) ) fail_unexpected();
        advance();
    }

    Stmt parse_small_statement()
    {
        const Token& t = peek();
        if ( t.kind == TokenKind::Name )
        {
            const std::string_view w = t.text;
            if ( w == "pass" || w == "break" || w == "continue" )
            {
                Stmt s = start_stmt( w == "pass" ? Stmt::Kind::Pass : w == "break" ? Stmt::Kind::Break
                                                                                    : Stmt::Kind::Continue );
                advance();
                return s;
            }
            if ( w == "return" )
            {
                Stmt s = start_stmt( Stmt::Kind::Return );
                advance();
                if ( !at_simple_end() ) s.exprs.push_back( parse_star_expressions() );
                return s;
            }
            if ( w == "raise" )
            {
                Stmt s = start_stmt( Stmt::Kind::Raise );
                advance();
                if ( !at_simple_end() )
                {
                    s.exprs.push_back( parse_test() );
                    if ( at_name( "from" ) )
                    {
                        advance();
                        s.exprs.push_back( parse_test() );
                    }
                }
                return s;
            }
            if ( w == "global" || w == "nonlocal" )
            {
                Stmt s = start_stmt( w == "global" ? Stmt::Kind::Global : Stmt::Kind::Nonlocal );
                advance();
                do
                {
                    const Token& n = peek();
                    Expr         e = make( Expr::Kind::Name, n );
                    e.text         = expect_identifier();
                    s.exprs.push_back( std::move( e ) );
                } while ( at_op( "," ) && ( advance(), true ) );
                return s;
            }
            if ( w == "del" )
            {
                Stmt s = start_stmt( Stmt::Kind::Del );
                advance();
                s.exprs.push_back( parse_target_list() );
                return s;
            }
            if ( w == "assert" )
            {
                Stmt s = start_stmt( Stmt::Kind::Assert );
                advance();
                s.exprs.push_back( parse_test() );
                if ( at_op( "," ) )
                {
                    advance();
                    s.exprs.push_back( parse_test() );
                }
                return s;
            }
            if ( w == "import" ) return parse_import();
            if ( w == "from" ) return parse_import_from();
            if ( w == "type" && peek( 1 ).kind == TokenKind::Name && ( at_op( "=", 2 ) || at_op( "[", 2 ) ) )
            {
                Stmt s = start_stmt( Stmt::Kind::TypeAlias );
                advance();
                s.name = expect_identifier();
                skip_type_params();
                expect_op( "=" );
                s.exprs.push_back( parse_test() );
                return s;
            }
        }
        return parse_expression_statement();
    }

    std::string parse_dotted_name()
    {
        std::string name = expect_identifier();
        while ( at_op( "." ) )
        {
            advance();
            name += '.';
            name += expect_identifier();
        }
        return name;
    }

    Stmt parse_import()
    {
        Stmt s = start_stmt( Stmt::Kind::Import );
        advance();
        do
        {
            ImportName n;
            n.dotted = parse_dotted_name();
            if ( at_name( "as" ) )
            {
                advance();
                n.alias = expect_identifier();
            }
            s.imports.push_back( std::move( n ) );
        } while ( at_op( "," ) && ( advance(), true ) );
        return s;
    }

    Stmt parse_import_from()
    {
        Stmt s = start_stmt( Stmt::Kind::ImportFrom );
        advance();
        while ( at_op( "." ) || at_op( "..." ) )
        {
            s.level += at_op( "." ) ? 1 : 3;
            advance();
        }
        if ( !at_name( "import" ) ) s.module = parse_dotted_name();
        else if ( s.level == 0 ) fail( "expected module name" );
        expect_name( "import" );
        if ( at_op( "*" ) )
        {
            advance();
            s.imports.push_back( ImportName { "*", "" } );
            return s;
        }
        const bool paren = at_op( "(" );
        if ( paren ) advance();
        while ( true )
        {
            ImportName n;
            n.dotted = expect_identifier();
            if ( at_name( "as" ) )
            {
                advance();
                n.alias = expect_identifier();
            }
            s.imports.push_back( std::move( n ) );
            if ( !at_op( "," ) ) break;
            advance();
            if ( paren && at_op( ")" ) ) break;
            if ( !paren && at_simple_end() ) fail( "trailing comma not allowed without surrounding parentheses" );
        }
        if ( paren ) expect_op( ")" );
        return s;
    }

    static bool is_assignable( const Expr& e )
    {
        switch ( e.kind )
        {
            case Expr::Kind::Name:
            case Expr::Kind::Attribute:
            case Expr::Kind::Subscript: return true;
            case Expr::Kind::Starred: return is_assignable( e.children[0] );
            case Expr::Kind::Tuple:
            case Expr::Kind::List:
                return std::all_of( e.children.begin(), e.children.end(), is_assignable );
            default: return false;
        }
    }

    Expr parse_assignment_value()
    {
        if ( at_name( "yield" ) ) return parse_yield_expression();
        return parse_star_expressions();
    }

    Stmt parse_expression_statement()
    {
        Stmt s = start_stmt( Stmt::Kind::ExprStmt );
        Expr first = at_name( "yield" ) ? parse_yield_expression() : parse_star_expressions();
        if ( at_op( ":" ) )
        {
            if ( first.kind != Expr::Kind::Name && first.kind != Expr::Kind::Attribute &&
                 first.kind != Expr::Kind::Subscript )
                fail( "illegal target for annotation" );
            advance();
            s.kind       = Stmt::Kind::AnnAssign;
            s.annotation = parse_test();
            s.exprs.push_back( std::move( first ) );
            if ( at_op( "=" ) )
            {
                advance();
                s.exprs.push_back( parse_assignment_value() );
            }
            return s;
        }
        const Token& t = peek();
        if ( t.kind == TokenKind::Op && t.text.size() >= 2 && t.text.back() == '=' && t.text != "==" &&
             t.text != "<=" && t.text != ">=" && t.text != "!=" )
        {
            if ( first.kind != Expr::Kind::Name && first.kind != Expr::Kind::Attribute &&
                 first.kind != Expr::Kind::Subscript )
                fail( "illegal expression for augmented assignment" );
            s.kind = Stmt::Kind::AugAssign;
            s.name = std::string( t.text );
            advance();
            s.exprs.push_back( std::move( first ) );
            s.exprs.push_back( parse_assignment_value() );
            return s;
        }
        if ( at_op( "=" ) )
        {
            s.kind = Stmt::Kind::Assign;
            s.exprs.push_back( std::move( first ) );
            while ( at_op( "=" ) )
            {
                advance();
                s.exprs.push_back( parse_assignment_value() );
            }
            for ( std::size_t i = 0; i + 1 < s.exprs.size(); ++i )
                if ( !is_assignable( s.exprs[i] ) ) throw SyntaxError( "cannot assign to expression", s.exprs[i].line, s.exprs[i].column );
            return s;
        }
        s.exprs.push_back( std::move( first ) );
        return s;
    }

    // --- expressions -----------------------------------------------------

    Expr parse_star_expressions()
    {
        const Token& start = peek();
        Expr         first = parse_star_expression();
        if ( !at_op( "," ) ) return first;
        Expr tuple = make( Expr::Kind::Tuple, start );
        tuple.children.push_back( std::move( first ) );
        while ( at_op( "," ) )
        {
            advance();
            if ( !can_start_expression() ) break;
            tuple.children.push_back( parse_star_expression() );
        }
        finish( tuple );
        return tuple;
    }

    Expr parse_star_expression()
    {
        if ( at_op( "*" ) )
        {
            const Token& start = peek();
            advance();
            Expr e = make( Expr::Kind::Starred, start );
            e.children.push_back( parse_bitor() );
            finish( e );
            return e;
        }
        return parse_namedexpr_test();
    }

    Expr parse_star_target()
    {
        if ( at_op( "*" ) )
        {
            const Token& start = peek();
            advance();
            Expr e = make( Expr::Kind::Starred, start );
            e.children.push_back( parse_bitor() );
            finish( e );
            return e;
        }
        return parse_bitor();
    }

    Expr parse_target_list()
    {
        const Token& start = peek();
        Expr         first = parse_star_target();
        if ( !at_op( "," ) ) return first;
        Expr tuple = make( Expr::Kind::Tuple, start );
        tuple.children.push_back( std::move( first ) );
        while ( at_op( "," ) )
        {
            advance();
            if ( !can_start_expression() ) break;
            tuple.children.push_back( parse_star_target() );
        }
        finish( tuple );
        return tuple;
    }

    Expr parse_namedexpr_test()
    {
        Expr e = parse_test();
        if ( at_op( ":=" ) )
        {
            if ( e.kind != Expr::Kind::Name ) fail( "cannot use assignment expressions with this target" );
            advance();
            Expr named = wrap( Expr::Kind::NamedExpr, std::move( e ) );
            named.children.push_back( parse_test() );
            finish( named );
            return named;
        }
        return e;
    }

    Expr parse_test()
    {
        DepthGuard guard( *this );
        if ( at_name( "lambda" ) ) return parse_lambda();
        Expr e = parse_or_test();
        if ( at_name( "if" ) && !in_pattern_ )
        {
            advance();
            Expr result     = wrap( Expr::Kind::IfExp, parse_or_test() );
            result.line     = e.line;
            result.column   = e.column;
            result.begin    = e.begin;
            expect_name( "else" );
            result.children.push_back( std::move( e ) );
            result.children.push_back( parse_test() );
            finish( result );
            return result;
        }
        return e;
    }

    Expr parse_lambda()
    {
        const Token& start = peek();
        advance();
        Expr e = make( Expr::Kind::Lambda, start );
        auto params = parse_parameters( ":", false );
        expect_op( ":" );
        e.children.push_back( parse_test() );
        for ( auto& p : params )
        {
            e.names.push_back( p.name );
            if ( p.default_value ) e.children.push_back( std::move( *p.default_value ) );
        }
        finish( e );
        return e;
    }

    Expr parse_or_test()
    {
        Expr e = parse_and_test();
        if ( !at_name( "or" ) ) return e;
        Expr op = wrap( Expr::Kind::BoolOp, std::move( e ) );
        op.text = "or";
        while ( at_name( "or" ) )
        {
            advance();
            op.children.push_back( parse_and_test() );
        }
        finish( op );
        return op;
    }

    Expr parse_and_test()
    {
        Expr e = parse_not_test();
        if ( !at_name( "and" ) ) return e;
        Expr op = wrap( Expr::Kind::BoolOp, std::move( e ) );
        op.text = "and";
        while ( at_name( "and" ) )
        {
            advance();
            op.children.push_back( parse_not_test() );
        }
        finish( op );
        return op;
    }

    Expr parse_not_test()
    {
        if ( at_name( "not" ) )
        {
            DepthGuard   guard( *this );
            const Token& start = peek();
            advance();
            Expr e = make( Expr::Kind::UnaryOp, start );
            e.text = "not";
            e.children.push_back( parse_not_test() );
            finish( e );
            return e;
        }
        return parse_comparison();
    }

    std::optional<std::string> comparison_operator()
    {
        const Token& t = peek();
        if ( t.kind == TokenKind::Op &&
             ( t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" || t.text == "<=" || t.text == "!=" ) )
        {
            advance();
            return std::string( t.text );
        }
        if ( at_name( "in" ) )
        {
            advance();
            return "in";
        }
        if ( at_name( "not" ) && at_name( "in", 1 ) )
        {
            advance();
            advance();
            return "not in";
        }
        if ( at_name( "is" ) )
        {
            advance();
            if ( at_name( "not" ) )
            {
                advance();
                return "is not";
            }
            return "is";
        }
        return std::nullopt;
    }

    Expr parse_comparison()
    {
        Expr e  = parse_bitor();
        auto op = comparison_operator();
        if ( !op ) return e;
        Expr cmp = wrap( Expr::Kind::Compare, std::move( e ) );
        while ( op )
        {
            cmp.ops.push_back( *op );
            cmp.children.push_back( parse_bitor() );
            op = comparison_operator();
        }
        finish( cmp );
        return cmp;
    }

    template <typename Next>
    Expr parse_binary( std::initializer_list<std::string_view> ops, Next next )
    {
        Expr e = ( this->*next )();
        while ( true )
        {
            const Token& t = peek();
            if ( t.kind != TokenKind::Op || std::find( ops.begin(), ops.end(), t.text ) == ops.end() ) break;
            advance();
            Expr bin = wrap( Expr::Kind::BinOp, std::move( e ) );
            bin.text = std::string( t.text );
            bin.children.push_back( ( this->*next )() );
            finish( bin );
            e = std::move( bin );
        }
        return e;
    }

    Expr parse_bitor()
    {
        Expr e = parse_binary( { "|" }, &Parser::parse_xor );
        if ( in_pattern_ && at_name( "as" ) )
        {
            advance();
            expect_identifier();
            finish( e );
        }
        return e;
    }
    Expr parse_xor() { return parse_binary( { "^" }, &Parser::parse_and ); }
    Expr parse_and() { return parse_binary( { "&" }, &Parser::parse_shift ); }
    Expr parse_shift() { return parse_binary( { "<<", ">>" }, &Parser::parse_arith ); }
    Expr parse_arith() { return parse_binary( { "+", "-" }, &Parser::parse_term ); }
    Expr parse_term() { return parse_binary( { "*", "/", "//", "%", "@" }, &Parser::parse_factor ); }

    Expr parse_factor()
    {
        DepthGuard guard( *this );
        if ( at_op( "+" ) || at_op( "-" ) || at_op( "~" ) )
        {
            const Token& start = peek();
            advance();
            Expr e = make( Expr::Kind::UnaryOp, start );
            e.text = std::string( start.text );
            e.children.push_back( parse_factor() );
            finish( e );
            return e;
        }
        return parse_power();
    }

    Expr parse_power()
    {
        Expr base = parse_await_primary();
        if ( at_op( "**" ) )
        {
            advance();
            Expr bin = wrap( Expr::Kind::BinOp, std::move( base ) );
            bin.text = "**";
            bin.children.push_back( parse_factor() );
            finish( bin );
            return bin;
        }
        return base;
    }

    Expr parse_await_primary()
    {
        if ( at_name( "await" ) )
        {
            const Token& start = peek();
            advance();
            Expr e = make( Expr::Kind::Await, start );
            e.children.push_back( parse_primary() );
            finish( e );
            return e;
        }
        return parse_primary();
    }

    Expr parse_primary()
    {
        DepthGuard guard( *this );
        Expr       e = parse_atom();
        while ( true )
        {
            if ( at_op( "." ) )
            {
                advance();
                Expr attr = wrap( Expr::Kind::Attribute, std::move( e ) );
                attr.text = expect_identifier();
                finish( attr );
                e = std::move( attr );
            }
            else if ( at_op( "(" ) )
            {
                advance();
                Expr call = wrap( Expr::Kind::Call, std::move( e ) );
                for ( auto& arg : parse_call_arguments() ) call.children.push_back( std::move( arg ) );
                expect_op( ")" );
                finish( call );
                e = std::move( call );
            }
            else if ( at_op( "[" ) )
            {
                advance();
                Expr sub = wrap( Expr::Kind::Subscript, std::move( e ) );
                sub.children.push_back( parse_subscript_list() );
                expect_op( "]" );
                finish( sub );
                e = std::move( sub );
            }
            else break;
        }
        return e;
    }

    std::vector<Expr> parse_call_arguments()
    {
        std::vector<Expr> args;
        while ( !at_op( ")" ) )
        {
            const Token& start = peek();
            if ( at_op( "*" ) || at_op( "**" ) )
            {
                const bool double_star = at_op( "**" );
                advance();
                Expr e = make( double_star ? Expr::Kind::DoubleStarred : Expr::Kind::Starred, start );
                e.children.push_back( parse_test() );
                finish( e );
                args.push_back( std::move( e ) );
            }
            else if ( start.kind == TokenKind::Name && at_op( "=", 1 ) && !is_keyword( start.text ) )
            {
                advance();
                advance();
                Expr e = make( Expr::Kind::Keyword, start );
                e.text = std::string( start.text );
                e.children.push_back( parse_test() );
                finish( e );
                args.push_back( std::move( e ) );
            }
            else
            {
                Expr e = parse_namedexpr_test();
                if ( at_comp_for() )
                {
                    Expr gen = wrap( Expr::Kind::Comprehension, std::move( e ) );
                    gen.text = "gen";
                    parse_comp_for( gen );
                    finish( gen );
                    args.push_back( std::move( gen ) );
                }
                else args.push_back( std::move( e ) );
            }
            if ( at_op( "," ) )
            {
                advance();
                continue;
            }
            if ( !at_op( ")" ) ) fail_unexpected();
        }
        return args;
    }

    Expr parse_slice()
    {
        const Token& start = peek();
        if ( at_op( "*" ) ) return parse_star_expression();
        std::optional<Expr> lower;
        if ( !at_op( ":" ) ) lower = parse_namedexpr_test();
        if ( !at_op( ":" ) ) return std::move( *lower );
        Expr slice = make( Expr::Kind::Slice, start );
        if ( lower ) slice.children.push_back( std::move( *lower ) );
        advance();
        if ( !at_op( "]" ) && !at_op( "," ) && !at_op( ":" ) ) slice.children.push_back( parse_test() );
        if ( at_op( ":" ) )
        {
            advance();
            if ( !at_op( "]" ) && !at_op( "," ) ) slice.children.push_back( parse_test() );
        }
        finish( slice );
        return slice;
    }

    Expr parse_subscript_list()
    {
        const Token& start = peek();
        Expr         first = parse_slice();
        if ( !at_op( "," ) ) return first;
        Expr tuple = make( Expr::Kind::Tuple, start );
        tuple.children.push_back( std::move( first ) );
        while ( at_op( "," ) )
        {
            advance();
            if ( at_op( "]" ) ) break;
            tuple.children.push_back( parse_slice() );
        }
        finish( tuple );
        return tuple;
    }

    bool at_comp_for() const { return at_name( "for" ) || ( at_name( "async" ) && at_name( "for", 1 ) ); }

    void parse_comp_for( Expr& comp )
    {
        while ( at_comp_for() )
        {
            const Token& start = peek();
            if ( at_name( "async" ) ) advance();
            advance();
            Expr clause = make( Expr::Kind::CompFor, start );
            clause.children.push_back( parse_target_list() );
            expect_name( "in" );
            clause.children.push_back( parse_or_test() );
            while ( at_name( "if" ) )
            {
                advance();
                clause.children.push_back( parse_or_test() );
            }
            finish( clause );
            comp.children.push_back( std::move( clause ) );
        }
    }

    Expr parse_yield_expression()
    {
        const Token& start = peek();
        expect_name( "yield" );
        if ( at_name( "from" ) )
        {
            advance();
            Expr e = make( Expr::Kind::YieldFrom, start );
            e.children.push_back( parse_test() );
            finish( e );
            return e;
        }
        Expr e = make( Expr::Kind::Yield, start );
        if ( can_start_expression() ) e.children.push_back( parse_star_expressions() );
        finish( e );
        return e;
    }

    Expr parse_strings()
    {
        const Token& start = peek();
        Expr         e     = make( Expr::Kind::Str, start );
        bool         first = true;
        while ( at( TokenKind::String ) )
        {
            bool is_bytes = false, is_fstring = false;
            e.text += decode_string_body( peek().text, is_bytes, is_fstring );
            if ( !first && is_bytes != e.is_bytes ) fail( "cannot mix bytes and nonbytes literals" );
            e.is_bytes = is_bytes;
            e.is_fstring |= is_fstring;
            first = false;
            advance();
        }
        finish( e );
        return e;
    }

    Expr parse_atom()
    {
        const Token& t = peek();
        switch ( t.kind )
        {
            case TokenKind::Name:
            {
                if ( t.text == "None" || t.text == "True" || t.text == "False" )
                {
                    Expr e = make( Expr::Kind::Constant, t );
                    e.text = std::string( t.text );
                    advance();
                    return e;
                }
                if ( is_keyword( t.text ) ) fail_unexpected();
                Expr e = make( Expr::Kind::Name, t );
                e.text = std::string( t.text );
                advance();
                return e;
            }
            case TokenKind::Number:
            {
                Expr e = make( Expr::Kind::Number, t );
                e.text = std::string( t.text );
                advance();
                return e;
            }
            case TokenKind::String: return parse_strings();
            case TokenKind::Op: break;
            default: fail_unexpected();
        }
        if ( t.text == "..." )
        {
            Expr e = make( Expr::Kind::Ellipsis, t );
            advance();
            return e;
        }
        if ( t.text == "(" ) return parse_paren();
        if ( t.text == "[" ) return parse_list_display();
        if ( t.text == "{" ) return parse_brace_display();
        fail_unexpected();
    }

    Expr parse_paren()
    {
        const Token& start = peek();
        advance();
        if ( at_op( ")" ) )
        {
            Expr e = make( Expr::Kind::Tuple, start );
            advance();
            finish( e );
            return e;
        }
        if ( at_name( "yield" ) )
        {
            Expr e = parse_yield_expression();
            expect_op( ")" );
            return e;
        }
        Expr first = parse_star_expression();
        if ( at_comp_for() )
        {
            Expr gen = make( Expr::Kind::Comprehension, start );
            gen.text = "gen";
            gen.children.push_back( std::move( first ) );
            parse_comp_for( gen );
            expect_op( ")" );
            finish( gen );
            return gen;
        }
        if ( at_op( "," ) )
        {
            Expr tuple = make( Expr::Kind::Tuple, start );
            tuple.children.push_back( std::move( first ) );
            while ( at_op( "," ) )
            {
                advance();
                if ( at_op( ")" ) ) break;
                tuple.children.push_back( parse_star_expression() );
            }
            expect_op( ")" );
            finish( tuple );
            return tuple;
        }
        expect_op( ")" );
        first.begin  = start.begin;
        first.line   = start.line;
        first.column = start.column;
        finish( first );
        return first;
    }

    Expr parse_list_display()
    {
        const Token& start = peek();
        advance();
        Expr e = make( Expr::Kind::List, start );
        if ( at_op( "]" ) )
        {
            advance();
            finish( e );
            return e;
        }
        Expr first = parse_star_expression();
        if ( at_comp_for() )
        {
            e.kind = Expr::Kind::Comprehension;
            e.text = "list";
            e.children.push_back( std::move( first ) );
            parse_comp_for( e );
            expect_op( "]" );
            finish( e );
            return e;
        }
        e.children.push_back( std::move( first ) );
        while ( at_op( "," ) )
        {
            advance();
            if ( at_op( "]" ) ) break;
            e.children.push_back( parse_star_expression() );
        }
        expect_op( "]" );
        finish( e );
        return e;
    }

    Expr parse_dict_or_set_item( bool& is_dict, bool first )
    {
        const Token& start = peek();
        if ( at_op( "**" ) )
        {
            if ( !first && !is_dict ) fail( "invalid syntax in set display" );
            is_dict = true;
            advance();
            Expr e = make( Expr::Kind::DoubleStarred, start );
            e.children.push_back( parse_bitor() );
            finish( e );
            return e;
        }
        Expr key = parse_star_expression();
        if ( at_op( ":" ) )
        {
            if ( !first && !is_dict ) fail( "invalid syntax in set display" );
            is_dict = true;
            advance();
            Expr kv = wrap( Expr::Kind::KeyValue, std::move( key ) );
            kv.children.push_back( parse_test() );
            finish( kv );
            return kv;
        }
        if ( !first && is_dict ) fail( "':' expected after dictionary key" );
        return key;
    }

    Expr parse_brace_display()
    {
        const Token& start = peek();
        advance();
        Expr e = make( Expr::Kind::Dict, start );
        if ( at_op( "}" ) )
        {
            advance();
            finish( e );
            return e;
        }
        bool is_dict = false;
        Expr first   = parse_dict_or_set_item( is_dict, true );
        if ( at_comp_for() )
        {
            e.kind = Expr::Kind::Comprehension;
            e.text = is_dict ? "dict" : "set";
            e.children.push_back( std::move( first ) );
            parse_comp_for( e );
            expect_op( "}" );
            finish( e );
            return e;
        }
        e.kind = is_dict ? Expr::Kind::Dict : Expr::Kind::Set;
        e.children.push_back( std::move( first ) );
        while ( at_op( "," ) )
        {
            advance();
            if ( at_op( "}" ) ) break;
            e.children.push_back( parse_dict_or_set_item( is_dict, false ) );
        }
        expect_op( "}" );
        finish( e );
        return e;
    }

    std::vector<Token> tokens_;
    std::size_t        pos_      = 0;
    std::size_t        prev_end_ = 0;
    int                depth_    = 0;
    bool               in_pattern_ = false;
};

}  // namespace

Module parse_module( std::string_view source )
{
    TokenStream stream = tokenize( source );
    Parser      parser( std::move( stream.tokens ) );
    return parser.parse_file();
}

Expr parse_expression( std::string_view source )
{
    TokenStream stream = tokenize( source );
    Parser      parser( std::move( stream.tokens ) );
    return parser.parse_standalone_expression();
}

}  // namespace anylens::python
