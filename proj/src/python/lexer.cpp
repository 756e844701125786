#include "anylens/python/lexer.hpp"

#include <array>
#include <cctype>
#include <cstdint>

namespace anylens::python
{

namespace
{

bool is_ident_start( unsigned char c )
{
    return ( c >= 'a' && c <= 'z' ) || ( c >= 'A' && c <= 'Z' ) || c == '_' || c >= 0x80;
}

bool is_ident_char( unsigned char c )
{
    return is_ident_start( c ) || ( c >= '0' && c <= '9' );
}

bool is_digit( unsigned char c ) { return c >= '0' && c <= '9'; }

bool is_string_prefix( std::string_view word )
{
    if ( word.size() > 2 ) return false;
    bool raw = false, bytes = false, fmt = false, uni = false;
    for ( char ch : word )
    {
        switch ( ch )
        {
            case 'r': case 'R': if ( raw ) return false; raw = true; break;
            case 'b': case 'B': if ( bytes ) return false; bytes = true; break;
            case 'f': case 'F': if ( fmt ) return false; fmt = true; break;
            case 'u': case 'U': if ( uni ) return false; uni = true; break;
            default: return false;
        }
    }
    if ( uni && word.size() > 1 ) return false;
    return !( bytes && fmt );
}

constexpr std::array<std::string_view, 5> kThreeCharOps { "**=", "//=", "...", "<<=", ">>=" };
constexpr std::array<std::string_view, 19> kTwoCharOps {
    "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=",
};
constexpr std::string_view kOneCharOps = "()[]{},:;.@=+-*/%&|^~<>";

class Lexer
{
public:
    explicit Lexer( std::string_view src ) : src_( src ) {}

    TokenStream run()
    {
        while ( true )
        {
            if ( at_line_start_ && brackets_.empty() )
            {
                if ( !handle_indentation() ) break;
                continue;
            }
            if ( pos_ >= src_.size() ) break;
            lex_one();
        }
        finish();
        return std::move( out_ );
    }

    std::vector<Comment> take_comments() { return std::move( out_.comments ); }

private:
    [[noreturn]] void fail( const std::string& message ) const
    {
        throw SyntaxError( message, line_, static_cast<int>( pos_ - line_begin_ ) );
    }

    char peek( std::size_t ahead = 0 ) const
    {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void emit( TokenKind kind, std::size_t begin, std::size_t end, int line, int column )
    {
        out_.tokens.push_back( Token { kind, src_.substr( begin, end - begin ), line, column, begin, end } );
        line_has_tokens_ = kind != TokenKind::Newline;
    }

    void new_line()
    {
        ++line_;
        line_begin_ = pos_;
    }

    // Consumes "\n", "\r\n" or "\r" at pos_.
    bool consume_line_break()
    {
        if ( peek() == '\r' )
        {
            ++pos_;
            if ( peek() == '\n' ) ++pos_;
            new_line();
            return true;
        }
        if ( peek() == '\n' )
        {
            ++pos_;
            new_line();
            return true;
        }
        return false;
    }

    void read_comment()
    {
        const std::size_t begin = pos_;
        while ( pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r' ) ++pos_;
        out_.comments.push_back(
            Comment { line_, static_cast<int>( begin - line_begin_ ), src_.substr( begin, pos_ - begin ) } );
    }

    // Returns false at end of input.
    bool handle_indentation()
    {
        int width = 0;
        while ( pos_ < src_.size() )
        {
            const char c = src_[pos_];
            if ( c == ' ' ) ++width;
            else if ( c == '\t' ) width = ( width / 8 + 1 ) * 8;
            else if ( c == '\f' ) width = 0;
            else break;
            ++pos_;
        }
        if ( pos_ >= src_.size() ) return false;
        const char c = src_[pos_];
        if ( c == '#' )
        {
            read_comment();
            if ( !consume_line_break() ) return false;
            return true;
        }
        if ( c == '\n' || c == '\r' )
        {
            consume_line_break();
            return true;
        }
        if ( c == '\\' )
        {
            // A continuation at the start of a logical line.
            ++pos_;
            if ( !consume_line_break() ) fail( "unexpected character after line continuation character" );
            at_line_start_ = false;
            apply_indent( width );
            return true;
        }
        at_line_start_ = false;
        apply_indent( width );
        return true;
    }

    void apply_indent( int width )
    {
        const int column = static_cast<int>( pos_ - line_begin_ );
        if ( width > indents_.back() )
        {
            if ( indents_.size() > 100 ) fail( "too many levels of indentation" );
            indents_.push_back( width );
            emit( TokenKind::Indent, pos_, pos_, line_, column );
            return;
        }
        while ( width < indents_.back() )
        {
            indents_.pop_back();
            emit( TokenKind::Dedent, pos_, pos_, line_, column );
        }
        if ( width != indents_.back() ) fail( "unindent does not match any outer indentation level" );
    }

    void lex_one()
    {
        const unsigned char c = static_cast<unsigned char>( src_[pos_] );
        if ( c == ' ' || c == '\t' || c == '\f' )
        {
            ++pos_;
            return;
        }
        if ( c == '#' )
        {
            read_comment();
            return;
        }
        if ( c == '\n' || c == '\r' )
        {
            const std::size_t at = pos_;
            const int line = line_, column = static_cast<int>( pos_ - line_begin_ );
            consume_line_break();
            if ( brackets_.empty() )
            {
                if ( line_has_tokens_ ) emit( TokenKind::Newline, at, at, line, column );
                at_line_start_ = true;
            }
            return;
        }
        if ( c == '\\' )
        {
            ++pos_;
            if ( pos_ >= src_.size() ) fail( "unexpected EOF after line continuation" );
            if ( !consume_line_break() ) fail( "unexpected character after line continuation character" );
            return;
        }
        if ( c == '\0' ) fail( "source code cannot contain null bytes" );

        const std::size_t begin  = pos_;
        const int         column = static_cast<int>( pos_ - line_begin_ );
        const int         line   = line_;

        if ( is_ident_start( c ) )
        {
            while ( pos_ < src_.size() && is_ident_char( static_cast<unsigned char>( src_[pos_] ) ) ) ++pos_;
            const std::string_view word = src_.substr( begin, pos_ - begin );
            if ( ( peek() == '\'' || peek() == '"' ) && is_string_prefix( word ) )
            {
                const bool fstring = word.find_first_of( "fF" ) != std::string_view::npos;
                read_string_body( fstring );
                emit( TokenKind::String, begin, pos_, line, column );
                return;
            }
            emit( TokenKind::Name, begin, pos_, line, column );
            return;
        }
        if ( is_digit( c ) || ( c == '.' && is_digit( static_cast<unsigned char>( peek( 1 ) ) ) ) )
        {
            read_number();
            emit( TokenKind::Number, begin, pos_, line, column );
            return;
        }
        if ( c == '\'' || c == '"' )
        {
            read_string_body( false );
            emit( TokenKind::String, begin, pos_, line, column );
            return;
        }
        read_operator();
        emit( TokenKind::Op, begin, pos_, line, column );
    }

    void read_number()
    {
        if ( peek() == '0' && ( peek( 1 ) == 'x' || peek( 1 ) == 'X' || peek( 1 ) == 'o' || peek( 1 ) == 'O' ||
                                peek( 1 ) == 'b' || peek( 1 ) == 'B' ) )
        {
            pos_ += 2;
            while ( pos_ < src_.size() && ( std::isalnum( static_cast<unsigned char>( src_[pos_] ) ) || src_[pos_] == '_' ) )
                ++pos_;
            return;
        }
        auto digits = [&] {
            while ( pos_ < src_.size() && ( is_digit( static_cast<unsigned char>( src_[pos_] ) ) || src_[pos_] == '_' ) )
                ++pos_;
        };
        digits();
        if ( peek() == '.' )
        {
            ++pos_;
            digits();
        }
        if ( peek() == 'e' || peek() == 'E' )
        {
            const char next = peek( 1 );
            if ( is_digit( static_cast<unsigned char>( next ) ) ||
                 ( ( next == '+' || next == '-' ) && is_digit( static_cast<unsigned char>( peek( 2 ) ) ) ) )
            {
                pos_ += ( next == '+' || next == '-' ) ? 2 : 1;
                digits();
            }
        }
        if ( peek() == 'j' || peek() == 'J' ) ++pos_;
    }

    // pos_ is at the opening quote.
    void read_string_body( bool fstring )
    {
        const char quote  = src_[pos_];
        const bool triple = peek( 1 ) == quote && peek( 2 ) == quote;
        pos_ += triple ? 3 : 1;
        int brace_depth = 0;
        while ( true )
        {
            if ( pos_ >= src_.size() )
                fail( triple ? "unterminated triple-quoted string literal" : "unterminated string literal" );
            const char c = src_[pos_];
            if ( c == '\\' )
            {
                ++pos_;
                if ( pos_ >= src_.size() ) continue;
                if ( !consume_line_break() ) ++pos_;
                continue;
            }
            if ( c == '\n' || c == '\r' )
            {
                if ( !triple && brace_depth == 0 ) fail( "unterminated string literal" );
                consume_line_break();
                continue;
            }
            if ( fstring && c == '{' )
            {
                if ( brace_depth == 0 && peek( 1 ) == '{' )
                {
                    pos_ += 2;
                    continue;
                }
                ++brace_depth;
                ++pos_;
                continue;
            }
            if ( fstring && c == '}' && brace_depth > 0 )
            {
                --brace_depth;
                ++pos_;
                continue;
            }
            if ( fstring && brace_depth > 0 && ( c == '\'' || c == '"' ) && c != quote )
            {
                read_string_body( false );
                continue;
            }
            if ( fstring && brace_depth > 0 && c == quote && !triple )
            {
                // Nested same-quote string inside a replacement field.
                read_string_body( false );
                continue;
            }
            if ( c == quote )
            {
                if ( !triple )
                {
                    ++pos_;
                    return;
                }
                if ( peek( 1 ) == quote && peek( 2 ) == quote )
                {
                    pos_ += 3;
                    return;
                }
            }
            ++pos_;
        }
    }

    void read_operator()
    {
        const std::string_view rest = src_.substr( pos_ );
        for ( auto op : kThreeCharOps )
            if ( rest.substr( 0, 3 ) == op )
            {
                pos_ += 3;
                return;
            }
        if ( rest.substr( 0, 3 ) == ">>=" || rest.substr( 0, 3 ) == "<<=" )
        {
            pos_ += 3;
            return;
        }
        for ( auto op : kTwoCharOps )
            if ( rest.substr( 0, 2 ) == op )
            {
                pos_ += 2;
                return;
            }
        const char c = rest[0];
        if ( kOneCharOps.find( c ) == std::string_view::npos )
        {
            if ( c == '!' ) fail( "invalid syntax: '!'" );
            fail( std::string( "invalid character '" ) + c + "'" );
        }
        if ( c == '(' || c == '[' || c == '{' )
        {
            if ( brackets_.size() >= 200 ) fail( "too many nested parentheses" );
            brackets_.push_back( c );
        }
        else if ( c == ')' || c == ']' || c == '}' )
        {
            const char open = c == ')' ? '(' : c == ']' ? '[' : '{';
            if ( brackets_.empty() ) fail( std::string( "unmatched '" ) + c + "'" );
            if ( brackets_.back() != open )
                fail( std::string( "closing parenthesis '" ) + c + "' does not match '" + brackets_.back() + "'" );
            brackets_.pop_back();
        }
        ++pos_;
    }

    void finish()
    {
        if ( !brackets_.empty() ) fail( std::string( "'" ) + brackets_.back() + "' was never closed" );
        const int column = static_cast<int>( pos_ - line_begin_ );
        if ( line_has_tokens_ ) emit( TokenKind::Newline, pos_, pos_, line_, column );
        while ( indents_.size() > 1 )
        {
            indents_.pop_back();
            emit( TokenKind::Dedent, pos_, pos_, line_, column );
        }
        emit( TokenKind::EndOfFile, pos_, pos_, line_, column );
    }

    std::string_view  src_;
    std::size_t       pos_        = 0;
    std::size_t       line_begin_ = 0;
    int               line_       = 1;
    bool              at_line_start_   = true;
    bool              line_has_tokens_ = false;
    std::vector<int>  indents_ { 0 };
    std::vector<char> brackets_;
    TokenStream       out_;
};

}  // namespace

TokenStream tokenize( std::string_view source )
{
    if ( source.substr( 0, 3 ) == "\xEF\xBB\xBF" ) source.remove_prefix( 3 );
    return Lexer( source ).run();
}

std::vector<Comment> scan_comments( std::string_view source )
{
    if ( source.substr( 0, 3 ) == "\xEF\xBB\xBF" ) source.remove_prefix( 3 );
    Lexer lexer( source );
    try
    {
        return lexer.run().comments;
    }
    catch ( const SyntaxError& )
    {
        return lexer.take_comments();
    }
}

bool is_valid_utf8( std::string_view bytes )
{
    std::size_t i = 0;
    while ( i < bytes.size() )
    {
        const auto c = static_cast<unsigned char>( bytes[i] );
        if ( c < 0x80 )
        {
            ++i;
            continue;
        }
        int      extra = 0;
        uint32_t cp    = 0;
        if ( ( c & 0xE0 ) == 0xC0 ) { extra = 1; cp = c & 0x1F; }
        else if ( ( c & 0xF0 ) == 0xE0 ) { extra = 2; cp = c & 0x0F; }
        else if ( ( c & 0xF8 ) == 0xF0 ) { extra = 3; cp = c & 0x07; }
        else return false;
        if ( i + extra >= bytes.size() ) return false;
        for ( int k = 1; k <= extra; ++k )
        {
            const auto cc = static_cast<unsigned char>( bytes[i + k] );
            if ( ( cc & 0xC0 ) != 0x80 ) return false;
            cp = ( cp << 6 ) | ( cc & 0x3F );
        }
        if ( ( extra == 1 && cp < 0x80 ) || ( extra == 2 && cp < 0x800 ) || ( extra == 3 && cp < 0x10000 ) )
            return false;
        if ( cp > 0x10FFFF || ( cp >= 0xD800 && cp <= 0xDFFF ) ) return false;
        i += extra + 1;
    }
    return true;
}

}  // namespace anylens::python
