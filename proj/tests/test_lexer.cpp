#include "doctest.h"

#include "anylens/python/lexer.hpp"

#include <string>
#include <vector>

using namespace anylens::python;

namespace
{

std::vector<std::string> texts( std::string_view src )
{
    std::vector<std::string> out;
    for ( const auto& t : tokenize( src ).tokens )
    {
        switch ( t.kind )
        {
            case TokenKind::Newline: out.push_back( "NL" ); break;
            case TokenKind::Indent: out.push_back( "IN" ); break;
            case TokenKind::Dedent: out.push_back( "DE" ); break;
            case TokenKind::EndOfFile: out.push_back( "EOF" ); break;
            default: out.emplace_back( t.text );
        }
    }
    return out;
}

}  // namespace

TEST_CASE( "indentation produces balanced indent and dedent tokens" )
{
    const auto toks = texts( "def f(x):\n    if x:\n        return 1\n    return 2\n" );
    const std::vector<std::string> expected { "def", "f", "(", "x", ")", ":", "NL", "IN", "if", "x", ":", "NL", "IN",
                                              "return", "1", "NL", "DE", "return", "2", "NL", "DE", "EOF" };
    CHECK( toks == expected );
}

TEST_CASE( "newlines inside brackets are not logical line ends" )
{
    const auto toks = texts( "x = [\n  1,\n  2,\n]\n" );
    CHECK( std::count( toks.begin(), toks.end(), "NL" ) == 1 );
}

TEST_CASE( "multi-character operators are single tokens" )
{
    const auto toks = texts( "a **= b; c //= d; e >>= f; g <<= h; i -> j; k := l; m ...\n" );
    for ( const char* op : { "**=", "//=", ">>=", "<<=", "->", ":=", "..." } )
        CHECK_MESSAGE( std::find( toks.begin(), toks.end(), op ) != toks.end(), op );
}

TEST_CASE( "string forms" )
{
    CHECK( texts( "x = 'a'\n" )[2] == "'a'" );
    CHECK( texts( "x = rb'\\d'\n" )[2] == "rb'\\d'" );
    CHECK( texts( "x = '''a\nb'''\n" )[2] == "'''a\nb'''" );
    CHECK( texts( "x = f\"{d['k']}\"\n" )[2] == "f\"{d['k']}\"" );
    CHECK( texts( "x = f'{a!r:>{w}}'\n" )[2] == "f'{a!r:>{w}}'" );
}

TEST_CASE( "comments are collected with their positions, strings are not comments" )
{
    const auto stream = tokenize( "x = '# not a comment'  # real\n# own line\n" );
    REQUIRE( stream.comments.size() == 2 );
    CHECK( stream.comments[0].line == 1 );
    CHECK( stream.comments[0].column == 23 );
    CHECK( stream.comments[0].text == "# real" );
    CHECK( stream.comments[1].line == 2 );
    CHECK( stream.comments[1].column == 0 );
}

TEST_CASE( "malformed input raises SyntaxError with a position" )
{
    CHECK_THROWS_AS( tokenize( "x = 'abc\n" ), SyntaxError );
    CHECK_THROWS_AS( tokenize( "x = '''abc\n" ), SyntaxError );
    CHECK_THROWS_AS( tokenize( "x = (1, 2\n" ), SyntaxError );
    CHECK_THROWS_AS( tokenize( "x = 1)\n" ), SyntaxError );
    CHECK_THROWS_AS( tokenize( std::string_view( "x = 1\0\n", 7 ) ), SyntaxError );
    CHECK_THROWS_AS( tokenize( "if x:\n    a\n  b\n" ), SyntaxError );
    try
    {
        tokenize( "a = 1\nb = 'open\n" );
        FAIL( "expected a SyntaxError" );
    }
    catch ( const SyntaxError& e )
    {
        CHECK( e.line() == 2 );
    }
}

TEST_CASE( "scan_comments never throws and keeps what it saw before an error" )
{
    const auto comments = scan_comments( "a = 1  # first\nb = 'unterminated\n# never reached\n" );
    REQUIRE( comments.size() == 1 );
    CHECK( comments[0].text == "# first" );
}

TEST_CASE( "byte order mark is skipped" )
{
    const auto toks = texts( "\xEF\xBB\xBFx = 1\n" );
    CHECK( toks[0] == "x" );
}

TEST_CASE( "utf-8 validation" )
{
    CHECK( is_valid_utf8( "plain ascii" ) );
    CHECK( is_valid_utf8( "caf\xC3\xA9" ) );
    CHECK( is_valid_utf8( "\xF0\x9F\x98\x80" ) );
    CHECK_FALSE( is_valid_utf8( "\xC3" ) );
    CHECK_FALSE( is_valid_utf8( "\xC0\xAF" ) );          // overlong
    CHECK_FALSE( is_valid_utf8( "\xED\xA0\x80" ) );      // surrogate
    CHECK_FALSE( is_valid_utf8( "\xF4\x90\x80\x80" ) );  // above U+10FFFF
    CHECK_FALSE( is_valid_utf8( "\xFF" ) );
}

TEST_CASE( "line continuation joins physical lines" )
{
    const auto toks = texts( "x = 1 + \\\n    2\n" );
    CHECK( std::count( toks.begin(), toks.end(), "NL" ) == 1 );
    CHECK( std::count( toks.begin(), toks.end(), "IN" ) == 0 );
}

TEST_CASE( "deep nesting is rejected rather than exhausting the stack" )
{
    CHECK_THROWS_AS( tokenize( std::string( 5000, '(' ) ), SyntaxError );
}
