#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace anylens::python
{

/// Raised by the tokenizer and parser for malformed source. Never escapes
/// the extractor: it is converted into a failed FileModel there.
class SyntaxError : public std::runtime_error
{
public:
    SyntaxError( std::string message, int line, int column )
        : std::runtime_error( std::move( message ) ), line_( line ), column_( column )
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

enum class TokenKind
{
    Name,
    Number,
    String,
    Op,
    Newline,
    Indent,
    Dedent,
    EndOfFile,
};

struct Token
{
    TokenKind        kind = TokenKind::EndOfFile;
    std::string_view text;
    int              line   = 1;
    int              column = 0;
    std::size_t      begin  = 0;
    std::size_t      end    = 0;
};

struct Comment
{
    int              line   = 1;
    int              column = 0;
    std::string_view text;  // includes the leading '#'
};

struct TokenStream
{
    std::vector<Token>   tokens;
    std::vector<Comment> comments;
};

/// Tokenizes Python 3 source. The returned views point into `source`, which
/// must outlive the stream. Throws SyntaxError on malformed input.
TokenStream tokenize( std::string_view source );

/// Comments only; never throws. Stops at the first tokenization error and
/// returns what was collected up to that point.
std::vector<Comment> scan_comments( std::string_view source );

/// Checks structural UTF-8 validity (no overlongs, no surrogates).
bool is_valid_utf8( std::string_view bytes );

}  // namespace anylens::python
