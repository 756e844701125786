#include "anylens/config_profile.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <stdexcept>

namespace anylens
{

namespace
{

constexpr std::array<std::string_view, 13> kStrictBundle {
    "disallow_any_generics",       "disallow_subclassing_any", "disallow_untyped_calls", "disallow_untyped_defs",
    "disallow_incomplete_defs",    "check_untyped_defs",       "disallow_untyped_decorators",
    "warn_redundant_casts",        "warn_unused_ignores",      "warn_return_any",        "no_implicit_reexport",
    "strict_equality",             "extra_checks",
};

constexpr std::array<std::string_view, 7> kPrimaryFlags {
    "strict",           "disallow_untyped_defs",  "disallow_any_generics",  "disallow_any_explicit",
    "disallow_any_expr", "disallow_untyped_calls", "ignore_missing_imports",
};

bool is_boolean_flag( std::string_view key )
{
    return std::find( kPrimaryFlags.begin(), kPrimaryFlags.end(), key ) != kPrimaryFlags.end() ||
           std::find( kStrictBundle.begin(), kStrictBundle.end(), key ) != kStrictBundle.end();
}

std::string_view trim( std::string_view s )
{
    const auto first = s.find_first_not_of( " \t\r" );
    if ( first == std::string_view::npos ) return {};
    const auto last = s.find_last_not_of( " \t\r" );
    return s.substr( first, last - first + 1 );
}

std::string lower( std::string_view s )
{
    std::string out( s );
    for ( auto& c : out ) c = static_cast<char>( std::tolower( static_cast<unsigned char>( c ) ) );
    return out;
}

std::optional<bool> parse_bool( std::string_view text )
{
    const std::string v = lower( trim( text ) );
    if ( v == "true" || v == "yes" || v == "on" || v == "1" ) return true;
    if ( v == "false" || v == "no" || v == "off" || v == "0" ) return false;
    return std::nullopt;
}

std::string base_name( std::string_view path )
{
    const auto slash = path.find_last_of( "/\\" );
    return std::string( slash == std::string_view::npos ? path : path.substr( slash + 1 ) );
}

int precedence( std::string_view name )
{
    const std::string base = base_name( name );
    if ( base == "setup.cfg" ) return 0;
    if ( base == "pyproject.toml" ) return 1;
    if ( base == "mypy.ini" ) return 2;
    return -1;
}

[[noreturn]] void fail( int line, const std::string& what )
{
    throw std::runtime_error( "line " + std::to_string( line ) + ": " + what );
}

std::vector<std::string_view> split_lines( std::string_view text )
{
    std::vector<std::string_view> lines;
    std::size_t                   start = 0;
    while ( start <= text.size() )
    {
        auto end = text.find( '\n', start );
        if ( end == std::string_view::npos ) end = text.size();
        lines.push_back( text.substr( start, end - start ) );
        start = end + 1;
    }
    return lines;
}

// Minimal TOML reader: tracks the current table and collects the keys that
// land in tool.mypy. Values are scanned just far enough to find where they
// end, so arrays, inline tables and multi-line strings are skipped correctly.
class TomlReader
{
public:
    explicit TomlReader( std::string_view text ) : text_( text ) {}

    std::vector<std::pair<std::string, std::string>> read()
    {
        std::vector<std::pair<std::string, std::string>> out;
        std::vector<std::string>                         table;
        while ( true )
        {
            skip_blank_and_comments();
            if ( pos_ >= text_.size() ) break;
            if ( peek() == '[' )
            {
                const bool array_table = pos_ + 1 < text_.size() && text_[pos_ + 1] == '[';
                pos_ += array_table ? 2 : 1;
                table = key_path();
                expect( ']' );
                if ( array_table ) expect( ']' );
                end_of_line();
                if ( array_table ) table.push_back( "[]" );
                continue;
            }
            std::vector<std::string> key = key_path();
            skip_inline_space();
            expect( '=' );
            skip_inline_space();
            std::string value = value_text();
            end_of_line();
            std::vector<std::string> full = table;
            full.insert( full.end(), key.begin(), key.end() );
            if ( full.size() == 3 && full[0] == "tool" && full[1] == "mypy" )
                out.emplace_back( full[2], std::move( value ) );
        }
        return out;
    }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    int line() const { return 1 + static_cast<int>( std::count( text_.begin(), text_.begin() + pos_, '\n' ) ); }

    void expect( char c )
    {
        if ( peek() != c ) fail( line(), std::string( "expected '" ) + c + "'" );
        ++pos_;
    }

    void skip_inline_space()
    {
        while ( peek() == ' ' || peek() == '\t' ) ++pos_;
    }

    void skip_comment()
    {
        if ( peek() == '#' )
            while ( pos_ < text_.size() && text_[pos_] != '\n' ) ++pos_;
    }

    void skip_blank_and_comments()
    {
        while ( pos_ < text_.size() )
        {
            const char c = text_[pos_];
            if ( c == ' ' || c == '\t' || c == '\r' || c == '\n' ) ++pos_;
            else if ( c == '#' ) skip_comment();
            else break;
        }
    }

    void end_of_line()
    {
        skip_inline_space();
        skip_comment();
        if ( peek() == '\r' ) ++pos_;
        if ( pos_ < text_.size() && peek() != '\n' ) fail( line(), "unexpected text after value" );
    }

    std::string key_part()
    {
        skip_inline_space();
        if ( peek() == '"' || peek() == '\'' ) return string_value();
        std::string part;
        while ( std::isalnum( static_cast<unsigned char>( peek() ) ) || peek() == '_' || peek() == '-' )
            part.push_back( text_[pos_++] );
        if ( part.empty() ) fail( line(), "expected a key" );
        return part;
    }

    std::vector<std::string> key_path()
    {
        std::vector<std::string> parts { key_part() };
        skip_inline_space();
        while ( peek() == '.' )
        {
            ++pos_;
            parts.push_back( key_part() );
            skip_inline_space();
        }
        return parts;
    }

    std::string string_value()
    {
        const char quote = text_[pos_];
        const bool multi = text_.substr( pos_, 3 ) == std::string( 3, quote );
        pos_ += multi ? 3 : 1;
        std::string out;
        while ( true )
        {
            if ( pos_ >= text_.size() ) fail( line(), "unterminated string" );
            const char c = text_[pos_];
            if ( !multi && c == '\n' ) fail( line(), "newline in string" );
            if ( multi ? text_.substr( pos_, 3 ) == std::string( 3, quote ) : c == quote )
            {
                pos_ += multi ? 3 : 1;
                return out;
            }
            if ( c == '\\' && quote == '"' )
            {
                if ( pos_ + 1 >= text_.size() ) fail( line(), "unterminated string" );
                const char e = text_[pos_ + 1];
                pos_ += 2;
                switch ( e )
                {
                    case 'n': out.push_back( '\n' ); break;
                    case 't': out.push_back( '\t' ); break;
                    case '"': out.push_back( '"' ); break;
                    case '\\': out.push_back( '\\' ); break;
                    default: out.push_back( '\\' ); out.push_back( e );
                }
                continue;
            }
            out.push_back( c );
            ++pos_;
        }
    }

    std::string value_text()
    {
        if ( peek() == '"' || peek() == '\'' ) return string_value();
        const std::size_t start = pos_;
        if ( peek() == '[' || peek() == '{' )
        {
            skip_compound();
            return std::string( text_.substr( start, pos_ - start ) );
        }
        while ( pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '#' ) ++pos_;
        const std::string_view raw = trim( text_.substr( start, pos_ - start ) );
        if ( raw.empty() ) fail( line(), "missing value" );
        return std::string( raw );
    }

    void skip_compound()
    {
        std::vector<char> stack;
        do
        {
            if ( pos_ >= text_.size() ) fail( line(), "unterminated array or table" );
            const char c = text_[pos_];
            if ( c == '"' || c == '\'' )
            {
                string_value();
                continue;
            }
            if ( c == '#' )
            {
                skip_comment();
                continue;
            }
            if ( c == '[' || c == '{' ) stack.push_back( c == '[' ? ']' : '}' );
            else if ( c == ']' || c == '}' )
            {
                if ( stack.empty() || stack.back() != c ) fail( line(), "mismatched bracket" );
                stack.pop_back();
            }
            ++pos_;
        } while ( !stack.empty() );
    }

    std::string_view text_;
    std::size_t      pos_ = 0;
};

}  // namespace

bool is_config_filename( std::string_view name ) { return precedence( name ) >= 0; }

std::span<const std::string_view> strict_bundle() { return kStrictBundle; }

std::vector<std::pair<std::string, std::string>> read_ini_mypy_section( std::string_view text )
{
    std::vector<std::pair<std::string, std::string>> out;
    std::string                                      section;
    bool                                             have_section = false;
    std::string*                                     last_value   = nullptr;
    int                                              line_no      = 0;
    for ( std::string_view raw : split_lines( text ) )
    {
        ++line_no;
        const std::string_view stripped = trim( raw );
        if ( stripped.empty() || stripped[0] == '#' || stripped[0] == ';' )
        {
            if ( stripped.empty() ) last_value = nullptr;
            continue;
        }
        if ( raw[0] == ' ' || raw[0] == '\t' )
        {
            if ( !last_value ) fail( line_no, "unexpected indentation" );
            *last_value += "\n" + std::string( stripped );
            continue;
        }
        last_value = nullptr;
        if ( stripped[0] == '[' )
        {
            if ( stripped.back() != ']' ) fail( line_no, "malformed section header" );
            section      = std::string( trim( stripped.substr( 1, stripped.size() - 2 ) ) );
            have_section = true;
            continue;
        }
        if ( !have_section ) fail( line_no, "option outside of any section" );
        const auto delim = stripped.find_first_of( "=:" );
        if ( delim == std::string_view::npos ) fail( line_no, "expected 'key = value'" );
        const std::string key( trim( stripped.substr( 0, delim ) ) );
        if ( key.empty() ) fail( line_no, "empty option name" );
        std::string_view value = trim( stripped.substr( delim + 1 ) );
        if ( const auto hash = value.find( " #" ); hash != std::string_view::npos ) value = trim( value.substr( 0, hash ) );
        if ( const auto semi = value.find( " ;" ); semi != std::string_view::npos ) value = trim( value.substr( 0, semi ) );
        if ( section != "mypy" ) continue;
        auto existing = std::find_if( out.begin(), out.end(), [&]( const auto& kv ) { return kv.first == key; } );
        if ( existing != out.end() ) fail( line_no, "duplicate option '" + key + "'" );
        out.emplace_back( key, std::string( value ) );
        last_value = &out.back().second;
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_toml_mypy_table( std::string_view text )
{
    return TomlReader( text ).read();
}

ConfigProfile derive_config_profile( std::string project_id, const std::vector<ConfigFile>& files )
{
    ConfigProfile profile;
    profile.project_id = std::move( project_id );

    std::vector<const ConfigFile*> ordered;
    for ( const auto& f : files )
        if ( is_config_filename( f.name ) ) ordered.push_back( &f );
    std::stable_sort( ordered.begin(), ordered.end(), []( const ConfigFile* a, const ConfigFile* b ) {
        return std::make_pair( precedence( a->name ), a->name ) < std::make_pair( precedence( b->name ), b->name );
    } );

    for ( const ConfigFile* f : ordered )
    {
        std::vector<std::pair<std::string, std::string>> entries;
        try
        {
            entries = base_name( f->name ) == "pyproject.toml" ? read_toml_mypy_table( f->text )
                                                               : read_ini_mypy_section( f->text );
        }
        catch ( const std::exception& e )
        {
            profile.errors.push_back( MalformedConfig { f->name, e.what() } );
            continue;
        }
        profile.files_read.push_back( f->name );
        for ( auto& [key, value] : entries )
        {
            if ( is_boolean_flag( key ) )
            {
                if ( auto b = parse_bool( value ) )
                {
                    profile.options[key] = *b;
                    continue;
                }
                profile.errors.push_back( MalformedConfig { f->name, "option '" + key + "' is not a boolean: " + value } );
            }
            profile.options[key] = value;
        }
    }

    if ( auto it = profile.options.find( "strict" ); it != profile.options.end() && it->second == OptionValue( true ) )
        for ( std::string_view flag : kStrictBundle ) profile.options.try_emplace( std::string( flag ), true );

    auto enabled = [&]( const char* key ) {
        auto it = profile.options.find( key );
        return it != profile.options.end() && it->second == OptionValue( true );
    };
    profile.implicit_any_exposed = !( enabled( "disallow_untyped_defs" ) && enabled( "disallow_any_generics" ) );
    return profile;
}

}  // namespace anylens
