#include "doctest.h"

#include "anylens/extractor.hpp"

#include <random>
#include <set>

using namespace anylens;

namespace
{

BodyFacts facts_of( const std::string& src )
{
    const FileModel m = parse_source_file( "f.py", src );
    REQUIRE_FALSE( m.failed );
    REQUIRE( !m.declarations.empty() );
    return m.declarations[0].body_facts;
}

std::vector<UseKind> uses( const std::string& body, const std::string& param = "x" )
{
    const BodyFacts f  = facts_of( "def f(x, y):\n" + body );
    const auto      it = f.param_uses.find( param );
    return it == f.param_uses.end() ? std::vector<UseKind> {} : it->second;
}

UseKind only_use( const std::string& body )
{
    const auto u = uses( body );
    REQUIRE_MESSAGE( u.size() == 1, body );
    return u[0];
}

}  // namespace

TEST_CASE( "each use of a parameter gets a tag" )
{
    CHECK( only_use( "    for v in x: pass\n" ) == UseKind { UseTag::Iterated, "" } );
    CHECK( only_use( "    return len(x)\n" ) == UseKind { UseTag::LengthTaken, "" } );
    CHECK( only_use( "    x.append(1)\n" ) == UseKind { UseTag::MethodCalled, "append" } );
    CHECK( only_use( "    return x['k'] * 2\n" ) == UseKind { UseTag::SubscriptedWithStringLiteral, "k" } );
    CHECK( only_use( "    return x[0]\n" ) == UseKind { UseTag::SubscriptedOther, "" } );
    CHECK( only_use( "    if 'k' in x: pass\n" ) == UseKind { UseTag::MembershipTestedWithStringLiteral, "k" } );
    CHECK( only_use( "    return x\n" ) == UseKind { UseTag::ReturnedDirectly, "" } );
    CHECK( only_use( "    print(x)\n" ) == UseKind { UseTag::PassedAlong, "" } );
    CHECK( only_use( "    if x: pass\n" ) == UseKind { UseTag::TruthTested, "" } );
    CHECK( only_use( "    x.attr = 1\n" ) == UseKind { UseTag::AttributeSet, "attr" } );
    CHECK( only_use( "    z = x.attr\n" ) == UseKind { UseTag::Other, "" } );
    CHECK( uses( "    return x == y\n" ) == std::vector<UseKind> { { UseTag::BinaryOpWith, "y" } } );
    CHECK( uses( "    return x + y\n", "y" ) == std::vector<UseKind> { { UseTag::BinaryOpWith, "x" } } );
    CHECK( uses( "    return x + 1\n" ) == std::vector<UseKind> { { UseTag::Other, "" } } );
}

TEST_CASE( "string keys inside f-strings and bytes are not literal keys" )
{
    CHECK( only_use( "    return x[b'k']\n" ).tag == UseTag::SubscriptedOther );
    CHECK( only_use( "    return x[f'k']\n" ).tag == UseTag::SubscriptedOther );
    CHECK( only_use( "    if b'k' in x: pass\n" ).tag != UseTag::MembershipTestedWithStringLiteral );
}

TEST_CASE( "uses are collected in source order and repeated uses are kept" )
{
    const auto u = uses( "    if 'a' in x:\n        return x['a'] - x['b']\n" );
    REQUIRE( u.size() == 3 );
    CHECK( u[0].tag == UseTag::MembershipTestedWithStringLiteral );
    CHECK( u[1] == UseKind { UseTag::SubscriptedWithStringLiteral, "a" } );
    CHECK( u[2] == UseKind { UseTag::SubscriptedWithStringLiteral, "b" } );
}

TEST_CASE( "call shapes" )
{
    const BodyFacts f = facts_of( "def w(fn, a):\n    fn(a, 1, *rest, k=2, **kw)\n    fn()\n    fn(*a)\n" );
    const auto&     sites = f.param_call_sites.at( "fn" );
    REQUIRE( sites.size() == 3 );
    CHECK( sites[0] == CallShape { true, true, 2 } );
    CHECK( sites[1] == CallShape { false, false, 0 } );
    CHECK( sites[2] == CallShape { true, false, 0 } );
    CHECK( f.param_uses.at( "a" ).front().tag == UseTag::PassedAlong );
}

TEST_CASE( "closures are followed unless the name is rebound as a parameter" )
{
    const BodyFacts f = facts_of( "def outer(x, y):\n"
                                  "    def inner(y):\n        return x.keys(), y\n"
                                  "    g = lambda x: x\n"
                                  "    return [x for x in range(3)]\n" );
    REQUIRE( f.param_uses.count( "x" ) );
    const auto& ux = f.param_uses.at( "x" );
    REQUIRE( ux.size() == 1 );
    CHECK( ux[0] == UseKind { UseTag::MethodCalled, "keys" } );
    CHECK( f.param_uses.count( "y" ) == 0 );
}

TEST_CASE( "with targets are stores, not uses" )
{
    CHECK( uses( "    with open(p) as x:\n        pass\n" ).empty() );
    CHECK( only_use( "    with x as f:\n        pass\n" ).tag == UseTag::Other );
    CHECK( only_use( "    with open(p) as x.handle:\n        pass\n" ).tag == UseTag::AttributeSet );
}

TEST_CASE( "return accounting" )
{
    BodyFacts f = facts_of( "def m(self, v):\n    if v:\n        return self\n    return (self)\n" );
    CHECK( f.returns_of_first_param == 2 );
    CHECK( f.total_return_statements == 2 );

    f = facts_of( "def m(self):\n    def inner():\n        return self\n    return None\n" );
    CHECK( f.returns_of_first_param == 0 );
    CHECK( f.total_return_statements == 1 );

    f = facts_of( "def g():\n    yield 1\n" );
    CHECK( f.has_yield );
    f = facts_of( "def g():\n    f = lambda: (yield)\n    return 1\n" );
    CHECK_FALSE( f.has_yield );
}

// Random bodies over if / if-else / for / while / try-bare-except / raise /
// pass / return. The oracle enumerates every branch combination with loops
// running zero or one times and a bare except catching any raise of its body.
namespace
{

enum Outcome
{
    FallThrough = 1,
    Raises      = 2,
    Returns     = 4,
};

struct Node
{
    enum Kind
    {
        Raise,
        Pass,
        Return,
        If,
        IfElse,
        For,
        While,
        Try,
    } kind = Pass;
    std::vector<Node> body, orelse;
};

class BodyGen
{
public:
    BodyGen( unsigned seed, bool allow_return ) : rng_( seed ), allow_return_( allow_return ) {}

    std::vector<Node> block( int depth )
    {
        std::vector<Node> out;
        for ( int n = 1 + pick( 3 ); n > 0; --n ) out.push_back( node( depth ) );
        return out;
    }

private:
    Node node( int depth )
    {
        Node n;
        const int leaves = allow_return_ ? 3 : 2;
        const int choice = pick( depth <= 0 ? leaves : 8 );
        switch ( choice )
        {
            case 0: n.kind = Node::Raise; break;
            case 1: n.kind = Node::Pass; break;
            case 2: n.kind = allow_return_ ? Node::Return : Node::Raise; break;
            case 3: n.kind = Node::If; break;
            case 4: n.kind = Node::IfElse; break;
            case 5: n.kind = Node::For; break;
            case 6: n.kind = Node::While; break;
            default: n.kind = Node::Try; break;
        }
        if ( n.kind >= Node::If )
        {
            n.body = block( depth - 1 );
            if ( n.kind == Node::IfElse || n.kind == Node::Try ) n.orelse = block( depth - 1 );
        }
        return n;
    }

    int pick( int n ) { return std::uniform_int_distribution<int>( 0, n - 1 )( rng_ ); }

    std::mt19937 rng_;
    bool         allow_return_;
};

int outcomes( const std::vector<Node>& stmts );

int outcomes( const Node& n )
{
    switch ( n.kind )
    {
        case Node::Raise: return Raises;
        case Node::Pass: return FallThrough;
        case Node::Return: return Returns;
        case Node::If: return outcomes( n.body ) | FallThrough;
        case Node::IfElse: return outcomes( n.body ) | outcomes( n.orelse );
        case Node::For:
        case Node::While: return outcomes( n.body ) | FallThrough;
        case Node::Try:
        {
            const int body = outcomes( n.body );
            return ( body & ~Raises ) | ( ( body & Raises ) ? outcomes( n.orelse ) : 0 );
        }
    }
    return FallThrough;
}

int outcomes( const std::vector<Node>& stmts )
{
    int live = FallThrough, done = 0;
    for ( const auto& s : stmts )
    {
        if ( !( live & FallThrough ) ) break;
        const int o = outcomes( s );
        done |= o & ~FallThrough;
        live = o & FallThrough;
    }
    return done | live;
}

void emit( const std::vector<Node>& stmts, int indent, std::string& out )
{
    const std::string pad( static_cast<std::size_t>( indent ), ' ' );
    for ( const auto& s : stmts )
    {
        switch ( s.kind )
        {
            case Node::Raise: out += pad + "raise E\n"; break;
            case Node::Pass: out += pad + "pass\n"; break;
            case Node::Return: out += pad + "return 1\n"; break;
            case Node::If:
            case Node::IfElse:
                out += pad + "if c:\n";
                emit( s.body, indent + 4, out );
                if ( s.kind == Node::IfElse )
                {
                    out += pad + "else:\n";
                    emit( s.orelse, indent + 4, out );
                }
                break;
            case Node::For:
                out += pad + "for i in c:\n";
                emit( s.body, indent + 4, out );
                break;
            case Node::While:
                out += pad + "while c:\n";
                emit( s.body, indent + 4, out );
                break;
            case Node::Try:
                out += pad + "try:\n";
                emit( s.body, indent + 4, out );
                out += pad + "except:\n";
                emit( s.orelse, indent + 4, out );
                break;
        }
    }
}

bool has_loop_or_try( const std::vector<Node>& stmts )
{
    for ( const auto& s : stmts )
        if ( s.kind == Node::For || s.kind == Node::While || s.kind == Node::Try || has_loop_or_try( s.body ) ||
             has_loop_or_try( s.orelse ) )
            return true;
    return false;
}

}  // namespace

TEST_CASE( "all_paths_raise is sound against path enumeration" )
{
    int agreed_true = 0;
    for ( unsigned seed = 0; seed < 2000; ++seed )
    {
        BodyGen           gen( seed, seed % 2 == 0 );
        const auto        body = gen.block( 3 );
        std::string       src  = "def f(c):\n";
        emit( body, 4, src );
        const FileModel m = parse_source_file( "g.py", src );
        REQUIRE_MESSAGE( !m.failed, src );
        REQUIRE( m.declarations.size() == 1 );
        const bool claimed = m.declarations[0].body_facts.all_paths_raise;
        const bool truth   = outcomes( body ) == Raises;
        INFO( src );
        if ( claimed ) CHECK( truth );
        const bool simple = seed % 2 == 1 && !has_loop_or_try( body );
        if ( simple ) CHECK( claimed == truth );
        if ( claimed && truth ) ++agreed_true;
    }
    CHECK( agreed_true > 100 );
}
