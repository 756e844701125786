#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace anylens::python
{

/// Expression node. Children layout depends on kind:
///   Attribute      [value]                       text = attribute name
///   Subscript      [value, index]
///   Call           [func, args...]               args may be Starred / DoubleStarred / Keyword
///   Keyword        [value]                       text = keyword name
///   BinOp          [lhs, rhs]                    text = operator
///   UnaryOp        [operand]                     text = operator ("not", "-", ...)
///   BoolOp         [operands...]                 text = "and" / "or"
///   Compare        [lhs, rhs...]                 ops[i] relates children[i] and children[i+1]
///   Tuple/List/Set [elements...]
///   Dict           [KeyValue | DoubleStarred...]
///   KeyValue       [key, value]
///   Lambda         [body, defaults...]           names = parameter names
///   IfExp          [test, body, orelse]
///   Comprehension  [element, CompFor...]         text = "list" / "set" / "dict" / "gen"
///   CompFor        [target, iter, conditions...]
///   Starred / DoubleStarred / Await / Yield / YieldFrom [value] (Yield may be empty)
///   NamedExpr      [target, value]
///   WithItem       [context, target?]
///   Slice          [bounds...]
///   Str            text = decoded value (f-strings keep their raw body)
struct Expr
{
    enum class Kind
    {
        Name,
        Number,
        Str,
        Constant,  // None / True / False
        Ellipsis,
        Attribute,
        Subscript,
        Call,
        Keyword,
        BinOp,
        UnaryOp,
        BoolOp,
        Compare,
        Tuple,
        List,
        Set,
        Dict,
        KeyValue,
        Lambda,
        IfExp,
        Comprehension,
        CompFor,
        Starred,
        DoubleStarred,
        Await,
        Yield,
        YieldFrom,
        NamedExpr,
        WithItem,
        Slice,
    };

    Kind                     kind = Kind::Name;
    std::string              text;
    std::vector<Expr>        children;
    std::vector<std::string> ops;
    std::vector<std::string> names;
    bool                     is_fstring = false;
    bool                     is_bytes   = false;
    int                      line       = 1;
    int                      column     = 0;
    std::size_t              begin      = 0;
    std::size_t              end        = 0;
};

enum class ParamKind
{
    Positional,
    KeywordOnly,
    VarPositional,
    VarKeyword,
};

struct Param
{
    std::string         name;
    ParamKind           kind = ParamKind::Positional;
    std::optional<Expr> annotation;
    std::optional<Expr> default_value;
    int                 line   = 1;
    int                 column = 0;
};

struct ImportName
{
    std::string dotted;  // module path for `import`, member name for `from ... import`
    std::string alias;   // empty when no `as`
};

/// Statement node. Expression slots in `exprs` by kind:
///   If / While        [test]
///   For               [target, iter]
///   With              [WithItem...]
///   Match             [subject]
///   MatchCase         [pattern, guard?]
///   ExceptHandler     [type?]
///   Return            [value?]
///   Raise             [exc?, cause?]
///   Assign            [targets..., value]
///   AnnAssign         [target, value?]           annotation holds the type
///   AugAssign         [target, value]            name = operator
///   ExprStmt          [value]
///   ClassDef          [bases and keywords...]
///   Del / Assert / Global / Nonlocal  [operands...]
struct Stmt
{
    enum class Kind
    {
        FunctionDef,
        ClassDef,
        If,
        For,
        While,
        Try,
        With,
        Match,
        MatchCase,
        ExceptHandler,
        Return,
        Raise,
        Assign,
        AnnAssign,
        AugAssign,
        Import,
        ImportFrom,
        ExprStmt,
        Pass,
        Break,
        Continue,
        Global,
        Nonlocal,
        Del,
        Assert,
        TypeAlias,
    };

    Kind                    kind = Kind::Pass;
    int                     line   = 1;
    int                     column = 0;
    int                     header_end_line = 1;  // line holding the ':' of a compound header
    std::string             name;
    bool                    is_async = false;
    std::vector<Param>      params;
    std::optional<Expr>     returns;
    std::optional<Expr>     annotation;
    std::vector<Expr>       decorators;
    std::vector<Expr>       exprs;
    std::vector<Stmt>       body;
    std::vector<Stmt>       orelse;
    std::vector<Stmt>       handlers;
    std::vector<Stmt>       finalbody;
    std::vector<ImportName> imports;
    std::string             module;  // ImportFrom
    int                     level = 0;
};

struct Module
{
    std::vector<Stmt> body;
};

}  // namespace anylens::python
