#pragma once

#include "anylens/type_expr.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anylens
{

/// Project-relative, forward-slash path plus 1-based line and 0-based column.
struct SourceLocation
{
    std::string file_path;
    int         line   = 1;
    int         column = 0;

    friend auto operator<=>( const SourceLocation&, const SourceLocation& ) = default;
};

enum class ParameterKind
{
    Positional,
    KeywordOnly,
    VarPositional,
    VarKeyword,
};

/// An annotation as written plus its parsed and normalized trees.
struct Annotation
{
    std::string raw;
    TypeExpr    parsed;
    TypeExpr    normalized;
};

struct Parameter
{
    std::string               name;
    ParameterKind             kind = ParameterKind::Positional;
    std::optional<Annotation> annotation;
    bool                      is_implicit_any = true;
};

enum class UseTag
{
    Iterated,
    LengthTaken,
    MethodCalled,
    SubscriptedWithStringLiteral,
    SubscriptedOther,
    MembershipTestedWithStringLiteral,
    BinaryOpWith,
    ReturnedDirectly,
    PassedAlong,
    TruthTested,
    AttributeSet,
    Other,
};

/// How one occurrence of a parameter is used. `detail` carries the method
/// name, literal key, partner parameter or attribute, depending on the tag.
struct UseKind
{
    UseTag      tag = UseTag::Other;
    std::string detail;

    friend bool operator==( const UseKind&, const UseKind& ) = default;
};

struct CallShape
{
    bool has_star_args            = false;
    bool has_double_star_kwargs   = false;
    int  leading_positional_count = 0;

    friend bool operator==( const CallShape&, const CallShape& ) = default;
};

struct BodyFacts
{
    int  returns_of_first_param  = 0;
    int  total_return_statements = 0;
    bool has_yield               = false;
    bool all_paths_raise         = false;

    std::map<std::string, std::vector<UseKind>>   param_uses;
    std::map<std::string, std::vector<CallShape>> param_call_sites;
};

struct IgnoreComment
{
    std::vector<std::string> codes;  // empty for a bare ignore
    SourceLocation           location;

    bool has_code( std::string_view code ) const;
};

struct Declaration
{
    std::string                  qualified_name;
    std::string                  name;
    std::vector<Parameter>       params;
    std::optional<Annotation>    return_annotation;
    bool                         is_method = false;
    bool                         is_nested = false;  // defined inside another function
    bool                         is_async  = false;
    std::vector<std::string>     decorators;
    BodyFacts                    body_facts;
    SourceLocation               location;
    std::optional<IgnoreComment> trailing_ignore;

    bool has_explicit_annotation() const;
};

struct ClassDecl
{
    std::string              qualified_name;
    std::vector<std::string> base_names;
    std::vector<Declaration> methods;
    SourceLocation           location;
};

struct TypeVarDecl
{
    std::string                target_name;
    std::string                declared_name;
    std::vector<std::string>   constraints;
    std::optional<std::string> bound;
    SourceLocation             location;

    bool is_unconstrained() const { return constraints.empty() && !bound; }
};

/// Annotated module- or class-level variable (`name: T`).
struct VariableDecl
{
    std::string    qualified_name;
    std::string    name;
    Annotation     annotation;
    SourceLocation location;
};

struct ParseFailure
{
    std::string file_path;
    std::string reason;

    friend bool operator==( const ParseFailure&, const ParseFailure& ) = default;
};

struct FileModel
{
    std::string               file_path;
    std::string               module_name;
    bool                      failed = false;
    std::string               failure_reason;
    std::vector<Declaration>  declarations;
    std::vector<ClassDecl>    classes;
    std::vector<TypeVarDecl>  typevars;
    std::vector<VariableDecl> variables;
    std::vector<IgnoreComment> ignores;
    AliasMap                  import_aliases;
};

/// Whole-project extraction result. Built once by merge_models and shared
/// read-only afterwards.
struct ProjectModel
{
    std::string                     project_id;
    int                             files_parsed = 0;
    int                             files_failed = 0;
    std::vector<ParseFailure>       failures;
    std::vector<std::string>        files;  // every file encountered, sorted
    std::vector<Declaration>        declarations;
    std::vector<ClassDecl>          classes;
    std::vector<TypeVarDecl>        typevars;
    std::vector<VariableDecl>       variables;
    std::vector<IgnoreComment>      ignores;
    std::map<std::string, AliasMap> import_aliases;  // keyed by file path
};

std::string_view to_string( UseTag tag );
std::string_view to_string( ParameterKind kind );

}  // namespace anylens
