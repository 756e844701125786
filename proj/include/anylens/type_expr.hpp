#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anylens
{

namespace python
{
struct Expr;
}

enum class TypeKind
{
    Any,
    NoneType,
    Named,
    Generic,
    Callable,
    Union,
    TypeVarRef,
    Self,
    Never,
    StringForward,
    Opaque,
    EllipsisMarker,
};

/// A PEP 484 type annotation as a tree.
///
/// `name` holds the dotted name for Named, the head for Generic, the variable
/// for TypeVarRef and the raw text for Opaque. `args` holds Generic
/// arguments, Union members, the StringForward target, and for Callable the
/// parameter types followed by the return type (always last).
struct TypeExpr
{
    TypeKind              kind = TypeKind::Any;
    std::string           name;
    std::vector<TypeExpr> args;
    bool                  ellipsis_params = false;  // Callable[..., R]
    bool                  was_bare        = false;  // source omitted type arguments

    static TypeExpr any();
    static TypeExpr none();
    static TypeExpr named( std::string dotted );
    static TypeExpr generic( std::string head, std::vector<TypeExpr> args );
    static TypeExpr callable( std::vector<TypeExpr> params, TypeExpr ret );
    static TypeExpr callable_any_params( TypeExpr ret );
    static TypeExpr union_of( std::vector<TypeExpr> members );
    static TypeExpr type_var( std::string name );
    static TypeExpr self_type();
    static TypeExpr never();
    static TypeExpr forward( TypeExpr inner );
    static TypeExpr opaque( std::string raw );
    static TypeExpr ellipsis();

    std::span<const TypeExpr> callable_params() const;
    const TypeExpr&           callable_return() const;

    bool is_any() const { return kind == TypeKind::Any; }

    /// Structural equality; `was_bare` is provenance and does not participate.
    friend bool operator==( const TypeExpr& a, const TypeExpr& b );
};

/// Maps a local name to the canonical dotted name it was imported as.
using AliasMap = std::map<std::string, std::string>;

/// Names in scope that influence how an annotation is read.
struct TypeContext
{
    const AliasMap*              aliases   = nullptr;
    const std::set<std::string>* typevars  = nullptr;
};

/// Parses annotation text. Never fails: unreadable input becomes Opaque.
TypeExpr parse_type_expr( std::string_view raw, const TypeContext& context = {} );

/// Converts an already-parsed annotation expression; `source` is the text the
/// expression offsets refer to.
TypeExpr type_from_ast( const python::Expr& expr, std::string_view source, const TypeContext& context = {} );

/// Canonical form: Optional and bare generics expanded, forward references
/// unwrapped, unions flattened, deduplicated and sorted with None last.
/// Idempotent.
TypeExpr normalize( const TypeExpr& t );

/// Number of Any nodes. Ellipsis forms count zero.
int count_any( const TypeExpr& t );

/// One-line canonical rendering, re-parsable by parse_type_expr.
std::string render( const TypeExpr& t );

/// True when some Any occurs below a Callable node.
bool contains_any_under_callable( const TypeExpr& t );

/// True for Dict/Mapping-like heads (typing and builtin spellings).
bool is_dict_like_head( std::string_view head );

/// If `t` (or a member of a top-level union) is a dict-like generic whose
/// value argument contains Any, returns true.
bool has_any_dict_value( const TypeExpr& t );

/// The typing member a dotted name denotes (`t.Any` -> `Any` given
/// `import typing as t`), or empty when it is not a typing construct.
/// Unqualified names that are not imported are assumed to be typing members.
std::string typing_member( std::string_view dotted, const AliasMap* aliases );

/// Replaces each Any node with a fresh type variable T0, T1, ...
TypeExpr replace_any_with_type_vars( const TypeExpr& t );

}  // namespace anylens
