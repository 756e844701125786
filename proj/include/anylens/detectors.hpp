#pragma once

#include "anylens/model.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anylens
{

enum class Pattern
{
    Tvar,
    Uvar,
    Self,
    Ddict,
    Override,
    Wrapper,
    Details,
    Noreturn,
};

inline constexpr Pattern kAllPatterns[] = {
    Pattern::Tvar,     Pattern::Uvar,    Pattern::Self,    Pattern::Ddict,
    Pattern::Override, Pattern::Wrapper, Pattern::Details, Pattern::Noreturn,
};

using PatternSet = std::set<Pattern>;

std::string_view      to_string( Pattern p );  // "PAT_SELF", ...
std::optional<Pattern> pattern_from_string( std::string_view s );
/// Every pattern except the experimental PAT_TVAR.
PatternSet default_patterns();

enum class Confidence
{
    High,
    Medium,
    Low,
};

std::string_view         to_string( Confidence c );
std::optional<Confidence> confidence_from_string( std::string_view s );

enum class OverrideOutcome
{
    DifferentArgs,
    IdenticalArgs,
    DifferentReturnOnly,
    ParentNotFound,
    ParentClassUnresolved,
};

std::string_view to_string( OverrideOutcome o );

struct Suggestion
{
    enum class Target
    {
        ReturnType,
        Param,
        TypevarDecl,
    };

    Target      target      = Target::ReturnType;
    int         param_index = -1;  // for Target::Param
    std::string replacement;

    friend bool operator==( const Suggestion&, const Suggestion& ) = default;
};

std::string_view to_string( Suggestion::Target t );

struct Finding
{
    Pattern                                          pattern = Pattern::Uvar;
    SourceLocation                                   location;
    std::string                                      symbol;
    Confidence                                       confidence = Confidence::High;
    std::vector<std::pair<std::string, std::string>> evidence;  // kept in insertion order
    std::optional<Suggestion>                        suggestion;
    std::string                                      summary;
    bool                                             experimental = false;

    friend bool operator==( const Finding&, const Finding& ) = default;
};

/// Canonical order: file, line, pattern, then column and symbol.
bool finding_less( const Finding& a, const Finding& b );

std::vector<Finding> detect_any_instead_of_typevar( const ProjectModel& model );
std::vector<Finding> detect_unconstrained_typevars( const ProjectModel& model );
std::vector<Finding> detect_any_instead_of_self( const ProjectModel& model );
std::vector<Finding> detect_dependent_dicts( const ProjectModel& model );
std::vector<Finding> detect_override_suppressions( const ProjectModel& model );
std::vector<Finding> detect_wrapper_functions( const ProjectModel& model );
std::vector<Finding> detect_detail_hiding( const ProjectModel& model );
std::vector<Finding> detect_any_as_noreturn( const ProjectModel& model );

/// Runs the enabled detectors and returns their findings in canonical order.
std::vector<Finding> run_detectors( const ProjectModel& model, const PatternSet& enabled );

/// Uses that place no requirement on a value beyond being passed around or
/// read generically.
bool is_unconstraining_use( const UseKind& use );

/// True when parameter `index` of `d` is an explicitly annotated Any (or
/// Any-parameterized) slot whose every use is unconstraining.
bool hides_details( const Declaration& d, std::size_t index );

}  // namespace anylens
