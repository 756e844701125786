#include "anylens/detectors.hpp"

#include "anylens/extractor.hpp"
#include "anylens/stubs.hpp"

#include <algorithm>
#include <tuple>

namespace anylens
{

std::string_view to_string( Pattern p )
{
    switch ( p )
    {
        case Pattern::Tvar: return "PAT_TVAR";
        case Pattern::Uvar: return "PAT_UVAR";
        case Pattern::Self: return "PAT_SELF";
        case Pattern::Ddict: return "PAT_DDICT";
        case Pattern::Override: return "PAT_OVERRIDE";
        case Pattern::Wrapper: return "PAT_WRAPPER";
        case Pattern::Details: return "PAT_DETAILS";
        case Pattern::Noreturn: return "PAT_NORETURN";
    }
    return "PAT_UVAR";
}

std::optional<Pattern> pattern_from_string( std::string_view s )
{
    for ( Pattern p : kAllPatterns )
        if ( to_string( p ) == s ) return p;
    return std::nullopt;
}

PatternSet default_patterns()
{
    PatternSet set( std::begin( kAllPatterns ), std::end( kAllPatterns ) );
    set.erase( Pattern::Tvar );
    return set;
}

std::string_view to_string( Confidence c )
{
    switch ( c )
    {
        case Confidence::High: return "high";
        case Confidence::Medium: return "medium";
        case Confidence::Low: return "low";
    }
    return "low";
}

std::optional<Confidence> confidence_from_string( std::string_view s )
{
    for ( Confidence c : { Confidence::High, Confidence::Medium, Confidence::Low } )
        if ( to_string( c ) == s ) return c;
    return std::nullopt;
}

std::string_view to_string( OverrideOutcome o )
{
    switch ( o )
    {
        case OverrideOutcome::DifferentArgs: return "different_args";
        case OverrideOutcome::IdenticalArgs: return "identical_args";
        case OverrideOutcome::DifferentReturnOnly: return "different_return_only";
        case OverrideOutcome::ParentNotFound: return "parent_not_found";
        case OverrideOutcome::ParentClassUnresolved: return "parent_class_unresolved";
    }
    return "parent_not_found";
}

std::string_view to_string( Suggestion::Target t )
{
    switch ( t )
    {
        case Suggestion::Target::ReturnType: return "return_type";
        case Suggestion::Target::Param: return "param";
        case Suggestion::Target::TypevarDecl: return "typevar_decl";
    }
    return "return_type";
}

bool finding_less( const Finding& a, const Finding& b )
{
    return std::tie( a.location.file_path, a.location.line, a.pattern, a.location.column, a.symbol ) <
           std::tie( b.location.file_path, b.location.line, b.pattern, b.location.column, b.symbol );
}

bool is_unconstraining_use( const UseKind& use )
{
    switch ( use.tag )
    {
        case UseTag::Iterated:
        case UseTag::LengthTaken:
        case UseTag::ReturnedDirectly:
        case UseTag::TruthTested:
        case UseTag::PassedAlong: return true;
        case UseTag::MethodCalled:
            return use.detail == "values" || use.detail == "keys" || use.detail == "items" || use.detail == "get" ||
                   use.detail == "copy";
        default: return false;
    }
}

namespace
{

bool explicit_any( const std::optional<Annotation>& a ) { return a && a->normalized.is_any(); }

const std::vector<UseKind>& uses_of( const Declaration& d, const std::string& name )
{
    static const std::vector<UseKind> none;
    auto it = d.body_facts.param_uses.find( name );
    return it == d.body_facts.param_uses.end() ? none : it->second;
}

bool is_receiver( const Declaration& d, std::size_t index )
{
    return d.is_method && index == 0 && d.params[0].kind == ParameterKind::Positional;
}

Finding make_finding( Pattern p, const Declaration& d, Confidence c, std::string summary )
{
    Finding f;
    f.pattern    = p;
    f.location   = d.location;
    f.symbol     = d.qualified_name;
    f.confidence = c;
    f.summary    = std::move( summary );
    return f;
}

std::string join( const std::vector<std::string>& items, std::string_view sep = ", " )
{
    std::string out;
    for ( const auto& s : items )
    {
        if ( !out.empty() ) out += sep;
        out += s;
    }
    return out;
}

const ClassDecl* owning_class( const ProjectModel& model, const Declaration& d )
{
    if ( d.qualified_name.size() <= d.name.size() ) return nullptr;
    const std::string prefix = d.qualified_name.substr( 0, d.qualified_name.size() - d.name.size() - 1 );
    for ( const auto& c : model.classes )
        if ( c.qualified_name == prefix && c.location.file_path == d.location.file_path ) return &c;
    return nullptr;
}

std::vector<TypeExpr> argument_types( const Declaration& d )
{
    std::vector<TypeExpr> out;
    for ( std::size_t i = 0; i < d.params.size(); ++i )
        if ( !is_receiver( d, i ) ) out.push_back( slot_type( d.params[i] ) );
    return out;
}

}  // namespace

bool hides_details( const Declaration& d, std::size_t index )
{
    if ( index >= d.params.size() || is_receiver( d, index ) ) return false;
    const Parameter& p = d.params[index];
    if ( !p.annotation || count_any( p.annotation->normalized ) == 0 ) return false;
    const auto& uses = uses_of( d, p.name );
    return !uses.empty() && std::all_of( uses.begin(), uses.end(), is_unconstraining_use );
}

std::vector<Finding> detect_any_instead_of_typevar( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        std::vector<std::string> any_params;
        for ( std::size_t i = 0; i < d.params.size(); ++i )
            if ( !is_receiver( d, i ) && explicit_any( d.params[i].annotation ) ) any_params.push_back( d.params[i].name );
        if ( any_params.empty() ) continue;

        auto is_any_param = [&]( const std::string& n ) {
            return std::find( any_params.begin(), any_params.end(), n ) != any_params.end();
        };
        std::vector<std::string> linked;
        if ( any_params.size() >= 2 )
        {
            for ( const auto& name : any_params )
                for ( const auto& use : uses_of( d, name ) )
                    if ( use.tag == UseTag::BinaryOpWith && use.detail != name && is_any_param( use.detail ) &&
                         std::find( linked.begin(), linked.end(), name ) == linked.end() )
                        linked.push_back( name );
            if ( linked.size() >= 2 )
            {
                Finding f = make_finding( Pattern::Tvar, d, Confidence::Low,
                                          "Any parameters " + join( linked ) +
                                              " are combined with each other; a shared type variable may fit" );
                f.evidence     = { { "rule", "related_parameters" }, { "parameters", join( linked ) } };
                f.experimental = true;
                out.push_back( std::move( f ) );
            }
            continue;
        }
        const auto& uses = uses_of( d, any_params[0] );
        const bool  returned =
            std::any_of( uses.begin(), uses.end(), []( const UseKind& u ) { return u.tag == UseTag::ReturnedDirectly; } );
        if ( returned && explicit_any( d.return_annotation ) )
        {
            Finding f = make_finding( Pattern::Tvar, d, Confidence::Low,
                                      "Any parameter " + any_params[0] +
                                          " is returned as the Any result; a type variable may fit" );
            f.evidence     = { { "rule", "returned_parameter" }, { "parameters", any_params[0] } };
            f.experimental = true;
            out.push_back( std::move( f ) );
        }
    }
    return out;
}

std::vector<Finding> detect_unconstrained_typevars( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& tv : model.typevars )
    {
        if ( !tv.is_unconstrained() ) continue;
        Finding f;
        f.pattern    = Pattern::Uvar;
        f.location   = tv.location;
        f.symbol     = tv.target_name;
        f.confidence = Confidence::High;
        f.summary    = "unconstrained TypeVar; add bound= or constraints";
        f.evidence   = { { "declared_name", tv.declared_name } };
        const std::string& n = tv.declared_name.empty() ? tv.target_name : tv.declared_name;
        f.suggestion = Suggestion { Suggestion::Target::TypevarDecl, -1,
                                    "TypeVar('" + n + "', bound=<upper bound>) or TypeVar('" + n + "', <T1>, <T2>)" };
        out.push_back( std::move( f ) );
    }
    return out;
}

std::vector<Finding> detect_any_instead_of_self( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        const BodyFacts& facts = d.body_facts;
        if ( !d.is_method || !explicit_any( d.return_annotation ) || facts.returns_of_first_param < 1 ) continue;
        const bool all = facts.returns_of_first_param == facts.total_return_statements;
        Finding    f   = make_finding( Pattern::Self, d, all ? Confidence::High : Confidence::Medium,
                                       "returns its receiver but is annotated -> Any; Self keeps the subclass type" );
        f.evidence     = { { "returns_of_first_param", std::to_string( facts.returns_of_first_param ) },
                           { "total_return_statements", std::to_string( facts.total_return_statements ) } };
        f.suggestion   = Suggestion { Suggestion::Target::ReturnType, -1, render( TypeExpr::self_type() ) };
        out.push_back( std::move( f ) );
    }
    return out;
}

std::vector<Finding> detect_dependent_dicts( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        std::vector<std::string> slots;
        std::vector<std::string> keys;
        for ( std::size_t i = 0; i < d.params.size(); ++i )
        {
            const Parameter& p = d.params[i];
            if ( !p.annotation || !has_any_dict_value( p.annotation->normalized ) ) continue;
            // Generic containers whose contents are never looked at belong to
            // the detail-hiding pattern instead.
            if ( hides_details( d, i ) ) continue;
            slots.push_back( p.name );
            for ( const auto& use : uses_of( d, p.name ) )
                if ( ( use.tag == UseTag::SubscriptedWithStringLiteral ||
                       use.tag == UseTag::MembershipTestedWithStringLiteral ) &&
                     std::find( keys.begin(), keys.end(), use.detail ) == keys.end() )
                    keys.push_back( use.detail );
        }
        if ( d.return_annotation && has_any_dict_value( d.return_annotation->normalized ) ) slots.push_back( "return" );
        if ( slots.empty() ) continue;

        const bool upgraded = !keys.empty();
        Finding    f        = make_finding( Pattern::Ddict, d, upgraded ? Confidence::High : Confidence::Low,
                                            upgraded ? "dictionary with Any values is read through literal keys " + join( keys )
                                                     : "dictionary with Any values in the signature" );
        f.evidence          = { { "slots", join( slots ) }, { "keys", join( keys ) } };
        out.push_back( std::move( f ) );
    }
    return out;
}

std::vector<Finding> detect_override_suppressions( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        if ( !d.trailing_ignore || !d.trailing_ignore->has_code( "override" ) ) continue;

        OverrideOutcome    outcome = OverrideOutcome::ParentNotFound;
        std::string        parent_signature;
        std::string        parent_symbol;
        std::string        note;
        const ClassDecl*   cls = owning_class( model, d );
        if ( cls )
        {
            const ParentLookup lookup = resolve_parent_method( model, *cls, d.name );
            note                      = lookup.note;
            if ( lookup.status == ParentLookup::Status::ParentClassUnresolved )
                outcome = OverrideOutcome::ParentClassUnresolved;
            else if ( lookup.status == ParentLookup::Status::Found )
            {
                const Declaration& parent = *lookup.method;
                parent_signature          = render_stub_line( parent ).text;
                parent_symbol             = parent.qualified_name;
                if ( argument_types( d ) != argument_types( parent ) ) outcome = OverrideOutcome::DifferentArgs;
                else if ( return_slot_type( d ) != return_slot_type( parent ) )
                    outcome = OverrideOutcome::DifferentReturnOnly;
                else outcome = OverrideOutcome::IdenticalArgs;
            }
        }

        const bool differs = outcome == OverrideOutcome::DifferentArgs;
        Finding    f       = make_finding( Pattern::Override, d, differs ? Confidence::High : Confidence::Medium,
                                           "override check suppressed with type: ignore[override]; " +
                                               std::string( to_string( outcome ) ) );
        f.evidence         = { { "outcome", std::string( to_string( outcome ) ) },
                               { "child_signature", render_stub_line( d ).text },
                               { "parent_signature", parent_signature },
                               { "parent_symbol", parent_symbol } };
        if ( !note.empty() ) f.evidence.emplace_back( "note", note );
        out.push_back( std::move( f ) );
    }
    return out;
}

std::vector<Finding> detect_wrapper_functions( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        std::vector<std::string> wrapped;
        std::size_t              calls = 0;
        for ( const auto& p : d.params )
        {
            if ( !p.annotation || p.annotation->parsed.kind != TypeKind::Callable || !p.annotation->parsed.was_bare )
                continue;
            auto it = d.body_facts.param_call_sites.find( p.name );
            if ( it == d.body_facts.param_call_sites.end() || it->second.empty() ) continue;
            const bool forwards = std::all_of( it->second.begin(), it->second.end(), []( const CallShape& s ) {
                return s.has_star_args && s.has_double_star_kwargs;
            } );
            if ( !forwards ) continue;
            wrapped.push_back( p.name );
            calls += it->second.size();
        }
        if ( wrapped.empty() ) continue;
        Finding f  = make_finding( Pattern::Wrapper, d, Confidence::High,
                                   "plain Callable parameter " + join( wrapped ) +
                                       " is always called with *args and **kwargs forwarded" );
        f.evidence = { { "parameters", join( wrapped ) }, { "call_sites", std::to_string( calls ) } };
        out.push_back( std::move( f ) );
    }
    return out;
}

std::vector<Finding> detect_detail_hiding( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        for ( std::size_t i = 0; i < d.params.size(); ++i )
        {
            if ( !hides_details( d, i ) ) continue;
            const Parameter&         p = d.params[i];
            std::vector<std::string> tags;
            for ( const auto& use : uses_of( d, p.name ) )
            {
                std::string tag( to_string( use.tag ) );
                if ( !use.detail.empty() ) tag += "(" + use.detail + ")";
                if ( std::find( tags.begin(), tags.end(), tag ) == tags.end() ) tags.push_back( tag );
            }
            Finding f    = make_finding( Pattern::Details, d, Confidence::Medium,
                                         "parameter " + p.name + " uses Any but its uses impose no constraint" );
            f.evidence   = { { "parameter", p.name },
                             { "annotation", render( p.annotation->normalized ) },
                             { "uses", join( tags ) } };
            f.suggestion = Suggestion { Suggestion::Target::Param, static_cast<int>( i ),
                                        render( replace_any_with_type_vars( p.annotation->normalized ) ) };
            out.push_back( std::move( f ) );
        }
    }
    return out;
}

std::vector<Finding> detect_any_as_noreturn( const ProjectModel& model )
{
    std::vector<Finding> out;
    for ( const auto& d : model.declarations )
    {
        if ( !explicit_any( d.return_annotation ) || !d.body_facts.all_paths_raise ) continue;
        Finding f    = make_finding( Pattern::Noreturn, d, Confidence::High,
                                     "every path raises but the return type is Any" );
        f.evidence   = { { "all_paths_raise", "true" } };
        f.suggestion = Suggestion { Suggestion::Target::ReturnType, -1, render( TypeExpr::never() ) };
        out.push_back( std::move( f ) );
    }
    return out;
}

std::vector<Finding> run_detectors( const ProjectModel& model, const PatternSet& enabled )
{
    using Detector = std::vector<Finding> ( * )( const ProjectModel& );
    const std::pair<Pattern, Detector> table[] = {
        { Pattern::Tvar, detect_any_instead_of_typevar },  { Pattern::Uvar, detect_unconstrained_typevars },
        { Pattern::Self, detect_any_instead_of_self },     { Pattern::Ddict, detect_dependent_dicts },
        { Pattern::Override, detect_override_suppressions }, { Pattern::Wrapper, detect_wrapper_functions },
        { Pattern::Details, detect_detail_hiding },        { Pattern::Noreturn, detect_any_as_noreturn },
    };
    std::vector<Finding> all;
    for ( const auto& [pattern, detect] : table )
    {
        if ( !enabled.count( pattern ) ) continue;
        auto found = detect( model );
        all.insert( all.end(), std::make_move_iterator( found.begin() ), std::make_move_iterator( found.end() ) );
    }
    std::stable_sort( all.begin(), all.end(), finding_less );
    return all;
}

}  // namespace anylens
