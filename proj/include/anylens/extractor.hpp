#pragma once

#include "anylens/model.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace anylens
{

namespace python
{
struct Module;
}

class DuplicatePathError : public std::runtime_error
{
public:
    explicit DuplicatePathError( const std::string& path )
        : std::runtime_error( "duplicate file path in project: " + path ), path_( path )
    {
    }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Parses one file into its slice of the project model. Never throws for
/// malformed input: syntax and encoding errors mark the model as failed.
FileModel parse_source_file( std::string_view path, std::string_view source );

/// Every `# type: ignore[...]` comment in the source. Comments inside string
/// literals are not comments and are not reported.
std::vector<IgnoreComment> scan_ignore_comments( std::string_view source, std::string_view file_path = {} );

/// Import bindings of a module, with typing_extensions folded into typing.
AliasMap resolve_import_aliases( const python::Module& module );
AliasMap resolve_import_aliases( std::string_view source );

/// Deterministic merge: output does not depend on input order.
/// Throws DuplicatePathError when two file models share a path.
ProjectModel merge_models( std::string project_id, std::vector<FileModel> files );

struct ParentLookup
{
    enum class Status
    {
        Found,
        ParentClassUnresolved,
        MethodNotInAncestors,
    };

    Status             status = Status::MethodNotInAncestors;
    const Declaration* method = nullptr;  // set when found
    const ClassDecl*   owner  = nullptr;  // set when found
    std::string        note;
};

/// Looks the method up in the ancestors of `cls`, depth-first and
/// left-to-right over the written bases. Bases are matched by qualified-name
/// suffix within the project.
ParentLookup resolve_parent_method( const ProjectModel& model, const ClassDecl& cls, std::string_view method );

/// `pkg/mod.py` -> `pkg.mod`, `pkg/__init__.py` -> `pkg`.
std::string module_name_for( std::string_view path );

}  // namespace anylens
