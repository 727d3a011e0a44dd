#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace litscape {

enum class Category { Objective, Method, Dataset };

inline constexpr std::array<Category, 3> kAllCategories = {
    Category::Objective, Category::Method, Category::Dataset};

enum class SectionKind { Introduction, Methods, Results, Data, Experiments, Conclusion, Other };

std::string_view to_string(Category c);
std::string_view to_string(SectionKind k);
Category category_from_string(std::string_view s);
SectionKind section_kind_from_string(std::string_view s);

// Error classes map onto process exit codes in the CLI.
enum class ErrorKind {
    InvalidArgument,
    Config,
    Network,
    Backend,
    DataIntegrity,
    Parse,
    EmptyCorpus,
    EmptyPaper,
    DegenerateEmbedding,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

std::string_view to_string(ErrorKind k);

// 2 config, 3 network, 4 backend, 5 data integrity, 1 anything else.
int exit_code(ErrorKind k);

// ASCII helpers shared by several modules.
std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

}  // namespace litscape
