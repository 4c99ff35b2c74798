#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace panelval {

// Label code: index into a LabelScheme's class list. kMissingLabel marks
// an absent cell in sparse panels.
using LabelCode = std::int8_t;
inline constexpr LabelCode kMissingLabel = -1;

// Lowercases and trims surrounding whitespace. Input labels are matched
// after normalization; canonical casing is kept for presentation.
std::string normalize_label(std::string_view raw);

// Ordered set of visit classes plus the class treated as "positive".
class LabelScheme {
public:
    LabelScheme(std::vector<std::string> classes, std::string_view positive_class);

    // {Wellness, Other}, positive Wellness.
    static LabelScheme binary();
    // {Wellness, NonWellness, Boarding, Grooming, Retail}, positive Wellness.
    static LabelScheme extended();

    std::size_t size() const { return classes_.size(); }
    const std::vector<std::string>& classes() const { return classes_; }
    const std::string& name(LabelCode code) const;
    LabelCode positive() const { return positive_; }
    bool is_positive(LabelCode code) const { return code == positive_; }

    // Code for a (possibly uncanonical) label name, kMissingLabel if unknown.
    LabelCode find(std::string_view raw) const;
    // Same, but throws InputError naming the label when unknown.
    LabelCode require(std::string_view raw) const;

    bool operator==(const LabelScheme& other) const = default;

private:
    std::vector<std::string> classes_;
    LabelCode positive_;
};

} // namespace panelval
