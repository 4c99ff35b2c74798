#include "panelval/labels.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "panelval/common.hpp"

namespace panelval {

std::string normalize_label(std::string_view raw) {
    std::size_t begin = 0;
    std::size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    std::string out(raw.substr(begin, end - begin));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

LabelScheme::LabelScheme(std::vector<std::string> classes, std::string_view positive_class)
    : classes_(std::move(classes)), positive_(kMissingLabel) {
    if (classes_.size() < 2) {
        throw InputError("label scheme needs at least 2 classes");
    }
    std::unordered_set<std::string> seen;
    for (const auto& c : classes_) {
        if (!seen.insert(normalize_label(c)).second) {
            throw InputError("duplicate class in label scheme: " + c);
        }
    }
    positive_ = find(positive_class);
    if (positive_ == kMissingLabel) {
        throw InputError("positive class not in scheme: " + std::string(positive_class));
    }
}

LabelScheme LabelScheme::binary() {
    return LabelScheme({"Wellness", "Other"}, "Wellness");
}

LabelScheme LabelScheme::extended() {
    return LabelScheme({"Wellness", "NonWellness", "Boarding", "Grooming", "Retail"}, "Wellness");
}

const std::string& LabelScheme::name(LabelCode code) const {
    if (code < 0 || static_cast<std::size_t>(code) >= classes_.size()) {
        throw InputError("label code out of range");
    }
    return classes_[static_cast<std::size_t>(code)];
}

LabelCode LabelScheme::find(std::string_view raw) const {
    const std::string norm = normalize_label(raw);
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (normalize_label(classes_[i]) == norm) return static_cast<LabelCode>(i);
    }
    return kMissingLabel;
}

LabelCode LabelScheme::require(std::string_view raw) const {
    const LabelCode code = find(raw);
    if (code == kMissingLabel) {
        throw InputError("label not in scheme: \"" + std::string(raw) + "\"");
    }
    return code;
}

} // namespace panelval
