#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "panelval/annotations.hpp"
#include "panelval/consensus.hpp"
#include "panelval/pets.hpp"
#include "panelval/predictions.hpp"

namespace panelval {

// Minimal RFC-4180 CSV: quoted fields, embedded commas/quotes/newlines.
// Ragged rows and unterminated quotes are reported with line numbers.
struct CsvDocument {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based, parallel to rows
};

CsvDocument read_csv(const std::filesystem::path& path);
CsvDocument read_csv_string(const std::string& text, const std::string& origin = "<string>");
std::string csv_escape(std::string_view field);

// annotations CSV: visit_id,rater_id,label
AnnotationTable parse_annotations(const std::filesystem::path& path, const LabelScheme& scheme);
AnnotationTable parse_annotations_string(const std::string& text, const LabelScheme& scheme);
std::string serialize_annotations(const AnnotationTable& table);
void write_annotations(const AnnotationTable& table, const std::filesystem::path& path);

// predictions CSV: visit_id,label,probability (probability may be empty)
PredictionSet parse_predictions(const std::filesystem::path& path, const LabelScheme& scheme);
PredictionSet parse_predictions_string(const std::string& text, const LabelScheme& scheme);
std::string serialize_predictions(const PredictionSet& predictions, const LabelScheme& scheme);
void write_predictions(const PredictionSet& predictions, const LabelScheme& scheme,
                       const std::filesystem::path& path);

// pets CSV: visit_id,species,sex,age_years (age may be empty)
std::vector<PetRecord> parse_pets(const std::filesystem::path& path);
std::vector<PetRecord> parse_pets_string(const std::string& text);

// reference CSV: visit_id,reference_label,unanimous,votes_<class>...
// (votes_wellness,votes_other in binary mode)
std::string serialize_reference(const ReferenceLabeling& reference);
void write_reference(const ReferenceLabeling& reference, const std::filesystem::path& path);
ReferenceLabeling parse_reference(const std::filesystem::path& path, const LabelScheme& scheme);
ReferenceLabeling parse_reference_string(const std::string& text, const LabelScheme& scheme);

} // namespace panelval
