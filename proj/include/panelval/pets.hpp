#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "panelval/labels.hpp"

namespace panelval {

enum class Species { canine, feline };
enum class Sex { female, female_spayed, male, male_neutered, unknown };
enum class LifeStage { juvenile, young_adult, mature_adult, senior, geriatric, unknown };

inline constexpr std::size_t kSexCount = 5;
inline constexpr std::size_t kLifeStageCount = 6;

std::string_view to_string(Species s);
std::string_view to_string(Sex s);
std::string_view to_string(LifeStage s);
Species parse_species(std::string_view raw);
Sex parse_sex(std::string_view raw);

struct PetRecord {
    std::string visit_id;
    Species species;
    Sex sex = Sex::unknown;
    std::optional<double> age_years;
};

// Species-specific age bands; intervals are left-open, right-closed above
// one year. Absent age maps to unknown, negative age is rejected.
LifeStage life_stage(Species species, std::optional<double> age_years);

struct SpeciesSummary {
    std::size_t n = 0;
    std::array<std::size_t, kSexCount> by_sex{};
    std::array<std::size_t, kLifeStageCount> by_stage{};
    std::optional<double> median_age;
    std::optional<double> age_q1;
    std::optional<double> age_q3;

    // Percentage of the per-species total; full precision, rounding is
    // the consumer's job.
    double sex_percent(Sex s) const;
    double stage_percent(LifeStage s) const;
};

struct CohortSummary {
    SpeciesSummary canine;
    SpeciesSummary feline;
    std::size_t total() const { return canine.n + feline.n; }
};

CohortSummary cohort_summary(std::span<const PetRecord> pets);

} // namespace panelval
