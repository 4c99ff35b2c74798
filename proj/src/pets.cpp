#include "panelval/pets.hpp"

#include <algorithm>
#include <vector>

#include "panelval/common.hpp"
#include "panelval/resampling.hpp"

namespace panelval {

std::string_view to_string(Species s) {
    return s == Species::canine ? "canine" : "feline";
}

std::string_view to_string(Sex s) {
    switch (s) {
        case Sex::female: return "female";
        case Sex::female_spayed: return "female_spayed";
        case Sex::male: return "male";
        case Sex::male_neutered: return "male_neutered";
        case Sex::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(LifeStage s) {
    switch (s) {
        case LifeStage::juvenile: return "juvenile";
        case LifeStage::young_adult: return "young_adult";
        case LifeStage::mature_adult: return "mature_adult";
        case LifeStage::senior: return "senior";
        case LifeStage::geriatric: return "geriatric";
        case LifeStage::unknown: return "unknown";
    }
    return "unknown";
}

Species parse_species(std::string_view raw) {
    const std::string norm = normalize_label(raw);
    if (norm == "canine") return Species::canine;
    if (norm == "feline") return Species::feline;
    throw InputError("unknown species: \"" + std::string(raw) + "\"");
}

Sex parse_sex(std::string_view raw) {
    const std::string norm = normalize_label(raw);
    if (norm == "female") return Sex::female;
    if (norm == "female_spayed") return Sex::female_spayed;
    if (norm == "male") return Sex::male;
    if (norm == "male_neutered") return Sex::male_neutered;
    if (norm == "unknown") return Sex::unknown;
    throw InputError("unknown sex: \"" + std::string(raw) + "\"");
}

LifeStage life_stage(Species species, std::optional<double> age_years) {
    if (!age_years.has_value()) return LifeStage::unknown;
    const double age = *age_years;
    if (age < 0.0) throw InputError("negative age");
    if (age <= 1.0) return LifeStage::juvenile;
    if (species == Species::canine) {
        if (age <= 4.0) return LifeStage::young_adult;
        if (age <= 7.0) return LifeStage::mature_adult;
        if (age <= 10.0) return LifeStage::senior;
        return LifeStage::geriatric;
    }
    if (age <= 2.0) return LifeStage::young_adult;
    if (age <= 10.0) return LifeStage::mature_adult;
    if (age <= 15.0) return LifeStage::senior;
    return LifeStage::geriatric;
}

double SpeciesSummary::sex_percent(Sex s) const {
    if (n == 0) return 0.0;
    return 100.0 * static_cast<double>(by_sex[static_cast<std::size_t>(s)]) /
           static_cast<double>(n);
}

double SpeciesSummary::stage_percent(LifeStage s) const {
    if (n == 0) return 0.0;
    return 100.0 * static_cast<double>(by_stage[static_cast<std::size_t>(s)]) /
           static_cast<double>(n);
}

CohortSummary cohort_summary(std::span<const PetRecord> pets) {
    CohortSummary out;
    std::vector<double> canine_ages, feline_ages;
    for (const auto& pet : pets) {
        SpeciesSummary& s = pet.species == Species::canine ? out.canine : out.feline;
        s.n += 1;
        s.by_sex[static_cast<std::size_t>(pet.sex)] += 1;
        s.by_stage[static_cast<std::size_t>(life_stage(pet.species, pet.age_years))] += 1;
        if (pet.age_years.has_value()) {
            (pet.species == Species::canine ? canine_ages : feline_ages).push_back(*pet.age_years);
        }
    }
    auto fill_ages = [](SpeciesSummary& s, std::vector<double>& ages) {
        if (ages.empty()) return;
        std::sort(ages.begin(), ages.end());
        s.age_q1 = quantile_sorted(ages, 0.25);
        s.median_age = quantile_sorted(ages, 0.5);
        s.age_q3 = quantile_sorted(ages, 0.75);
    };
    fill_ages(out.canine, canine_ages);
    fill_ages(out.feline, feline_ages);
    return out;
}

} // namespace panelval
