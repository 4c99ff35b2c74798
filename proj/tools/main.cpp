// panelval: validate a binary classifier against a panel of human
// annotators without a perfect gold standard.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "panelval/calibration.hpp"
#include "panelval/common.hpp"
#include "panelval/consensus.hpp"
#include "panelval/csv.hpp"
#include "panelval/latent_class.hpp"
#include "panelval/metrics.hpp"
#include "panelval/panel_sim.hpp"
#include "panelval/pets.hpp"
#include "panelval/plot.hpp"
#include "panelval/report.hpp"
#include "panelval/resampling.hpp"

using namespace panelval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGateFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
    std::string out;           // report destination; empty = stdout
    std::string format = "json";
    std::string scheme = "binary";
    unsigned threads = 1;
};

LabelScheme resolve_scheme(const std::string& name) {
    if (name == "binary") return LabelScheme::binary();
    if (name == "extended") return LabelScheme::extended();
    throw InputError("unknown scheme: \"" + name + "\" (expected binary or extended)");
}

// Seed is drawn (and announced) when the caller does not pin one;
// reproducible runs must pass --seed.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag.has_value()) return *flag;
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cerr << "seed: " << seed << "\n";
    return seed;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << content;
    if (!out) throw InputError("write failed: " + path.string());
}

void deliver_report(const ReportDocument& doc, const CommonOptions& common) {
    const std::string rendered = emit_report(doc, parse_format(common.format));
    if (common.out.empty()) {
        std::cout << rendered;
    } else {
        write_text(common.out, rendered);
    }
}

// Command echo normalized for reproducibility comparisons: --threads and
// its value are execution policy, not analysis input, so they are elided.
std::string command_echo(int argc, char** argv) {
    std::string echo;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        if (arg == "--threads") {
            ++i;
            continue;
        }
        if (arg.rfind("--threads=", 0) == 0) continue;
        if (!echo.empty()) echo += ' ';
        echo += arg;
    }
    return echo;
}

ReportDocument base_report(const std::string& echo,
                           const std::vector<std::string>& input_paths,
                           std::optional<std::uint64_t> seed) {
    ReportDocument doc;
    doc.tool_version = kToolVersion;
    doc.command = echo;
    doc.seed = seed;
    for (const auto& path : input_paths) {
        doc.inputs.emplace_back(path, sha256_file(path));
    }
    return doc;
}

Json interval_json(const IntervalEstimate& ci) {
    return Json{{"estimate", ci.estimate},
                {"lower", ci.lower},
                {"upper", ci.upper},
                {"n_valid_replicates", ci.n_valid_replicates},
                {"n_undefined_replicates", ci.n_undefined_replicates}};
}

Json rater_match_json(const std::vector<RaterMatchRate>& rates) {
    Json arr = Json::array();
    for (const auto& r : rates) {
        arr.push_back(Json{{"rater", r.rater},
                           {"rate", r.rate},
                           {"matched", r.matched},
                           {"countable", r.countable}});
    }
    return arr;
}

const char* stop_reason_name(EmStop reason) {
    switch (reason) {
        case EmStop::param_tol: return "param_tol";
        case EmStop::loglik_tol: return "loglik_tol";
        case EmStop::max_iter: return "max_iter";
    }
    return "max_iter";
}

RaterProfile parse_rater_spec(const std::string& raw) {
    const auto colon = raw.find(':');
    if (colon == std::string::npos) {
        throw InputError("rater spec must be se:sp, got \"" + raw + "\"");
    }
    try {
        return {std::stod(raw.substr(0, colon)), std::stod(raw.substr(colon + 1))};
    } catch (const std::exception&) {
        throw InputError("malformed rater spec \"" + raw + "\"");
    }
}

BetaShapes parse_beta_spec(const std::string& raw) {
    const auto colon = raw.find(':');
    if (colon == std::string::npos) {
        throw InputError("beta spec must be alpha:beta, got \"" + raw + "\"");
    }
    try {
        return {std::stod(raw.substr(0, colon)), std::stod(raw.substr(colon + 1))};
    } catch (const std::exception&) {
        throw InputError("malformed beta spec \"" + raw + "\"");
    }
}

// ---------------------------------------------------------------------------
// consensus

int run_consensus(const std::string& echo, const std::string& annotations_path,
                  const std::string& export_path, const CommonOptions& common) {
    const LabelScheme scheme = resolve_scheme(common.scheme);
    const AnnotationTable table = parse_annotations(annotations_path, scheme);
    const ReferenceLabeling reference = majority_reference(table);

    ReportDocument doc = base_report(echo, {annotations_path}, std::nullopt);
    Json counts = Json::object();
    for (std::size_t c = 0; c < scheme.size(); ++c) {
        counts[normalize_label(scheme.classes()[c])] =
            reference.count_with_label(static_cast<LabelCode>(c));
    }
    doc.results = Json{{"n_visits", table.n_visits()},
                       {"n_raters", table.n_raters()},
                       {"n_consensus", reference.n_consensus()},
                       {"n_no_consensus", reference.n_visits() - reference.n_consensus()},
                       {"n_unanimous", reference.n_unanimous()},
                       {"reference_counts", counts}};
    if (!export_path.empty()) {
        write_reference(reference, export_path);
        doc.results["exported"] = export_path;
    }
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// agreement

int run_agreement(const std::string& echo, const std::string& annotations_path,
                  const CommonOptions& common) {
    const LabelScheme scheme = resolve_scheme(common.scheme);
    const AnnotationTable table = parse_annotations(annotations_path, scheme);
    const AgreementReport agreement = agreement_report(table);

    ReportDocument doc = base_report(echo, {annotations_path}, std::nullopt);
    Json kappa;
    if (agreement.kappa.kappa.has_value()) {
        kappa["value"] = *agreement.kappa.kappa;
        kappa["status"] = "ok";
    } else {
        kappa["value"] = nullptr;
        kappa["status"] = "undefined_single_category";
    }
    kappa["included_visits"] = agreement.kappa.included_visits;
    kappa["excluded_visits"] = agreement.kappa.excluded_visits;
    doc.results = Json{
        {"n_visits", agreement.n_visits},
        {"exact_match",
         Json{{"rate", agreement.exact_match.rate},
              {"unanimous_visits", agreement.exact_match.unanimous_visits},
              {"fully_annotated_visits", agreement.exact_match.fully_annotated_visits},
              {"excluded_incomplete", agreement.exact_match.excluded_incomplete}}},
        {"fleiss_kappa", kappa},
        {"per_rater_match", rater_match_json(agreement.per_rater_match)},
        {"no_consensus_visits", agreement.no_consensus_visits}};
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// qualify

int run_qualify(const std::string& echo, const std::string& annotations_path,
                const std::string& reference_path, std::optional<double> direct_rate,
                double threshold, const CommonOptions& common) {
    ReportDocument doc;
    bool all_pass = true;

    if (direct_rate.has_value()) {
        doc = base_report(echo, {}, std::nullopt);
        const bool pass = qualification_gate(*direct_rate, threshold);
        all_pass = pass;
        doc.results = Json{{"threshold", threshold},
                           {"rate", *direct_rate},
                           {"pass", pass}};
    } else {
        if (annotations_path.empty()) {
            throw InputError("qualify needs --annotations (or a direct --rate)");
        }
        const LabelScheme scheme = resolve_scheme(common.scheme);
        const AnnotationTable table = parse_annotations(annotations_path, scheme);
        std::vector<std::string> inputs = {annotations_path};
        ReferenceLabeling reference = [&] {
            if (reference_path.empty()) return majority_reference(table);
            inputs.push_back(reference_path);
            return parse_reference(reference_path, scheme);
        }();
        doc = base_report(echo, inputs, std::nullopt);
        Json raters = Json::array();
        for (const auto& r : rater_match_rates(table, reference)) {
            const bool pass = qualification_gate(r.rate, threshold);
            all_pass = all_pass && pass;
            raters.push_back(Json{{"rater", r.rater},
                                  {"rate", r.rate},
                                  {"matched", r.matched},
                                  {"countable", r.countable},
                                  {"pass", pass}});
        }
        doc.results = Json{{"threshold", threshold}, {"raters", raters}, {"all_pass", all_pass}};
    }
    deliver_report(doc, common);
    return all_pass ? kExitOk : kExitGateFail;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const std::string& echo, const std::string& predictions_path,
                 const std::string& reference_path, const BootstrapSpec& spec,
                 const CommonOptions& common) {
    const LabelScheme scheme = resolve_scheme(common.scheme);
    const PredictionSet predictions = parse_predictions(predictions_path, scheme);
    const ReferenceLabeling reference = parse_reference(reference_path, scheme);
    const ContingencyBuild build = build_contingency(predictions, reference, scheme);
    const MetricSuite point = compute_metrics(build.table);

    const auto replicate_values = bootstrap_replicates(
        std::span<const OutcomePair>(build.pairs), kMetricCount,
        [](std::span<const OutcomePair> resample, std::span<std::optional<double>> out) {
            const MetricSuite m = compute_metrics(contingency_from_pairs(resample));
            for (std::size_t k = 0; k < kMetricCount; ++k) out[k] = m.by_index(k);
        },
        spec, common.threads);

    Json metrics = Json::object();
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        std::vector<std::optional<double>> column(spec.replicates);
        for (std::size_t r = 0; r < spec.replicates; ++r) {
            column[r] = replicate_values[r * kMetricCount + k];
        }
        const std::optional<double> estimate = point.by_index(k);
        Json entry;
        if (estimate.has_value()) {
            entry = interval_json(detail::summarize_replicates(*estimate, column,
                                                               spec.confidence));
        } else {
            // undefined on the full data: no point estimate, no interval
            std::size_t undefined = 0;
            for (const auto& v : column) {
                if (!v.has_value()) ++undefined;
            }
            entry = Json{{"estimate", nullptr},
                         {"lower", nullptr},
                         {"upper", nullptr},
                         {"n_valid_replicates", spec.replicates - undefined},
                         {"n_undefined_replicates", undefined}};
        }
        metrics[kMetricNames[k]] = entry;
    }

    ReportDocument doc = base_report(echo, {predictions_path, reference_path}, spec.seed);
    doc.results = Json{
        {"contingency", Json{{"tp", build.table.tp},
                             {"fp", build.table.fp},
                             {"fn", build.table.fn},
                             {"tn", build.table.tn},
                             {"total", build.table.total()},
                             {"skipped_no_prediction", build.skipped_no_prediction},
                             {"skipped_no_reference", build.skipped_no_reference}}},
        {"metrics", metrics},
        {"bootstrap", Json{{"replicates", spec.replicates},
                           {"seed", spec.seed},
                           {"confidence", spec.confidence}}}};
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// em

int run_em(const std::string& echo, const std::string& annotations_path,
           const std::string& predictions_path, const BootstrapSpec& spec,
           const EmOptions& options, const CommonOptions& common) {
    const LabelScheme scheme = resolve_scheme(common.scheme);
    AnnotationTable table = parse_annotations(annotations_path, scheme);
    std::vector<std::string> inputs = {annotations_path};
    if (!predictions_path.empty()) {
        table = with_algorithm_rater(table, parse_predictions(predictions_path, scheme));
        inputs.push_back(predictions_path);
    }
    const VotePatternTable data = VotePatternTable::from_annotations(table);
    const EmBootstrapResult result = em_bootstrap_ci(data, spec, options, common.threads);
    const EmFit& fit = result.fit;

    Json raters = Json::array();
    for (std::size_t j = 0; j < data.n_raters(); ++j) {
        raters.push_back(Json{{"id", data.raters()[j]},
                              {"sensitivity", interval_json(result.se[j])},
                              {"specificity", interval_json(result.sp[j])}});
    }
    ReportDocument doc = base_report(echo, inputs, spec.seed);
    doc.results = Json{
        {"prevalence", interval_json(result.prevalence)},
        {"raters", raters},
        {"loglik", log_likelihood(fit.model, data)},
        {"iterations", fit.trace.iterations},
        {"converged", fit.trace.converged},
        {"stop_reason", stop_reason_name(fit.trace.stop_reason)},
        {"n_visits", static_cast<std::int64_t>(data.total())},
        {"n_patterns", data.n_patterns()},
        {"bootstrap", Json{{"replicates", spec.replicates},
                           {"seed", spec.seed},
                           {"confidence", spec.confidence},
                           {"failed_replicates", result.failed_replicates}}}};
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// calibrate

int run_calibrate(const std::string& echo, const std::string& predictions_path,
                  const std::string& reference_path, const BootstrapSpec& spec,
                  std::size_t grid, const std::string& curve_path,
                  const std::string& svg_path, const CommonOptions& common) {
    const LabelScheme scheme = resolve_scheme(common.scheme);
    const PredictionSet predictions = parse_predictions(predictions_path, scheme);
    const ReferenceLabeling reference = parse_reference(reference_path, scheme);
    const ProbabilitySeries series = series_from_predictions(predictions, reference, scheme);

    CalibrationOptions options;
    options.grid_size = grid;
    const CalibrationReport report =
        bias_corrected_calibration(series, spec, options, common.threads);

    if (!curve_path.empty()) {
        std::string csv = "predicted,apparent,bias_corrected\n";
        for (const auto& pt : report.curve) {
            csv += Json(pt.predicted).dump();
            csv += ',';
            csv += Json(pt.apparent).dump();
            csv += ',';
            csv += Json(pt.bias_corrected).dump();
            csv += '\n';
        }
        write_text(curve_path, csv);
    }
    if (!svg_path.empty()) {
        write_text(svg_path, calibration_curve_svg(report.curve));
    }

    ReportDocument doc = base_report(echo, {predictions_path, reference_path}, spec.seed);
    doc.results = Json{
        {"n", series.size()},
        {"brier", report.brier},
        {"c_index", report.c_index},
        {"apparent", Json{{"intercept", report.apparent.intercept},
                          {"slope", report.apparent.slope}}},
        {"corrected", Json{{"intercept", report.corrected_intercept},
                           {"slope", report.corrected_slope}}},
        {"emax", report.emax},
        {"mean_abs_error", report.mean_abs_error},
        {"grid_size", grid},
        {"bootstrap", Json{{"replicates", spec.replicates},
                           {"seed", spec.seed},
                           {"confidence", spec.confidence},
                           {"failed_replicates", report.failed_replicates}}}};
    if (!curve_path.empty()) doc.results["curve_csv"] = curve_path;
    if (!svg_path.empty()) doc.results["svg"] = svg_path;
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const std::string& echo, const PanelDesign& design,
                 const std::string& panel_path, const std::string& truth_path,
                 const std::string& probs_path, const CommonOptions& common) {
    const SimulatedPanel panel = simulate_panel(design);
    write_annotations(panel.table, panel_path);

    std::size_t positives = 0;
    for (const auto t : panel.truth) positives += t;

    if (!truth_path.empty()) {
        std::string csv = "visit_id,truth\n";
        for (std::size_t i = 0; i < panel.truth.size(); ++i) {
            csv += panel.table.visit_ids()[i];
            csv += ',';
            csv += panel.truth[i] ? '1' : '0';
            csv += '\n';
        }
        write_text(truth_path, csv);
    }
    if (!probs_path.empty()) {
        const auto [pos, neg] = design.probability_model.value_or(
            std::make_pair(kDefaultPositiveShapes, kDefaultNegativeShapes));
        const ProbabilitySeries probs = simulate_probabilities(
            panel.truth, pos, neg, stream_seed(design.seed, 0x70726F62ULL));
        const LabelScheme& scheme = panel.table.scheme();
        PredictionSet preds(panel.truth.size());
        for (std::size_t i = 0; i < panel.truth.size(); ++i) {
            const double p = probs.p[static_cast<Eigen::Index>(i)];
            preds[i].visit_id = panel.table.visit_ids()[i];
            preds[i].label = p >= 0.5 ? scheme.positive() : LabelCode{1};
            preds[i].probability = p;
        }
        write_predictions(preds, scheme, probs_path);
    }

    Json raters = Json::array();
    for (const auto& r : design.raters) {
        raters.push_back(Json{{"sensitivity", r.sensitivity}, {"specificity", r.specificity}});
    }
    ReportDocument doc = base_report(echo, {}, design.seed);
    doc.results = Json{{"n", design.n},
                       {"prevalence", design.prevalence},
                       {"raters", raters},
                       {"positives", positives},
                       {"panel_csv", panel_path}};
    if (!truth_path.empty()) doc.results["truth_csv"] = truth_path;
    if (!probs_path.empty()) doc.results["predictions_csv"] = probs_path;
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// power

int run_power(const std::string& echo, const PowerSpec& spec, const CommonOptions& common) {
    const PowerReport report = power_simulation(spec, common.threads);
    ReportDocument doc = base_report(echo, {}, spec.seed);
    doc.results = Json{
        {"sensitivity", spec.sensitivity},
        {"specificity", spec.specificity},
        {"prevalence", spec.prevalence},
        {"n", spec.n},
        {"sims", spec.sims},
        {"target_halfwidth", spec.target_halfwidth},
        {"method", spec.method == PowerMethod::wald ? "wald" : "bootstrap"},
        {"confidence", spec.confidence},
        {"mean_sens_halfwidth", report.mean_sens_halfwidth},
        {"mean_spec_halfwidth", report.mean_spec_halfwidth},
        {"fraction_adequate", report.fraction_adequate},
        {"fraction_sens_adequate", report.fraction_sens_adequate},
        {"fraction_spec_adequate", report.fraction_spec_adequate},
        {"n_defined", report.n_defined},
        {"n_undefined", report.n_undefined}};
    deliver_report(doc, common);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// cohort

Json species_json(const SpeciesSummary& s) {
    Json by_sex = Json::object();
    for (std::size_t k = 0; k < kSexCount; ++k) {
        by_sex[std::string(to_string(static_cast<Sex>(k)))] =
            Json{{"count", s.by_sex[k]}, {"percent", s.sex_percent(static_cast<Sex>(k))}};
    }
    Json by_stage = Json::object();
    for (std::size_t k = 0; k < kLifeStageCount; ++k) {
        by_stage[std::string(to_string(static_cast<LifeStage>(k)))] =
            Json{{"count", s.by_stage[k]}, {"percent", s.stage_percent(static_cast<LifeStage>(k))}};
    }
    Json age;
    if (s.median_age.has_value()) {
        age = Json{{"median", *s.median_age}, {"q1", *s.age_q1}, {"q3", *s.age_q3}};
    } else {
        age = nullptr;
    }
    return Json{{"n", s.n}, {"by_sex", by_sex}, {"by_life_stage", by_stage}, {"age_years", age}};
}

int run_cohort(const std::string& echo, const std::string& pets_path,
               const CommonOptions& common) {
    const std::vector<PetRecord> pets = parse_pets(pets_path);
    const CohortSummary summary = cohort_summary(pets);
    ReportDocument doc = base_report(echo, {pets_path}, std::nullopt);
    doc.results = Json{{"total", summary.total()},
                       {"canine", species_json(summary.canine)},
                       {"feline", species_json(summary.feline)}};
    deliver_report(doc, common);
    return kExitOk;
}

void add_common_flags(CLI::App* cmd, CommonOptions& common, bool with_format = true) {
    cmd->add_option("--out", common.out, "Report destination (default: stdout)");
    if (with_format) {
        cmd->add_option("--format", common.format, "Report format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    }
    cmd->add_option("--scheme", common.scheme, "Label scheme: binary or extended")
        ->check(CLI::IsMember({"binary", "extended"}));
    cmd->add_option("--threads", common.threads, "Worker threads for resampling");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classifier validation against annotator panels"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    const std::string echo = command_echo(argc, argv);

    // consensus ------------------------------------------------------------
    auto* consensus_cmd =
        app.add_subcommand("consensus", "Majority-consensus reference labels from a panel");
    CommonOptions consensus_common;
    std::string consensus_annotations, consensus_export;
    consensus_cmd->add_option("--annotations", consensus_annotations, "Annotations CSV")
        ->required();
    consensus_cmd->add_option("--export", consensus_export, "Write the reference CSV here");
    add_common_flags(consensus_cmd, consensus_common, false);

    // agreement ------------------------------------------------------------
    auto* agreement_cmd =
        app.add_subcommand("agreement", "Inter-rater agreement: exact match and Fleiss kappa");
    CommonOptions agreement_common;
    std::string agreement_annotations;
    agreement_cmd->add_option("--annotations", agreement_annotations, "Annotations CSV")
        ->required();
    add_common_flags(agreement_cmd, agreement_common, false);

    // qualify ----------------------------------------------------------------
    auto* qualify_cmd = app.add_subcommand(
        "qualify", "Gate rater match rates against the qualification benchmark");
    CommonOptions qualify_common;
    std::string qualify_annotations, qualify_reference;
    std::optional<double> qualify_rate;
    double qualify_threshold = 0.85;
    auto* qualify_annotations_opt =
        qualify_cmd->add_option("--annotations", qualify_annotations, "Annotations CSV");
    auto* qualify_reference_opt = qualify_cmd->add_option(
        "--reference", qualify_reference, "Reference CSV (default: panel majority)");
    qualify_cmd->add_option("--rate", qualify_rate, "Gate this match rate directly")
        ->excludes(qualify_annotations_opt)
        ->excludes(qualify_reference_opt);
    qualify_cmd->add_option("--threshold", qualify_threshold, "Pass threshold (inclusive)");
    add_common_flags(qualify_cmd, qualify_common, false);

    // validate ---------------------------------------------------------------
    auto* validate_cmd = app.add_subcommand(
        "validate", "Contingency metrics with bootstrap percentile intervals");
    CommonOptions validate_common;
    std::string validate_predictions, validate_reference;
    BootstrapSpec validate_spec;
    std::optional<std::uint64_t> validate_seed;
    validate_cmd->add_option("--predictions", validate_predictions, "Predictions CSV")
        ->required();
    validate_cmd->add_option("--reference", validate_reference, "Reference CSV")->required();
    validate_cmd->add_option("--boot", validate_spec.replicates, "Bootstrap replicates");
    validate_cmd->add_option("--seed", validate_seed, "RNG seed (drawn if absent)");
    validate_cmd->add_option("--confidence", validate_spec.confidence, "Interval confidence");
    add_common_flags(validate_cmd, validate_common);

    // em ----------------------------------------------------------------------
    auto* em_cmd = app.add_subcommand(
        "em", "Latent-class EM: prevalence and per-rater accuracy without a gold standard");
    CommonOptions em_common;
    std::string em_annotations, em_predictions;
    BootstrapSpec em_spec;
    std::optional<std::uint64_t> em_seed;
    EmOptions em_options;
    em_cmd->add_option("--annotations", em_annotations, "Annotations CSV")->required();
    em_cmd->add_option("--predictions", em_predictions,
                       "Predictions CSV joined as one more rater");
    em_cmd->add_option("--boot", em_spec.replicates, "Bootstrap replicates");
    em_cmd->add_option("--seed", em_seed, "RNG seed (drawn if absent)");
    em_cmd->add_option("--confidence", em_spec.confidence, "Interval confidence");
    em_cmd->add_option("--max-iter", em_options.max_iterations, "EM iteration cap");
    em_cmd->add_option("--restarts", em_options.random_restarts,
                       "Random restarts beyond the majority-vote start");
    em_cmd->add_flag("--waive-identifiability", em_options.waive_identifiability,
                     "Fit even when the rater count is below the identifiability bound");
    add_common_flags(em_cmd, em_common, false);

    // calibrate -----------------------------------------------------------------
    auto* calibrate_cmd = app.add_subcommand(
        "calibrate", "Brier, C index and bootstrap bias-corrected calibration curve");
    CommonOptions calibrate_common;
    std::string calibrate_predictions, calibrate_reference, calibrate_curve, calibrate_svg;
    BootstrapSpec calibrate_spec;
    std::optional<std::uint64_t> calibrate_seed;
    std::size_t calibrate_grid = 100;
    calibrate_cmd->add_option("--predictions", calibrate_predictions, "Predictions CSV")
        ->required();
    calibrate_cmd->add_option("--reference", calibrate_reference, "Reference CSV")->required();
    calibrate_cmd->add_option("--boot", calibrate_spec.replicates, "Bootstrap replicates");
    calibrate_cmd->add_option("--seed", calibrate_seed, "RNG seed (drawn if absent)");
    calibrate_cmd->add_option("--confidence", calibrate_spec.confidence, "Interval confidence");
    calibrate_cmd->add_option("--grid", calibrate_grid, "Curve grid size");
    calibrate_cmd->add_option("--curve", calibrate_curve, "Write the curve CSV here");
    calibrate_cmd->add_option("--svg", calibrate_svg, "Write a curve SVG here");
    add_common_flags(calibrate_cmd, calibrate_common, false);

    // simulate ---------------------------------------------------------------
    auto* simulate_cmd = app.add_subcommand(
        "simulate", "Synthetic conditional-independence panel (writes the annotations CSV)");
    CommonOptions simulate_common;
    PanelDesign simulate_design;
    std::vector<std::string> simulate_raters;
    std::optional<std::uint64_t> simulate_seed;
    std::string simulate_out, simulate_truth, simulate_probs;
    std::string simulate_beta_pos, simulate_beta_neg;
    simulate_cmd->add_option("--prevalence", simulate_design.prevalence, "P(positive class)")
        ->required();
    simulate_cmd->add_option("--rater", simulate_raters, "Rater profile se:sp (repeatable)")
        ->required();
    simulate_cmd->add_option("--n", simulate_design.n, "Number of visits")->required();
    simulate_cmd->add_option("--seed", simulate_seed, "RNG seed (drawn if absent)");
    simulate_cmd->add_option("--out", simulate_out, "Panel annotations CSV")->required();
    simulate_cmd->add_option("--truth", simulate_truth, "Write the truth CSV here");
    simulate_cmd->add_option("--probs", simulate_probs,
                             "Write a predictions CSV with class-conditional probabilities");
    simulate_cmd->add_option("--beta-pos", simulate_beta_pos,
                             "Positive-class Beta shapes alpha:beta (default 4:2)");
    simulate_cmd->add_option("--beta-neg", simulate_beta_neg,
                             "Negative-class Beta shapes alpha:beta (default 1:5)");
    simulate_cmd->add_option("--report", simulate_common.out,
                             "Report destination (default: stdout)");
    simulate_cmd->add_option("--threads", simulate_common.threads,
                             "Worker threads (unused, accepted for symmetry)");

    // power -----------------------------------------------------------------
    auto* power_cmd = app.add_subcommand(
        "power", "Sample-size adequacy via simulated studies and CI half-widths");
    CommonOptions power_common;
    PowerSpec power_spec;
    std::optional<std::uint64_t> power_seed;
    std::string power_method = "wald";
    power_cmd->add_option("--sens", power_spec.sensitivity, "True sensitivity")->required();
    power_cmd->add_option("--spec", power_spec.specificity, "True specificity")->required();
    power_cmd->add_option("--prevalence", power_spec.prevalence, "True prevalence")->required();
    power_cmd->add_option("--n", power_spec.n, "Study size");
    power_cmd->add_option("--sims", power_spec.sims, "Simulated studies");
    power_cmd->add_option("--target", power_spec.target_halfwidth,
                          "Adequate CI half-width target");
    power_cmd->add_option("--method", power_method, "CI method: wald or bootstrap")
        ->check(CLI::IsMember({"wald", "bootstrap"}));
    power_cmd->add_option("--confidence", power_spec.confidence, "Interval confidence");
    power_cmd->add_option("--boot", power_spec.bootstrap_replicates,
                          "Bootstrap replicates (bootstrap method)");
    power_cmd->add_option("--seed", power_seed, "RNG seed (drawn if absent)");
    add_common_flags(power_cmd, power_common, false);

    // cohort ------------------------------------------------------------------
    auto* cohort_cmd =
        app.add_subcommand("cohort", "Demographic summary of the validation cohort");
    CommonOptions cohort_common;
    std::string cohort_pets;
    cohort_cmd->add_option("--pets", cohort_pets, "Pets CSV")->required();
    add_common_flags(cohort_cmd, cohort_common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (consensus_cmd->parsed()) {
            return run_consensus(echo, consensus_annotations, consensus_export,
                                 consensus_common);
        }
        if (agreement_cmd->parsed()) {
            return run_agreement(echo, agreement_annotations, agreement_common);
        }
        if (qualify_cmd->parsed()) {
            return run_qualify(echo, qualify_annotations, qualify_reference, qualify_rate,
                               qualify_threshold, qualify_common);
        }
        if (validate_cmd->parsed()) {
            validate_spec.seed = resolve_seed(validate_seed);
            return run_validate(echo, validate_predictions, validate_reference, validate_spec,
                                validate_common);
        }
        if (em_cmd->parsed()) {
            em_spec.seed = resolve_seed(em_seed);
            em_options.restart_seed = em_spec.seed;
            return run_em(echo, em_annotations, em_predictions, em_spec, em_options, em_common);
        }
        if (calibrate_cmd->parsed()) {
            calibrate_spec.seed = resolve_seed(calibrate_seed);
            return run_calibrate(echo, calibrate_predictions, calibrate_reference,
                                 calibrate_spec, calibrate_grid, calibrate_curve,
                                 calibrate_svg, calibrate_common);
        }
        if (simulate_cmd->parsed()) {
            simulate_design.seed = resolve_seed(simulate_seed);
            for (const auto& spec : simulate_raters) {
                simulate_design.raters.push_back(parse_rater_spec(spec));
            }
            if (!simulate_beta_pos.empty() || !simulate_beta_neg.empty()) {
                BetaShapes pos = kDefaultPositiveShapes;
                BetaShapes neg = kDefaultNegativeShapes;
                if (!simulate_beta_pos.empty()) pos = parse_beta_spec(simulate_beta_pos);
                if (!simulate_beta_neg.empty()) neg = parse_beta_spec(simulate_beta_neg);
                simulate_design.probability_model = std::make_pair(pos, neg);
            }
            return run_simulate(echo, simulate_design, simulate_out, simulate_truth,
                                simulate_probs, simulate_common);
        }
        if (power_cmd->parsed()) {
            power_spec.seed = resolve_seed(power_seed);
            power_spec.method =
                power_method == "wald" ? PowerMethod::wald : PowerMethod::bootstrap;
            return run_power(echo, power_spec, power_common);
        }
        if (cohort_cmd->parsed()) {
            return run_cohort(echo, cohort_pets, cohort_common);
        }
        std::cerr << "error: no subcommand\n";
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
