#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace panelval {

using Json = nlohmann::ordered_json;

enum class ReportFormat { json, csv };

// Self-describing analysis report: tool version, normalized command echo,
// seed, content digests of every input file, and the named result
// sections. Numbers are serialized at full precision; rounding is the
// consumer's job.
struct ReportDocument {
    std::string tool_version;
    std::string command;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, sha256)
    Json results;

    bool operator==(const ReportDocument& other) const = default;
};

Json to_json(const ReportDocument& doc);
ReportDocument report_from_json(const Json& j);

// json: the document itself. csv: the results.metrics table as
// `metric,estimate,lower,upper` rows; anything else is unsupported.
std::string emit_report(const ReportDocument& doc, ReportFormat format);
ReportFormat parse_format(std::string_view name);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

} // namespace panelval
