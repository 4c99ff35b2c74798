#include "panelval/report.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "panelval/common.hpp"

namespace panelval {

Json to_json(const ReportDocument& doc) {
    Json j;
    j["tool_version"] = doc.tool_version;
    j["command"] = doc.command;
    if (doc.seed.has_value()) {
        j["seed"] = *doc.seed;
    } else {
        j["seed"] = nullptr;
    }
    Json inputs = Json::object();
    for (const auto& [path, digest] : doc.inputs) {
        inputs[path] = Json{{"sha256", digest}};
    }
    j["inputs"] = inputs;
    j["results"] = doc.results;
    return j;
}

ReportDocument report_from_json(const Json& j) {
    ReportDocument doc;
    doc.tool_version = j.at("tool_version").get<std::string>();
    doc.command = j.at("command").get<std::string>();
    if (!j.at("seed").is_null()) doc.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [path, entry] : j.at("inputs").items()) {
        doc.inputs.emplace_back(path, entry.at("sha256").get<std::string>());
    }
    doc.results = j.at("results");
    return doc;
}

namespace {

// Shortest round-trip rendering, same as the JSON emitter's.
std::string csv_number(const Json& v) {
    if (v.is_null()) return "";
    return v.dump();
}

std::string metrics_csv(const Json& results) {
    if (!results.is_object() || !results.contains("metrics") ||
        !results.at("metrics").is_object()) {
        throw InputError("csv format is only supported for reports with a metrics table");
    }
    std::string out = "metric,estimate,lower,upper\n";
    for (const auto& [name, entry] : results.at("metrics").items()) {
        out += name;
        out += ',';
        out += csv_number(entry.contains("estimate") ? entry.at("estimate") : Json{});
        out += ',';
        out += csv_number(entry.contains("lower") ? entry.at("lower") : Json{});
        out += ',';
        out += csv_number(entry.contains("upper") ? entry.at("upper") : Json{});
        out += '\n';
    }
    return out;
}

} // namespace

std::string emit_report(const ReportDocument& doc, ReportFormat format) {
    switch (format) {
        case ReportFormat::json:
            return to_json(doc).dump(2) + "\n";
        case ReportFormat::csv:
            return metrics_csv(doc.results);
    }
    throw InputError("unsupported report format");
}

ReportFormat parse_format(std::string_view name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw InputError("unsupported report format: \"" + std::string(name) + "\"");
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("sha256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0F]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

} // namespace panelval
