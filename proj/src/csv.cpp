#include "panelval/csv.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "panelval/common.hpp"

namespace panelval {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    std::size_t line = 1;
    bool done() const { return pos >= text.size(); }
};

// Parses one record starting at the cursor; advances past the record's
// trailing newline. Returns false at end of input.
bool next_record(Cursor& cur, std::vector<std::string>& fields, const std::string& origin) {
    fields.clear();
    if (cur.done()) return false;
    std::string field;
    bool quoted = false;
    const std::size_t record_line = cur.line;
    for (;;) {
        if (cur.done()) {
            if (quoted) {
                throw InputError(origin + ":" + std::to_string(record_line) +
                                 ": unterminated quoted field");
            }
            fields.push_back(std::move(field));
            return true;
        }
        const char c = cur.text[cur.pos];
        if (quoted) {
            if (c == '"') {
                if (cur.pos + 1 < cur.text.size() && cur.text[cur.pos + 1] == '"') {
                    field.push_back('"');
                    cur.pos += 2;
                } else {
                    quoted = false;
                    ++cur.pos;
                }
            } else {
                if (c == '\n') ++cur.line;
                field.push_back(c);
                ++cur.pos;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                ++cur.pos;
                break;
            case ',':
                fields.push_back(std::move(field));
                field.clear();
                ++cur.pos;
                break;
            case '\r':
                ++cur.pos;
                break;
            case '\n':
                ++cur.pos;
                ++cur.line;
                fields.push_back(std::move(field));
                return true;
            default:
                field.push_back(c);
                ++cur.pos;
                break;
        }
    }
}

CsvDocument parse_document(const std::string& text, const std::string& origin) {
    CsvDocument doc;
    Cursor cur{text};
    if (text.rfind("\xEF\xBB\xBF", 0) == 0) cur.pos = 3;  // UTF-8 BOM
    std::vector<std::string> fields;
    if (!next_record(cur, fields, origin)) {
        throw InputError(origin + ": empty file");
    }
    doc.header = fields;
    while (true) {
        const std::size_t line = cur.line;
        if (!next_record(cur, fields, origin)) break;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != doc.header.size()) {
            throw InputError(origin + ":" + std::to_string(line) + ": expected " +
                             std::to_string(doc.header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        doc.rows.push_back(fields);
        doc.line_numbers.push_back(line);
    }
    return doc;
}

void require_header(const CsvDocument& doc, const std::vector<std::string>& expected,
                    const std::string& origin) {
    bool ok = doc.header.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
        ok = normalize_label(doc.header[i]) == expected[i];
    }
    if (!ok) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        throw InputError(origin + ":1: header must be \"" + want + "\"");
    }
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void spill(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << content;
    if (!out) throw InputError("write failed: " + path.string());
}

double parse_probability(const std::string& raw, const std::string& where) {
    double value = 0.0;
    const char* begin = raw.data();
    const char* end = raw.data() + raw.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw InputError(where + ": malformed probability \"" + raw + "\"");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw InputError(where + ": probability outside [0,1]: " + raw);
    }
    return value;
}

double parse_age(const std::string& raw, const std::string& where) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc() || ptr != raw.data() + raw.size()) {
        throw InputError(where + ": malformed age \"" + raw + "\"");
    }
    if (value < 0.0) throw InputError(where + ": negative age");
    return value;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

CsvDocument read_csv(const std::filesystem::path& path) {
    return parse_document(slurp(path), path.string());
}

CsvDocument read_csv_string(const std::string& text, const std::string& origin) {
    return parse_document(text, origin);
}

std::string csv_escape(std::string_view field) {
    const bool needs_quote = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

namespace {

AnnotationTable annotations_from_doc(const CsvDocument& doc, const LabelScheme& scheme,
                                     const std::string& origin) {
    require_header(doc, {"visit_id", "rater_id", "label"}, origin);
    AnnotationTableBuilder builder(scheme);
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = origin + ":" + std::to_string(doc.line_numbers[r]);
        const std::string visit = trimmed(row[0]);
        const std::string rater = trimmed(row[1]);
        if (visit.empty() || rater.empty()) {
            throw InputError(where + ": empty visit_id or rater_id");
        }
        const LabelCode code = scheme.find(row[2]);
        if (code == kMissingLabel) {
            throw InputError(where + ": label not in scheme: \"" + row[2] + "\"");
        }
        try {
            builder.add_vote(visit, rater, code);
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return std::move(builder).build();
}

} // namespace

AnnotationTable parse_annotations(const std::filesystem::path& path, const LabelScheme& scheme) {
    return annotations_from_doc(read_csv(path), scheme, path.string());
}

AnnotationTable parse_annotations_string(const std::string& text, const LabelScheme& scheme) {
    return annotations_from_doc(read_csv_string(text), scheme, "<string>");
}

std::string serialize_annotations(const AnnotationTable& table) {
    std::string out = "visit_id,rater_id,label\n";
    for (std::size_t i = 0; i < table.n_visits(); ++i) {
        for (std::size_t j = 0; j < table.n_raters(); ++j) {
            const LabelCode c = table.vote(i, j);
            if (c == kMissingLabel) continue;
            out += csv_escape(table.visit_ids()[i]);
            out += ',';
            out += csv_escape(table.raters()[j]);
            out += ',';
            out += csv_escape(table.scheme().name(c));
            out += '\n';
        }
    }
    return out;
}

void write_annotations(const AnnotationTable& table, const std::filesystem::path& path) {
    spill(path, serialize_annotations(table));
}

namespace {

PredictionSet predictions_from_doc(const CsvDocument& doc, const LabelScheme& scheme,
                                   const std::string& origin) {
    require_header(doc, {"visit_id", "label", "probability"}, origin);
    PredictionSet out;
    out.reserve(doc.rows.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = origin + ":" + std::to_string(doc.line_numbers[r]);
        PredictionRecord rec;
        rec.visit_id = trimmed(row[0]);
        if (rec.visit_id.empty()) throw InputError(where + ": empty visit_id");
        if (!seen.insert(rec.visit_id).second) {
            throw InputError(where + ": duplicate visit_id \"" + rec.visit_id + "\"");
        }
        rec.label = scheme.find(row[1]);
        if (rec.label == kMissingLabel) {
            throw InputError(where + ": label not in scheme: \"" + row[1] + "\"");
        }
        const std::string prob = trimmed(row[2]);
        if (!prob.empty()) rec.probability = parse_probability(prob, where);
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace

PredictionSet parse_predictions(const std::filesystem::path& path, const LabelScheme& scheme) {
    return predictions_from_doc(read_csv(path), scheme, path.string());
}

PredictionSet parse_predictions_string(const std::string& text, const LabelScheme& scheme) {
    return predictions_from_doc(read_csv_string(text), scheme, "<string>");
}

std::string serialize_predictions(const PredictionSet& predictions, const LabelScheme& scheme) {
    std::string out = "visit_id,label,probability\n";
    for (const auto& rec : predictions) {
        out += csv_escape(rec.visit_id);
        out += ',';
        out += csv_escape(scheme.name(rec.label));
        out += ',';
        if (rec.probability.has_value()) out += nlohmann::json(*rec.probability).dump();
        out += '\n';
    }
    return out;
}

void write_predictions(const PredictionSet& predictions, const LabelScheme& scheme,
                       const std::filesystem::path& path) {
    spill(path, serialize_predictions(predictions, scheme));
}

namespace {

std::vector<PetRecord> pets_from_doc(const CsvDocument& doc, const std::string& origin) {
    require_header(doc, {"visit_id", "species", "sex", "age_years"}, origin);
    std::vector<PetRecord> out;
    out.reserve(doc.rows.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = origin + ":" + std::to_string(doc.line_numbers[r]);
        PetRecord rec;
        rec.visit_id = trimmed(row[0]);
        if (rec.visit_id.empty()) throw InputError(where + ": empty visit_id");
        if (!seen.insert(rec.visit_id).second) {
            throw InputError(where + ": duplicate visit_id \"" + rec.visit_id + "\"");
        }
        try {
            rec.species = parse_species(row[1]);
            rec.sex = parse_sex(row[2]);
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
        const std::string age = trimmed(row[3]);
        if (!age.empty()) rec.age_years = parse_age(age, where);
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace

std::vector<PetRecord> parse_pets(const std::filesystem::path& path) {
    return pets_from_doc(read_csv(path), path.string());
}

std::vector<PetRecord> parse_pets_string(const std::string& text) {
    return pets_from_doc(read_csv_string(text), "<string>");
}

std::string serialize_reference(const ReferenceLabeling& reference) {
    const LabelScheme& scheme = reference.scheme();
    std::string out = "visit_id,reference_label,unanimous";
    for (const auto& cls : scheme.classes()) {
        out += ",votes_" + normalize_label(cls);
    }
    out += '\n';
    for (std::size_t i = 0; i < reference.n_visits(); ++i) {
        const auto& v = reference.visits()[i];
        out += csv_escape(reference.visit_ids()[i]);
        out += ',';
        if (v.label.has_value()) out += csv_escape(scheme.name(*v.label));
        out += ',';
        out += v.unanimous ? "true" : "false";
        for (const std::size_t count : v.vote_counts) {
            out += ',' + std::to_string(count);
        }
        out += '\n';
    }
    return out;
}

void write_reference(const ReferenceLabeling& reference, const std::filesystem::path& path) {
    spill(path, serialize_reference(reference));
}

namespace {

ReferenceLabeling reference_from_doc(const CsvDocument& doc, const LabelScheme& scheme,
                                     const std::string& origin) {
    std::vector<std::string> expected = {"visit_id", "reference_label", "unanimous"};
    for (const auto& cls : scheme.classes()) expected.push_back("votes_" + normalize_label(cls));
    require_header(doc, expected, origin);
    std::vector<std::string> visit_ids;
    std::vector<VisitReference> visits;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        const std::string where = origin + ":" + std::to_string(doc.line_numbers[r]);
        visit_ids.push_back(trimmed(row[0]));
        VisitReference v;
        const std::string label = trimmed(row[1]);
        if (!label.empty()) {
            const LabelCode code = scheme.find(label);
            if (code == kMissingLabel) {
                throw InputError(where + ": label not in scheme: \"" + label + "\"");
            }
            v.label = code;
        }
        const std::string unanimous = normalize_label(row[2]);
        if (unanimous == "true" || unanimous == "1") {
            v.unanimous = true;
        } else if (unanimous == "false" || unanimous == "0") {
            v.unanimous = false;
        } else {
            throw InputError(where + ": malformed unanimous flag \"" + row[2] + "\"");
        }
        for (std::size_t c = 0; c < scheme.size(); ++c) {
            const std::string& raw = row[3 + c];
            std::size_t count = 0;
            const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), count);
            if (ec != std::errc() || ptr != raw.data() + raw.size()) {
                throw InputError(where + ": malformed vote count \"" + raw + "\"");
            }
            v.vote_counts.push_back(count);
        }
        visits.push_back(std::move(v));
    }
    return ReferenceLabeling(scheme, std::move(visit_ids), std::move(visits));
}

} // namespace

ReferenceLabeling parse_reference(const std::filesystem::path& path, const LabelScheme& scheme) {
    return reference_from_doc(read_csv(path), scheme, path.string());
}

ReferenceLabeling parse_reference_string(const std::string& text, const LabelScheme& scheme) {
    return reference_from_doc(read_csv_string(text), scheme, "<string>");
}

} // namespace panelval
