#include "patentsurv/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "patentsurv/errors.hpp"

namespace patentsurv {

namespace {

const char* kTechNames[] = {"chemistry", "electrical", "mechanical", "instruments", "other"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

int parse_int_cell(const std::string& cell, std::size_t row, const std::string& column) {
    int value = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw SchemaError("row " + std::to_string(row) + ", column '" + column +
                          "': cannot parse '" + cell + "' as an integer");
    return value;
}

}  // namespace

std::string_view tech_to_string(TechField t) {
    return kTechNames[static_cast<int>(t)];
}

std::optional<TechField> tech_from_string(std::string_view s) {
    std::string l = lower(s);
    for (int i = 0; i < 5; ++i)
        if (l == kTechNames[i]) return static_cast<TechField>(i);
    return std::nullopt;
}

ValidationReport validate(const Dataset& d) {
    ValidationReport report;
    auto flag = [&](std::size_t row, std::string msg) {
        report.issues.push_back({row, std::move(msg)});
    };
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const PatentRecord& r = d.records[i];
        std::size_t row = i + 1;
        if (r.survival_years < 1 || r.survival_years > kStatutoryTermYears)
            flag(row, "survival_years must be in [1," + std::to_string(kStatutoryTermYears) +
                          "], got " + std::to_string(r.survival_years));
        if (r.event != 0 && r.event != 1) flag(row, "event must be 0 or 1");
        if (r.dsir != 0 && r.dsir != 1) flag(row, "dsir must be 0 or 1");
        if (r.ow != 0 && r.ow != 1) flag(row, "ow must be 0 or 1");
        if (r.ts < 1) flag(row, "ts must be >= 1");
        if (r.nc < 0) flag(row, "nc must be >= 0");
        if (r.ni < 0) flag(row, "ni must be >= 0");
        if (r.fs < 0) flag(row, "fs must be >= 0");
        if (r.id.empty()) flag(row, "id must be non-empty");
        auto [it, inserted] = seen.emplace(r.id, row);
        if (!inserted)
            flag(row, "duplicate id '" + r.id + "' (first seen at row " +
                          std::to_string(it->second) + ")");
    }
    return report;
}

Dataset load_dataset(std::istream& in, std::string provenance) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty input: missing CSV header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> expected = split_csv_line(std::string(kCsvHeader));
    std::vector<std::string> got = split_csv_line(line);
    for (const std::string& col : expected) {
        if (std::find(got.begin(), got.end(), col) == got.end())
            throw SchemaError("missing column '" + col + "' in CSV header");
    }
    if (got != expected)
        throw SchemaError("CSV header must be exactly '" + std::string(kCsvHeader) + "'");

    Dataset d;
    d.provenance = std::move(provenance);
    std::unordered_set<std::string> ids;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != expected.size())
            throw SchemaError("row " + std::to_string(row) + ": expected " +
                              std::to_string(expected.size()) + " fields, got " +
                              std::to_string(cells.size()));
        PatentRecord r;
        r.id = cells[0];
        r.filing_year = parse_int_cell(cells[1], row, "filing_year");
        r.survival_years = parse_int_cell(cells[2], row, "survival_years");
        r.event = parse_int_cell(cells[3], row, "event");
        r.nc = parse_int_cell(cells[4], row, "nc");
        r.ni = parse_int_cell(cells[5], row, "ni");
        r.fs = parse_int_cell(cells[6], row, "fs");
        r.ts = parse_int_cell(cells[7], row, "ts");
        r.dsir = parse_int_cell(cells[8], row, "dsir");
        r.ow = parse_int_cell(cells[9], row, "ow");
        auto tech = tech_from_string(cells[10]);
        if (!tech)
            throw SchemaError("row " + std::to_string(row) + ", column 'tech': unknown value '" +
                              cells[10] + "'");
        r.tech = *tech;
        r.firm_id = cells[11];

        if (r.survival_years < 1 || r.survival_years > kStatutoryTermYears)
            throw SchemaError("row " + std::to_string(row) +
                              ": survival_years must be in [1," +
                              std::to_string(kStatutoryTermYears) + "], got " + cells[2]);
        if (!ids.insert(r.id).second)
            throw SchemaError("row " + std::to_string(row) + ": duplicate id '" + r.id + "'");
        d.records.push_back(std::move(r));
    }
    return d;
}

Dataset load_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return load_dataset(in, path.string());
}

void save_dataset(const Dataset& d, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const PatentRecord& r : d.records) {
        out << r.id << ',' << r.filing_year << ',' << r.survival_years << ',' << r.event << ','
            << r.nc << ',' << r.ni << ',' << r.fs << ',' << r.ts << ',' << r.dsir << ',' << r.ow
            << ',' << tech_to_string(r.tech) << ',' << r.firm_id << '\n';
    }
}

void save_dataset_file(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    save_dataset(d, out);
}

std::optional<std::string> canonical_covariate_label(std::string_view label) {
    static const std::unordered_map<std::string, std::string> table = {
        {"dsir", "DSIR"},           {"nc", "NC"},
        {"ni", "NI"},               {"fs", "FS"},
        {"ts", "TS"},               {"ow", "OW"},
        {"electrical", "Electrical"},
        {"instrument", "Instrument"},
        {"instruments", "Instrument"},
        {"chemistry", "Chemistry"},
        {"mechanical", "Mechanical"},
        {"otherfield", "OtherField"},
        {"other_field", "OtherField"},
        {"other", "OtherField"},
    };
    auto it = table.find(lower(label));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

std::optional<double> covariate_value(const PatentRecord& rec, std::string_view label) {
    if (label == "DSIR") return rec.dsir;
    if (label == "NC") return rec.nc;
    if (label == "NI") return rec.ni;
    if (label == "FS") return rec.fs;
    if (label == "TS") return rec.ts;
    if (label == "OW") return rec.ow;
    if (label == "Electrical") return rec.tech == TechField::Electrical ? 1.0 : 0.0;
    if (label == "Instrument") return rec.tech == TechField::Instruments ? 1.0 : 0.0;
    if (label == "Chemistry") return rec.tech == TechField::Chemistry ? 1.0 : 0.0;
    if (label == "Mechanical") return rec.tech == TechField::Mechanical ? 1.0 : 0.0;
    if (label == "OtherField") return rec.tech == TechField::OtherField ? 1.0 : 0.0;
    return std::nullopt;
}

}  // namespace patentsurv
