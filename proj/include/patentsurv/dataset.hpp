#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patentsurv {

// Technology category from the 4-digit IPC classification of the patent.
enum class TechField { Chemistry, Electrical, Mechanical, Instruments, OtherField };

std::string_view tech_to_string(TechField t);                       // lowercase CSV token
std::optional<TechField> tech_from_string(std::string_view s);      // nullopt if unknown

// One right-censored renewal duration observation.
//
// survival_years is the renewal duration in whole years since filing,
// capped by the 20-year statutory term. event = 1 means the patent
// expired (lapsed); event = 0 means the duration is right-censored
// (matured at the cap or still in force at data collection).
struct PatentRecord {
    std::string id;
    int filing_year = 0;
    int survival_years = 1;
    int event = 0;
    int nc = 0;    // number of claims
    int ni = 0;    // number of inventors
    int fs = 0;    // family size (jurisdiction count)
    int ts = 1;    // technology scope (distinct 4-digit IPC classes)
    int dsir = 0;  // 1 = firm holds the DSIR R&D tax-credit affiliation
    int ow = 0;    // 1 = foreign-subsidiary owned, 0 = domestic
    TechField tech = TechField::OtherField;
    std::string firm_id;

    friend bool operator==(const PatentRecord&, const PatentRecord&) = default;
};

constexpr int kStatutoryTermYears = 20;

struct Dataset {
    std::vector<PatentRecord> records;
    // Source path for loaded data, or a "simulated(...)" tag carrying the
    // generator name and seed for synthetic cohorts.
    std::string provenance;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

struct ValidationIssue {
    std::size_t row = 0;  // 1-based record index
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Checks every record-level invariant plus id uniqueness. Violations are
// report entries, never exceptions; an empty report means the dataset is
// valid. Never mutates.
ValidationReport validate(const Dataset& d);

// Exact CSV header required on the first line of every dataset file.
inline constexpr std::string_view kCsvHeader =
    "id,filing_year,survival_years,event,nc,ni,fs,ts,dsir,ow,tech,firm_id";

// Reads a dataset from UTF-8 CSV. Row order is preserved. Throws
// SchemaError for a bad header, an unparseable cell (with row and
// column), a survival_years value outside [1,20], or a duplicate id.
// Indicator fields only need to parse as integers here; out-of-range
// codes are left for validate() to report.
Dataset load_dataset(std::istream& in, std::string provenance);
Dataset load_dataset_file(const std::filesystem::path& path);

// Writes the CSV form; loading it back yields the identical records.
void save_dataset(const Dataset& d, std::ostream& out);
void save_dataset_file(const Dataset& d, const std::filesystem::path& path);

// Canonical covariate labels, as used for design-matrix columns:
//   DSIR NC NI FS TS OW Electrical Instrument Chemistry Mechanical OtherField
// Lookup is case-insensitive ("dsir", "instruments" and "other" are all
// accepted). Returns nullopt for unknown labels.
std::optional<std::string> canonical_covariate_label(std::string_view label);

// Numeric value of one canonical covariate label for a record; technology
// dummy labels resolve to 0/1 indicators. Interaction labels ("OW*DSIR")
// are not resolved here. Returns nullopt for unknown labels.
std::optional<double> covariate_value(const PatentRecord& rec, std::string_view canonical_label);

}  // namespace patentsurv
