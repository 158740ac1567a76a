#include "grouping.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

#include "patentsurv/errors.hpp"

namespace patentsurv::detail {

std::vector<GroupedDurations> split_groups(const Dataset& d, const std::string& group_by) {
    if (d.empty()) throw EstimationError("cannot estimate survival on an empty dataset");
    ValidationReport report = validate(d);
    if (!report.ok())
        throw EstimationError("dataset invalid: row " + std::to_string(report.issues[0].row) +
                              ": " + report.issues[0].message);

    std::vector<GroupedDurations> groups;
    if (group_by.empty()) {
        groups.push_back({"all", {}});
        for (const PatentRecord& r : d.records)
            groups[0].obs.emplace_back(r.survival_years, r.event);
        return groups;
    }

    std::string key = group_by;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (key == "dsir" || key == "ow") {
        groups.push_back({key + "=0", {}});
        groups.push_back({key + "=1", {}});
        for (const PatentRecord& r : d.records) {
            int v = (key == "dsir") ? r.dsir : r.ow;
            groups[v].obs.emplace_back(r.survival_years, r.event);
        }
    } else if (key == "tech") {
        const TechField fields[] = {TechField::Chemistry, TechField::Electrical,
                                    TechField::Mechanical, TechField::Instruments,
                                    TechField::OtherField};
        for (TechField f : fields)
            groups.push_back({"tech=" + std::string(tech_to_string(f)), {}});
        for (const PatentRecord& r : d.records)
            for (std::size_t g = 0; g < std::size(fields); ++g)
                if (r.tech == fields[g])
                    groups[g].obs.emplace_back(r.survival_years, r.event);
    } else {
        throw ConfigError("grouping covariate must be dsir, ow or tech; got '" + group_by + "'");
    }

    for (const GroupedDurations& g : groups)
        if (g.obs.empty()) throw EstimationError("group '" + g.label + "' has no records");
    return groups;
}

}  // namespace patentsurv::detail
