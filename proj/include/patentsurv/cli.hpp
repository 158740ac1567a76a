#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace patentsurv {

// Exit codes: 0 success, 1 validation/estimation failure, 2 usage error.
struct CommandOutcome {
    int exit_code = 0;
    std::vector<std::string> artifacts;  // files actually written
    std::string summary;                 // one-line human-readable outcome
};

// Output routing. Machine-readable payloads (CSV/JSON) go to files, or to
// `out` when a path is "-"; prose goes to `out` unless quiet is set or a
// payload occupies stdout, in which case it moves to `err`. The two kinds
// never share a stream.
struct CliStreams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
    bool quiet = false;
};

CommandOutcome cmd_validate(const std::string& input, CliStreams& io);

CommandOutcome cmd_km(const std::string& input, const std::string& group_by, double level,
                      const std::string& out_path, CliStreams& io);

CommandOutcome cmd_logrank(const std::string& input, const std::string& group_by,
                           CliStreams& io);

CommandOutcome cmd_cox(const std::string& input, const std::vector<std::string>& covariates,
                       const std::vector<std::string>& interactions, const std::string& ties,
                       const std::string& json_path, CliStreams& io);

CommandOutcome cmd_suite(const std::string& input, const std::string& out_dir,
                         const std::string& stars, CliStreams& io);

CommandOutcome cmd_simulate(const std::string& config_path, const std::string& out_path,
                            const std::string& truth_path, std::optional<std::uint64_t> seed,
                            CliStreams& io);

}  // namespace patentsurv
