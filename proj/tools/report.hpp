#pragma once

#include "jobspec.hpp"

#include <json.hpp>

namespace kkf::cli {

using ordered_json = nlohmann::ordered_json;

// Outcome of one job. The payload is deterministic: insertion-ordered keys,
// no timestamps, every integer rendered in decimal — the same JobSpec always
// serializes byte-identically.
struct Report {
    ordered_json payload;
    std::string summary;        // human-readable rendering for --summary
    bool inconclusive = false;  // some emitted verdict is Inconclusive/Unknown
    bool mismatch = false;      // catalog-run: a golden comparison failed
};

Report run_job(const JobSpec& spec);

// Golden catalog. Empty name runs every entry in declaration order.
Report run_catalog(const std::string& name, int window);

// Success-path exit mapping: golden mismatch wins over the strict gate.
int exit_code(const Report& rep, bool strict);

// Exit-code contract: 0 ok, 1 parse/semantic, 2 inconclusive under --strict,
// 3 golden mismatch or internal invariant violation, 4 I/O. This runs the
// job, emits the payload (file or stdout) and the summary, and returns the
// code; it is the whole CLI behind argument handling.
int execute(const JobSpec& spec, std::ostream& out_stream, std::ostream& err_stream);

}  // namespace kkf::cli
