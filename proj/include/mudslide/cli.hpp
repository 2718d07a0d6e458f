#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mudslide/codec.hpp"

namespace mudslide {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one verb: ingest, serve, report, export or delete. `args` excludes the
// program name. The data root comes from --data-root, then
// MUDSLIDE_DATA_ROOT, then ./mudslide-data.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Plain-text teacher report for a teacher summary payload
// (Service::teacher_summary).
std::string render_report(const Json& summary_payload);

}  // namespace mudslide
