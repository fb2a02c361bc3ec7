#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowcorr/trace.hpp"

namespace flowcorr {

/// "timestamps v1": one decimal timestamp per line, ascending; '#' starts a
/// comment line, blank lines are skipped.
/// Throws ParseError(line) or MonotonicityError(line).
FlowTrace read_trace(const std::filesystem::path& path);
FlowTrace parse_trace(const std::string& text);

/// Canonical form: one timestamp per line, 9 fractional digits.
std::string format_trace(const FlowTrace& trace);
void write_trace(const std::filesystem::path& path, const FlowTrace& trace);

/// "delays v1": header `period=<seconds>`, then one delay per line.
DelayTrace read_delays(const std::filesystem::path& path);
DelayTrace parse_delays(const std::string& text);
std::string format_delays(const DelayTrace& delays);

/// Plain list of numbers, one per line (comments allowed).
std::vector<double> read_values(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace flowcorr
