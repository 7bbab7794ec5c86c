#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ezlife/params.hpp"

namespace ezlife {

// Flat "key = value" files. '#' starts a comment, blank lines are skipped,
// keys are case-sensitive. Numeric values may carry a '%' suffix, which is
// divided out on ingestion so everything downstream sees natural units.
// Duplicate keys and unparsable values raise io_error with file:line context.
std::map<std::string, double> read_kv_config(const std::filesystem::path& file);

// Reads gamma, psi, delta, zeta, r, mu, sigma, beta, m0 and optionally the
// efficacy pair a, q (both or neither). Unknown keys are rejected so typos
// fail loudly instead of silently keeping a default.
model_params params_from_config(const std::filesystem::path& file);

// Writes a flat key-value report, one "key = value" line per entry, values
// already formatted by the caller. Used for CLI reports.
void write_kv_report(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, std::string>>& entries);

// 17-significant-digit formatting: the shortest form that round-trips a
// double exactly through text.
std::string format_full(double x);

} // namespace ezlife
