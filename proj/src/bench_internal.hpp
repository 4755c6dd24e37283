/**
 * @file bench_internal.hpp
 * @brief Per-benchmark runners shared between the bench translation units.
 */
#pragma once

#include "blayer/bench.hpp"

#include <string>

namespace blayer::detail {

void run_offset_validate(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out);
void run_patch_test(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out);
void run_bending_beam(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out);
void run_convergence_block(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out);
void run_hertz(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out);
void run_hertz_selective(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out);

/// Adds a criterion; passed when value <= threshold (or >= when `at_least`).
void add_criterion(BenchOutput& out, const std::string& id, const std::string& description, double value,
                   double threshold, bool at_least = false);

/// Throws SolverError with the report message when a solve failed.
void require_converged(const Solution& s, const std::string& what);

Material material_from(const Config& c, const std::string& E_key);

std::string data_path(const std::string& file);

}  // namespace blayer::detail
