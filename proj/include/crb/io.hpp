#pragma once

// CSV and JSON output. Numbers are formatted with std::to_chars (shortest
// round-trip form, '.' decimal point, no locale), so files are byte-stable.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "crb/arm_solver.hpp"
#include "crb/dual_solver.hpp"
#include "crb/model.hpp"
#include "crb/simulator.hpp"

namespace crb {

using json = nlohmann::json;

std::string format_number(double x);
std::string format_number(long long x);

/// Comma-separated rows with a header. Fields are never quoted, so callers
/// only pass numbers and plain identifiers.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& field(double x);
    CsvWriter& field(int x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(long x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(long long x);
    CsvWriter& field(std::string_view s);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// Explicit instance format: nested arrays transition[g][s][a][s'] and
/// reward[g][s][a] per arm, the context chain and budgets, discount and the
/// initial condition.
json instance_to_json(const CrbInstance& instance);
/// Throws std::invalid_argument with a JSON-pointer locator on malformed input.
CrbInstance instance_from_json(const json& j, const std::string& where = "");
/// "uniform" or {"context": [...], "state": [[...]]}.
InitialDistribution initial_from_json(const json& j, int num_contexts, int num_states, const std::string& where);

/// Columns arm,g,s,a,value.
void write_q_tables_csv(const std::filesystem::path& path, std::span<const ArmSolution> solutions);
/// Columns arm,g,s,value (a left out).
void write_value_tables_csv(const std::filesystem::path& path, std::span<const ArmSolution> solutions);

/// Columns iteration, lambda_g..., slack_g..., step_g..., delta_norm, dual_objective.
void write_dual_history_csv(const std::filesystem::path& path, const DualSolveReport& report);

/// Columns t,g,arm,s,a,r, one row per arm and step. Needs a log recorded with steps.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryLog& log);

}  // namespace crb
