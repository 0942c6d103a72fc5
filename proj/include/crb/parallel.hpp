#pragma once

#include <string_view>

namespace crb {

/// Selects the OpenMP kernel or the serial reference kernel. Both produce
/// bit-identical results; the serial path is kept for tests and benchmarks.
enum class Exec { serial, parallel };

inline constexpr std::string_view to_string(Exec e) { return e == Exec::serial ? "serial" : "parallel"; }

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

}  // namespace crb
