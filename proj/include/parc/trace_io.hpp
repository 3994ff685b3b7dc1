#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "parc/continuation.hpp"

namespace parc {

/// Header of the trace CSV format shared by every continuation run.
inline constexpr const char* kTraceCsvHeader =
    "step,s,lambda,loss,grad_norm,corrector_steps,penalty_residual,wall_ms";

/// One row per accepted point; doubles written with round-trip precision.
void write_trace_csv(std::ostream& out, const ContinuationTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ContinuationTrace& trace);

/// Reads the scalar columns back; theta is not stored, so points carry an
/// empty theta.
ContinuationTrace read_trace_csv(std::istream& in);

/// Writes `json_text` (config and seed) next to a trace CSV.
void write_sidecar(const std::filesystem::path& csv_path, const std::string& json_text);

}  // namespace parc
