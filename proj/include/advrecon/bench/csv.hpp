#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "advrecon/bench/curve.hpp"

namespace advrecon::bench {

// Shortest round-trip text is not required; every double is printed with 17
// significant digits ("%.17g"), which reads back bit-exactly.
std::string format_double(double v);

/// Per-reconstruction records. Header:
///   scenario,method,noise_kind,rel_noise,signal_idx,draw_idx,rel_error,psnr,seed
/// LF line endings; text fields must not contain commas, quotes or newlines.
void write_records_csv(const std::filesystem::path& path, const std::vector<ErrorRecord>& records);
// Throws FormatError (byte offset of the bad line) on malformed input.
std::vector<ErrorRecord> read_records_csv(const std::filesystem::path& path);

/// Curve summaries. Header:
///   scenario,method,noise_kind,rel_noise,rel_error_mean,rel_error_std,n_signals,n_draws
void write_points_csv(const std::filesystem::path& path, const std::string& scenario,
                      const std::vector<CurvePoint>& points);

// Attack evidence. Header:
//   method,rel_noise,signal_idx,eta,perturbation_norm,achieved_error,baseline_error
void write_audits_csv(const std::filesystem::path& path, const std::vector<AttackAudit>& audits);

// Any other table: one header row, then rows of preformatted fields.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

// Plain text file (LF as given); parent directories are created.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace advrecon::bench
