#include "advrecon/bench/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "advrecon/core/error.hpp"

namespace advrecon::bench {

namespace {

constexpr const char* kRecordHeader =
    "scenario,method,noise_kind,rel_noise,signal_idx,draw_idx,rel_error,psnr,seed";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void check_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") != std::string::npos)
    throw ConfigError("csv: field '" + s + "' contains a reserved character");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

template <class T>
bool parse_number(const std::string& s, T& v) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_records_csv(const std::filesystem::path& path, const std::vector<ErrorRecord>& records) {
  std::ofstream out = open_out(path);
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    check_field(r.scenario);
    check_field(r.method);
    out << r.scenario << ',' << r.method << ',' << noise_kind_name(r.kind) << ','
        << format_double(r.rel_noise) << ',' << r.signal_idx << ',' << r.draw_idx << ','
        << format_double(r.rel_error) << ',' << format_double(r.psnr) << ',' << r.seed << '\n';
  }
  close_out(out, path);
}

std::vector<ErrorRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line) || line != kRecordHeader)
    throw FormatError("records csv: unexpected header", 0);
  offset += line.size() + 1;
  std::vector<ErrorRecord> out;
  while (std::getline(in, line)) {
    const auto f = split(line);
    ErrorRecord r;
    bool ok = f.size() == 9;
    if (ok) {
      r.scenario = f[0];
      r.method = f[1];
      try {
        r.kind = parse_noise_kind(f[2]);
      } catch (const ConfigError&) {
        ok = false;
      }
      ok = ok && parse_number(f[3], r.rel_noise) && parse_number(f[4], r.signal_idx) &&
           parse_number(f[5], r.draw_idx) && parse_number(f[6], r.rel_error) &&
           parse_number(f[7], r.psnr) && parse_number(f[8], r.seed);
    }
    if (!ok) throw FormatError("records csv: malformed row", offset);
    out.push_back(std::move(r));
    offset += line.size() + 1;
  }
  return out;
}

void write_points_csv(const std::filesystem::path& path, const std::string& scenario,
                      const std::vector<CurvePoint>& points) {
  std::ofstream out = open_out(path);
  check_field(scenario);
  out << "scenario,method,noise_kind,rel_noise,rel_error_mean,rel_error_std,n_signals,n_draws\n";
  for (const auto& p : points) {
    check_field(p.method);
    out << scenario << ',' << p.method << ',' << noise_kind_name(p.kind) << ','
        << format_double(p.rel_noise) << ',' << format_double(p.rel_error_mean) << ','
        << format_double(p.rel_error_std) << ',' << p.n_signals << ',' << p.n_draws << '\n';
  }
  close_out(out, path);
}

void write_audits_csv(const std::filesystem::path& path, const std::vector<AttackAudit>& audits) {
  std::ofstream out = open_out(path);
  out << "method,rel_noise,signal_idx,eta,perturbation_norm,achieved_error,baseline_error\n";
  for (const auto& a : audits) {
    check_field(a.method);
    out << a.method << ',' << format_double(a.rel_noise) << ',' << a.signal_idx << ','
        << format_double(a.eta) << ',' << format_double(a.perturbation_norm) << ','
        << format_double(a.achieved_error) << ',' << format_double(a.baseline_error) << '\n';
  }
  close_out(out, path);
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_out(path);
  auto line = [&](const std::vector<std::string>& fields) {
    if (fields.size() != header.size())
      throw ContractViolation("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(header.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      check_field(fields[i]);
      out << (i ? "," : "") << fields[i];
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  close_out(out, path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  close_out(out, path);
}

}  // namespace advrecon::bench
