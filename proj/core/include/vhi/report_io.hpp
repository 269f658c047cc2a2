#pragma once

#include "vhi/audit.hpp"
#include "vhi/scenario_io.hpp"

#include <fstream>

namespace vhi {

/// CSV writer: '#' schema line, header row, '.' decimal, LF endings, %.17g
/// doubles. Deterministic output for deterministic input.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& schema,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  static std::string num(double x) { return fmt_g17(x); }

 private:
  std::ofstream out_;
  std::size_t width_;
};

Document audit_report_to_document(const AuditReport& rep);
void write_audit_report(const AuditReport& rep, const std::string& dir);

struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::string scenario_sha;  // fnv1a64 of the scenario bytes, hex
  std::uint64_t seed = 0;
  std::string mode;
  std::string out_dir;
  int halve_dt = 0;
  double tol_override = -1.0;
};

Document manifest_to_document(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& dir);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace vhi
