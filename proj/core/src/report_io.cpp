#include "vhi/report_io.hpp"

#include <filesystem>
#include <sstream>

namespace vhi {

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), width_(columns.size()) {
  if (!out_) throw Error("io", "cannot open for writing: " + path);
  out_ << "# schema=" << schema << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error("io", "CsvWriter: wrong cell count");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << "\n";
}

Document audit_report_to_document(const AuditReport& rep) {
  Document d;
  d.set("", "schema", "vhisolve.audit.v1");
  d.set("", "all_pass", rep.all_pass() ? "true" : "false");
  d.set_num("", "h0_margin", rep.h0_margin);
  d.set_num("", "contact_margin_fraction", rep.contact_margin_fraction);
  for (const auto& e : rep.entries) {
    const std::string sec = "entry." + e.name;
    d.set(sec, "pass", e.pass ? "true" : "false");
    d.set_num(sec, "claimed", e.claimed);
    d.set_num(sec, "estimate", e.estimate);
    d.set_num(sec, "worst_slack", e.worst_slack);
    d.set(sec, "samples", std::to_string(e.samples));
    d.set(sec, "seed", std::to_string(e.seed));
    if (!e.note.empty()) d.set(sec, "note", e.note);
    if (!e.witness.empty()) {
      d.set_num(sec, "witness_t", e.witness_t);
      std::string w;
      for (const auto& v : e.witness) {
        w += "[";
        for (Eigen::Index i = 0; i < v.size(); ++i) w += (i ? " " : "") + fmt_g17(v[i]);
        w += "]";
      }
      d.set(sec, "witness", w);
    }
  }
  return d;
}

void write_audit_report(const AuditReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/audit_report.txt", audit_report_to_document(rep).dump());
  CsvWriter csv(dir + "/audit_report.csv", "vhisolve.audit.v1",
                {"name", "pass", "claimed", "estimate", "worst_slack", "samples", "seed"});
  for (const auto& e : rep.entries)
    csv.row({e.name, e.pass ? "1" : "0", CsvWriter::num(e.claimed), CsvWriter::num(e.estimate),
             CsvWriter::num(e.worst_slack), std::to_string(e.samples), std::to_string(e.seed)});
}

Document manifest_to_document(const RunManifest& m) {
  Document d;
  d.set("", "schema", "vhisolve.manifest.v1");
  d.set("", "command", m.command);
  d.set("", "scenario", m.scenario_path);
  d.set("", "scenario_sha", m.scenario_sha);
  d.set("", "seed", std::to_string(m.seed));
  d.set("", "mode", m.mode);
  d.set("", "out", m.out_dir);
  d.set("", "halve_dt", std::to_string(m.halve_dt));
  d.set_num("", "tol_override", m.tol_override);
  return d;
}

void write_manifest(const RunManifest& m, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/manifest.txt", manifest_to_document(m).dump());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open for writing: " + path);
  f << content;
}

}  // namespace vhi
