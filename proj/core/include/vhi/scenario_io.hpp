#pragma once

#include "vhi/contact.hpp"

#include <map>
#include <string>

namespace vhi {

/// Ordered key/value document with bracketed sections; the exchange format of
/// scenario files, audit reports, manifests, and run summaries.
struct Document {
  struct Entry {
    std::string key, value;
    int line = 0;
  };
  struct Section {
    std::string name;  // "" = top level
    std::vector<Entry> entries;
    int line = 0;
  };
  std::vector<Section> sections;

  Section& section(const std::string& name);
  const Section* find(const std::string& name) const;
  void set(const std::string& section_name, const std::string& key, const std::string& value);
  void set_num(const std::string& section_name, const std::string& key, double v);
  std::string dump() const;
};

Document parse_document(const std::string& text);

/// Typed accessor that records which keys were read and rejects leftovers.
class DocReader {
 public:
  explicit DocReader(const Document& doc);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key);
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback);
  double get_double(const std::string& section, const std::string& key);
  double get_double(const std::string& section, const std::string& key, double fallback);
  int get_int(const std::string& section, const std::string& key, int fallback);
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback);
  std::vector<double> get_list(const std::string& section, const std::string& key);

  /// Throws ParseError naming the first unconsumed key.
  void finish() const;

 private:
  struct Cell {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells_;
  std::map<std::string, int> known_sections_;

  const Cell* cell(const std::string& section, const std::string& key) const;
  const Cell& require(const std::string& section, const std::string& key);
};

inline constexpr const char* kScenarioSchema = "vhisolve.scenario.v1";

ContactScenario parse_scenario(const std::string& text);
ContactScenario load_scenario(const std::string& path);
std::string scenario_to_text(const ContactScenario& scn);

}  // namespace vhi
