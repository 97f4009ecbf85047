#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace segforge {

struct AtomRecord {
  std::string symbol;
  int atomic_number = 0;
};

// Symbol -> atomic number lookup. Only the elements needed by the compound
// dataset have to be present.
class PeriodicTable {
 public:
  PeriodicTable() = default;
  explicit PeriodicTable(const std::vector<AtomRecord>& atoms);

  // Lines of `symbol,atomic_number`. Blank lines and `#` comments are skipped.
  static PeriodicTable parse(std::istream& in);
  static PeriodicTable load(const std::string& path);

  bool contains(std::string_view symbol) const;
  // Throws UnknownElement.
  int atomic_number(std::string_view symbol) const;
  std::size_t size() const { return by_symbol_.size(); }

 private:
  std::map<std::string, int, std::less<>> by_symbol_;
};

struct ElementCount {
  std::string symbol;
  int count = 1;

  bool operator==(const ElementCount&) const = default;
};

struct CompoundSpec {
  std::string formula;
  std::string name;
  ElementCount element_1;
  std::optional<ElementCount> element_2;

  int total_atoms() const { return element_1.count + (element_2 ? element_2->count : 0); }
  bool operator==(const CompoundSpec&) const = default;
};

// The six recall-complexity attributes of a compound. compound_id is 0 until
// order_compounds assigns the 1-based rank.
struct CompoundAnnotation {
  std::string formula;
  int atom_1_number = 0;
  int atom_2_number = 0;
  int total_types_of_atom = 0;
  int total_atom = 0;
  int total_character_symbol_1 = 0;
  int total_character_symbol_2 = 0;
  int compound_id = 0;

  bool operator==(const CompoundAnnotation&) const = default;
};

// Parses one `formula|name|count element_1|count element_2` record. The
// element fields also accept the concatenated form ("2O") and a bare symbol
// (count 1). Throws MalformedRecord or UnknownElement.
CompoundSpec parse_compound(std::string_view record, const PeriodicTable& table);

// Reads a whole dataset; blank lines and `#` comments are skipped.
std::vector<CompoundSpec> parse_compounds(std::istream& in, const PeriodicTable& table);
std::vector<CompoundSpec> load_compounds(const std::string& path, const PeriodicTable& table);

CompoundAnnotation annotate(const CompoundSpec& spec, const PeriodicTable& table);

// Sorts ascending on (total_types_of_atom, total_atom, atom_1_number,
// atom_2_number, total_character_symbol_1, total_character_symbol_2, formula)
// and assigns compound_id = rank. Throws DuplicateCompound.
std::vector<CompoundAnnotation> order_compounds(std::vector<CompoundAnnotation> annotations);

// One JSON object per line.
std::string annotation_to_json(const CompoundAnnotation& a);
CompoundAnnotation annotation_from_json(std::string_view line);

}  // namespace segforge
