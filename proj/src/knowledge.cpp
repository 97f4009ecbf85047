#include "segforge/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "segforge/error.hpp"

namespace segforge {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

// "2 O", "2O" or "O".
ElementCount parse_element_field(std::string_view field, std::string_view record) {
  field = trim(field);
  std::size_t digits = 0;
  while (digits < field.size() && std::isdigit(static_cast<unsigned char>(field[digits]))) ++digits;
  int count = 1;
  if (digits > 0) {
    count = std::stoi(std::string(field.substr(0, digits)));
  }
  const std::string_view symbol = trim(field.substr(digits));
  const bool well_formed = symbol.size() >= 1 && symbol.size() <= 2 &&
                           std::isupper(static_cast<unsigned char>(symbol[0])) &&
                           (symbol.size() == 1 || std::islower(static_cast<unsigned char>(symbol[1])));
  if (!well_formed || count < 1) {
    throw MalformedRecord("bad element field '" + std::string(field) + "' in record '" +
                          std::string(record) + "'");
  }
  return ElementCount{std::string(symbol), count};
}

}  // namespace

PeriodicTable::PeriodicTable(const std::vector<AtomRecord>& atoms) {
  for (const auto& a : atoms) {
    if (a.atomic_number < 1) {
      throw MalformedRecord("atomic number must be >= 1 for " + a.symbol);
    }
    if (!by_symbol_.emplace(a.symbol, a.atomic_number).second) {
      throw MalformedRecord("duplicate element symbol " + a.symbol);
    }
  }
}

PeriodicTable PeriodicTable::parse(std::istream& in) {
  std::vector<AtomRecord> atoms;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 2) throw MalformedRecord("periodic table line '" + line + "'");
    AtomRecord rec;
    rec.symbol = std::string(trim(fields[0]));
    try {
      rec.atomic_number = std::stoi(std::string(trim(fields[1])));
    } catch (const std::exception&) {
      throw MalformedRecord("periodic table line '" + line + "'");
    }
    atoms.push_back(std::move(rec));
  }
  return PeriodicTable(atoms);
}

PeriodicTable PeriodicTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open periodic table " + path);
  return parse(in);
}

bool PeriodicTable::contains(std::string_view symbol) const {
  return by_symbol_.find(symbol) != by_symbol_.end();
}

int PeriodicTable::atomic_number(std::string_view symbol) const {
  const auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) throw UnknownElement("unknown element '" + std::string(symbol) + "'");
  return it->second;
}

CompoundSpec parse_compound(std::string_view record, const PeriodicTable& table) {
  const auto fields = split(trim(record), '|');
  if (fields.size() != 4) {
    throw MalformedRecord("expected 4 '|'-separated fields in '" + std::string(record) + "'");
  }
  CompoundSpec spec;
  spec.formula = std::string(trim(fields[0]));
  spec.name = std::string(trim(fields[1]));
  if (spec.formula.empty()) throw MalformedRecord("empty formula in '" + std::string(record) + "'");

  spec.element_1 = parse_element_field(fields[2], record);
  if (!trim(fields[3]).empty()) spec.element_2 = parse_element_field(fields[3], record);

  if (spec.element_2 && spec.element_2->symbol == spec.element_1.symbol) {
    throw MalformedRecord("element repeated in '" + std::string(record) + "'");
  }
  if (spec.total_atoms() < 2) {
    throw MalformedRecord("compound needs at least two atoms: '" + std::string(record) + "'");
  }
  table.atomic_number(spec.element_1.symbol);
  if (spec.element_2) table.atomic_number(spec.element_2->symbol);
  return spec;
}

std::vector<CompoundSpec> parse_compounds(std::istream& in, const PeriodicTable& table) {
  std::vector<CompoundSpec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    out.push_back(parse_compound(line, table));
  }
  return out;
}

std::vector<CompoundSpec> load_compounds(const std::string& path, const PeriodicTable& table) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open compound dataset " + path);
  return parse_compounds(in, table);
}

CompoundAnnotation annotate(const CompoundSpec& spec, const PeriodicTable& table) {
  CompoundAnnotation a;
  a.formula = spec.formula;
  a.atom_1_number = table.atomic_number(spec.element_1.symbol);
  a.total_character_symbol_1 = static_cast<int>(spec.element_1.symbol.size());
  a.total_types_of_atom = 1;
  a.total_atom = spec.element_1.count;
  if (spec.element_2) {
    a.atom_2_number = table.atomic_number(spec.element_2->symbol);
    a.total_character_symbol_2 = static_cast<int>(spec.element_2->symbol.size());
    a.total_types_of_atom = 2;
    a.total_atom += spec.element_2->count;
  }
  return a;
}

std::vector<CompoundAnnotation> order_compounds(std::vector<CompoundAnnotation> annotations) {
  std::set<std::string_view> seen;
  for (const auto& a : annotations) {
    if (!seen.insert(a.formula).second) throw DuplicateCompound("duplicate compound " + a.formula);
  }
  const auto key = [](const CompoundAnnotation& a) {
    return std::tie(a.total_types_of_atom, a.total_atom, a.atom_1_number, a.atom_2_number,
                    a.total_character_symbol_1, a.total_character_symbol_2, a.formula);
  };
  std::sort(annotations.begin(), annotations.end(),
            [&](const auto& l, const auto& r) { return key(l) < key(r); });
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    annotations[i].compound_id = static_cast<int>(i + 1);
  }
  return annotations;
}

std::string annotation_to_json(const CompoundAnnotation& a) {
  nlohmann::ordered_json j;
  j["compound_id"] = a.compound_id;
  j["formula"] = a.formula;
  j["atom_1_number"] = a.atom_1_number;
  j["atom_2_number"] = a.atom_2_number;
  j["total_types_of_atom"] = a.total_types_of_atom;
  j["total_atom"] = a.total_atom;
  j["total_character_symbol_1"] = a.total_character_symbol_1;
  j["total_character_symbol_2"] = a.total_character_symbol_2;
  return j.dump();
}

CompoundAnnotation annotation_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CompoundAnnotation a;
    a.compound_id = j.at("compound_id").get<int>();
    a.formula = j.at("formula").get<std::string>();
    a.atom_1_number = j.at("atom_1_number").get<int>();
    a.atom_2_number = j.at("atom_2_number").get<int>();
    a.total_types_of_atom = j.at("total_types_of_atom").get<int>();
    a.total_atom = j.at("total_atom").get<int>();
    a.total_character_symbol_1 = j.at("total_character_symbol_1").get<int>();
    a.total_character_symbol_2 = j.at("total_character_symbol_2").get<int>();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(std::string("bad annotation line: ") + e.what());
  }
}

}  // namespace segforge
