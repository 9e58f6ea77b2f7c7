#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace sectorial::cli {

using nlohmann::json;

// Cells become 17-significant-digit decimals, integers, or raw text (quoted
// when they contain a comma or quote). A monostate is an empty field.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

class Table {
 public:
  Table(std::string name, std::vector<std::string> header);
  const std::string& name() const { return name_; }
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  void add(std::vector<Cell> row);
  void write_csv(std::ostream& out) const;

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CommandOutput {
  std::vector<Table> tables;         // first one is <subcommand>.csv, others <subcommand>_<name>.csv
  json summary = json::object();     // nested report, written to <subcommand>.json
  std::vector<Assertion> assertions;
  std::vector<std::string> extra_files;  // written by the command itself, relative to the output dir

  bool passed() const;
  Table& table(const std::string& name);
  void check(std::string name, bool ok, std::string detail);
};

}  // namespace sectorial::cli
