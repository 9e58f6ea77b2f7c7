#include "sectorial/cli/report.hpp"

#include <ostream>
#include <stdexcept>

#include "sectorial/util/format.hpp"

namespace sectorial::cli {

Table::Table(std::string name, std::vector<std::string> header) : name_(std::move(name)), header_(std::move(header)) {}

void Table::add(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw std::logic_error("table " + name_ + ": row has " + std::to_string(row.size()) + " cells, header has " +
                           std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

namespace {

void put_text(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void Table::write_csv(std::ostream& out) const {
  for (std::size_t k = 0; k < header_.size(); ++k) out << (k ? "," : "") << header_[k];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) out << util::format_double(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) out << v;
            else if constexpr (std::is_same_v<T, std::string>) put_text(out, v);
          },
          row[k]);
    }
    out << '\n';
  }
}

bool CommandOutput::passed() const {
  for (const auto& a : assertions)
    if (!a.passed) return false;
  return true;
}

Table& CommandOutput::table(const std::string& name) {
  for (auto& t : tables)
    if (t.name() == name) return t;
  throw std::logic_error("no table named " + name);
}

void CommandOutput::check(std::string name, bool ok, std::string detail) {
  assertions.push_back({std::move(name), ok, std::move(detail)});
}

}  // namespace sectorial::cli
