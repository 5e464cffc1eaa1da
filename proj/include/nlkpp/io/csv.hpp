#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nlkpp/core/error.hpp"

namespace nlkpp {

/// Comma-separated output with a header row. Doubles use 17 significant
/// digits so that files round-trip and repeated runs compare bytewise.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string, bool>;

  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(std::vector<Cell> cells) {
    if (cells.size() != header_.size()) throw Error("csv row has " + std::to_string(cells.size()) + " cells, header has " + std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
  }

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) os << ',';
        os << format(r[i]);
      }
      os << '\n';
    }
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    write(f);
  }

  std::size_t size() const { return rows_.size(); }

  static std::string format(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) {
      if (std::isnan(*d)) return "nan";
      if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
      std::ostringstream os;
      os.imbue(std::locale::classic());
      os.precision(17);
      os << *d;
      return os.str();
    }
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace nlkpp
