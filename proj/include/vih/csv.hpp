#pragma once

#include <string>
#include <variant>
#include <vector>

namespace vih::io {

/// Headered CSV with doubles rendered at 17 significant digits.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    using Cell = std::variant<double, std::string>;
    void add_row(std::vector<Cell> row);

    [[nodiscard]] std::string to_string() const;
    void write(const std::string& path) const;

    [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
    [[nodiscard]] const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

struct ParsedCsv {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] int column_index(const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, int col) const;
};

[[nodiscard]] ParsedCsv parse_csv(const std::string& text);
[[nodiscard]] ParsedCsv read_csv(const std::string& path);

[[nodiscard]] std::string format_double(double x);  ///< %.17g

}  // namespace vih::io
