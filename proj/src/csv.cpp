#include "vih/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vih::io {

namespace {

std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
        throw std::invalid_argument("CsvTable: row width does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
    std::ostringstream os;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (j) os << ',';
        os << escape(columns_[j]);
    }
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ',';
            if (const double* d = std::get_if<double>(&row[j]))
                os << format_double(*d);
            else
                os << escape(std::get<std::string>(row[j]));
        }
        os << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << to_string();
}

int ParsedCsv::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j] == name) return static_cast<int>(j);
    throw std::out_of_range("no such column: " + name);
}

double ParsedCsv::number(std::size_t row, int col) const {
    return std::stod(rows.at(row).at(static_cast<std::size_t>(col)));
}

ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv out;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (first) {
            out.columns = std::move(fields);
            first = false;
        } else {
            out.rows.push_back(std::move(fields));
        }
    }
    return out;
}

ParsedCsv read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_csv(os.str());
}

}  // namespace vih::io
