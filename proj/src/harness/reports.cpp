#include "hoidist/harness/reports.hpp"

#include <cstdio>

#include "hoidist/errors.hpp"

namespace harness {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::trunc | std::ios::binary), columns_(columns) {
    if (!out_)
        throw hoidist::ConfigError("cannot open report for writing: " + path);
    emit(columns_);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
        throw hoidist::ContractViolation("csv row width mismatch");
    emit(cells);
}

void CsvWriter::emit(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        const std::string& c = cells[i];
        const bool needs_quotes =
            c.find_first_of(",\"\r\n") != std::string::npos;
        if (i)
            out_ << ',';
        if (needs_quotes) {
            out_ << '"';
            for (char ch : c) {
                if (ch == '"')
                    out_ << '"';
                out_ << ch;
            }
            out_ << '"';
        } else {
            out_ << c;
        }
    }
    out_ << "\r\n";
    out_.flush();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(int64_t v) {
    return std::to_string(v);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw hoidist::ConfigError("cannot open csv: " + path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> cur;
    std::string cell;
    bool quoted = false;
    char ch;
    auto end_cell = [&]() {
        cur.push_back(cell);
        cell.clear();
    };
    auto end_row = [&]() {
        end_cell();
        rows.push_back(cur);
        cur.clear();
    };
    while (in.get(ch)) {
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    cell.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            end_cell();
        } else if (ch == '\r') {
            // swallow; \n ends the row
        } else if (ch == '\n') {
            end_row();
        } else {
            cell.push_back(ch);
        }
    }
    if (!cell.empty() || !cur.empty())
        end_row();
    return rows;
}

}  // namespace harness
