#include "gridcast/csv.hpp"

#include "gridcast/core.hpp"

#include <fstream>
#include <sstream>

namespace gridcast {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            table.header = split_line(line);
            continue;
        }
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() > table.header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": row has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
        cells.resize(table.header.size());
        table.rows.push_back(std::move(cells));
    }
    if (line_no == 0) throw DataError("'" + path + "' is empty");
    return table;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace gridcast
