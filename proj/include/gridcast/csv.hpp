#pragma once

#include <string>
#include <vector>

namespace gridcast {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file. No quoting support; values in this project
// never contain commas. "\r\n" line endings are accepted. Rows shorter than
// the header are padded with empty cells (trailing commas may be omitted);
// rows longer than the header throw DataError.
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace gridcast
