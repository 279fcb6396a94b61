#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace evoqtl::csv {

// Fixed %.10g rendering so repeated runs emit byte-identical files.
std::string format_double(double v);
std::string format_int(long long v);

std::vector<std::string> split_line(std::string_view line, char delim);

// Sniffs '\t' vs ',' from the first line.
char sniff_delimiter(const std::string& header_line);

class Writer {
public:
    Writer(const std::string& path, char delim = ',');
    void row(const std::vector<std::string>& fields);
    bool good() const { return out_.good(); }

private:
    std::ofstream out_;
    char delim_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const;  // -1 if absent
};

// Reads a delimiter-separated file with a header row. Throws on I/O failure.
Table read_table(const std::string& path);

}  // namespace evoqtl::csv
