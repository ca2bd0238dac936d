#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace chiralprop {

/// Comma-separated output with a header row; every value printed with 9
/// significant digits in scientific notation.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void close();
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::size_t columns_;
    std::ofstream out_;
};

std::string format_number(double v);

}  // namespace chiralprop
