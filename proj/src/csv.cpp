#include "chiralprop/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace chiralprop {

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()), out_(path, std::ios::binary)
{
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values)
{
    if (values.size() != columns_) throw std::logic_error("CsvWriter: wrong number of columns in " + path_);
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
}

void CsvWriter::close()
{
    out_.close();
    if (out_.fail()) throw std::runtime_error("failed writing " + path_);
}

}  // namespace chiralprop
