// Plot-ready CSV emission and atomic file writes. CSV uses ',' delimiter,
// '.' decimal point, one header row, LF line endings; doubles print in
// shortest round-trip form so identical runs produce identical bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rwre::io {

std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::string to_string() const;
};

// Writes via temp file + rename in the target directory. Refuses to
// replace an existing file unless `force`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content, bool force);

std::string read_file(const std::filesystem::path& path);

}  // namespace rwre::io
