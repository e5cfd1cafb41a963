#include "rwre/csvio.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace rwre::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("csv row width mismatch");
    rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
    std::ostringstream os;
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) os << ',';
        os << columns[i];
    }
    os << '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << row[i];
        }
        os << '\n';
    }
    return os.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content, bool force) {
    namespace fs = std::filesystem;
    if (fs::exists(path) && !force)
        throw std::runtime_error("output exists (use --force to replace): " +
                                 path.string());
    fs::path dir = path.parent_path();
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    const fs::path tmp =
        dir / (path.filename().string() + ".tmp." +
               std::to_string(static_cast<unsigned>(::getpid())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.good())
            throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace rwre::io
