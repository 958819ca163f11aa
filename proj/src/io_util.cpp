#include "sceneret/io_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

namespace sceneret::io {

namespace fs = std::filesystem;

std::vector<char> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool write_file_atomic(const fs::path& path, std::span<const char> data) {
    std::error_code size_ec;
    if (fs::is_regular_file(path) && fs::file_size(path, size_ec) == data.size() && !size_ec) {
        const std::vector<char> existing = read_file(path);
        if (std::equal(existing.begin(), existing.end(), data.begin())) return false;
    }
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error("cannot create directory " + path.parent_path().string());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw Error("write failed for " + path.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot replace " + path.string());
    }
    return true;
}

bool write_file_atomic(const fs::path& path, std::string_view text) {
    return write_file_atomic(path, std::span<const char>(text.data(), text.size()));
}

std::string fixed(double value, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, value);
    return buf;
}

}  // namespace sceneret::io
