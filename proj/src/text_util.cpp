#include "text_util.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace kevo {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view rtrim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line;
        if (nl == std::string_view::npos) {
            if (pos == text.size()) break;
            line = text.substr(pos);
            pos = text.size() + 1;
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string slugify(std::string_view s) {
    std::string out;
    bool pending_dash = false;
    for (char raw : s) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            if (pending_dash && !out.empty()) out.push_back('-');
            pending_dash = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_dash = true;
        }
    }
    if (out.empty()) out = "doc";
    return out;
}

std::vector<FencedBlock> fenced_blocks(std::string_view text) {
    std::vector<FencedBlock> out;
    auto lines = split_lines(text);
    bool in_block = false;
    FencedBlock current;
    std::string body;
    for (auto line : lines) {
        std::string_view t = trim(line);
        if (!in_block) {
            if (t.substr(0, 3) == "```") {
                in_block = true;
                current = FencedBlock{};
                current.info = std::string(trim(t.substr(3)));
                body.clear();
            }
        } else {
            if (t.substr(0, 3) == "```" && trim(t.substr(3)).empty()) {
                in_block = false;
                current.content = body;
                out.push_back(current);
            } else {
                if (!body.empty()) body.push_back('\n');
                body.append(line);
            }
        }
    }
    if (in_block) {
        current.content = body;
        out.push_back(current);
    }
    return out;
}

std::string wrap_indent(std::string_view text, std::size_t width, std::string_view indent) {
    std::string out;
    std::string line(indent);
    bool line_has_word = false;
    for (auto word : split_ws(text)) {
        if (line_has_word && line.size() + 1 + word.size() > width) {
            out.append(line);
            out.push_back('\n');
            line.assign(indent);
            line_has_word = false;
        }
        if (line_has_word) line.push_back(' ');
        line.append(word);
        line_has_word = true;
    }
    if (line_has_word) {
        out.append(line);
        out.push_back('\n');
    }
    return out;
}

std::string now_iso8601_utc() {
    using namespace std::chrono;
    auto now = system_clock::now();
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::storage, "cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) fail(ErrorKind::storage, "read failed: " + path.string());
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::storage, "cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorKind::storage, "write failed: " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::storage, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string format_double(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

} // namespace kevo
