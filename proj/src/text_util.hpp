#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kevo {

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);

// Splits into lines without terminators; strips a trailing '\r' per line.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split_ws(std::string_view s);

std::string to_lower(std::string_view s);

// Lowercase, [a-z0-9-], runs of other characters collapse to single '-'.
std::string slugify(std::string_view s);

struct FencedBlock {
    std::string info;    // text after the opening ``` (language tag etc.)
    std::string content; // inner lines joined with '\n', no trailing newline
};

// All ``` fenced blocks in order of appearance. An unclosed final fence
// extends to the end of the text (LLM truncation happens).
std::vector<FencedBlock> fenced_blocks(std::string_view text);

// Word-wraps to roughly `width` columns, prefixing every line with `indent`.
std::string wrap_indent(std::string_view text, std::size_t width, std::string_view indent);

std::string now_iso8601_utc();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
void ensure_dir(const std::filesystem::path& dir);

std::string format_double(double v, int decimals);

} // namespace kevo
