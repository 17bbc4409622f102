#include "kvdoc.hpp"

#include <algorithm>
#include <cctype>

#include "text_util.hpp"

namespace kevo::kvdoc {

namespace {

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

std::size_t indent_of(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && line[i] == ' ') ++i;
    return i;
}

// Matches `key: rest`; returns false when the line is not an entry.
bool match_entry(std::string_view line, std::string_view& key, std::string_view& rest) {
    std::string_view t = line;
    std::size_t i = 0;
    while (i < t.size() && is_key_char(t[i])) ++i;
    if (i == 0) return false;
    std::size_t colon = i;
    while (colon < t.size() && t[colon] == ' ') ++colon;
    if (colon >= t.size() || t[colon] != ':') return false;
    key = t.substr(0, i);
    rest = t.substr(colon + 1);
    return true;
}

} // namespace

std::optional<std::string> Doc::get(std::string_view key) const {
    for (const auto& e : entries)
        if (e.key == key) return e.value;
    return std::nullopt;
}

std::string Doc::get_or(std::string_view key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

std::vector<std::string> Doc::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (e.key == key) out.push_back(e.value);
    return out;
}

bool Doc::has(std::string_view key) const {
    return get(key).has_value();
}

void Doc::add(std::string_view key, std::string_view value) {
    entries.push_back(Entry{std::string(key), std::string(value)});
}

Doc parse(std::string_view text) {
    Doc doc;
    auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        std::string_view line = lines[i];
        std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            ++i;
            continue;
        }
        std::string_view key, rest;
        if (!match_entry(line, key, rest) || indent_of(line) > 0) {
            ++i; // tolerated: prose or stray indentation between entries
            continue;
        }
        std::string_view inline_value = trim(rest);
        if (inline_value == "|" || inline_value == ">") {
            const bool literal = inline_value == "|";
            ++i;
            // the block is the run of blank or indented lines; the strip
            // width is the minimum indent across its content lines, so
            // interior indentation deeper than the first line survives
            std::vector<std::string_view> block;
            while (i < lines.size()) {
                std::string_view bl = lines[i];
                if (trim(bl).empty()) {
                    block.push_back(std::string_view{});
                    ++i;
                    continue;
                }
                if (indent_of(bl) == 0) break;
                block.push_back(bl);
                ++i;
            }
            while (!block.empty() && trim(block.back()).empty()) block.pop_back();
            std::size_t strip = std::string_view::npos;
            for (auto bl : block)
                if (!trim(bl).empty()) strip = std::min(strip, indent_of(bl));
            if (strip == std::string_view::npos) strip = 0;
            std::string value;
            for (std::size_t b = 0; b < block.size(); ++b) {
                std::string_view raw =
                    block[b].size() >= strip ? block[b].substr(strip) : std::string_view{};
                std::string_view piece = literal ? rtrim(raw) : trim(raw);
                if (b > 0) {
                    if (literal) value.push_back('\n');
                    else if (!value.empty() && !piece.empty()) value.push_back(' ');
                }
                value.append(piece);
            }
            doc.add(key, value);
        } else {
            doc.add(key, std::string(inline_value));
            ++i;
        }
    }
    return doc;
}

std::string canonical_value(std::string_view value) {
    auto lines = split_lines(value);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out.append(rtrim(lines[i]));
    }
    return out;
}

void append_entry(std::string& out, std::string_view key, std::string_view value) {
    std::string canon = canonical_value(value);
    const bool needs_block = canon.find('\n') != std::string::npos ||
                             (!canon.empty() && (canon.front() == ' ' || canon.front() == '>' ||
                                                 canon.front() == '|' || canon.front() == '#'));
    out.append(key);
    if (!needs_block) {
        if (canon.empty()) {
            out.append(":\n");
        } else {
            out.append(": ").append(canon).push_back('\n');
        }
        return;
    }
    out.append(": |\n");
    for (auto line : split_lines(canon)) {
        out.append("  ").append(line).push_back('\n');
    }
}

std::string render(const Doc& doc) {
    std::string out;
    for (const auto& e : doc.entries) append_entry(out, e.key, e.value);
    return out;
}

std::string unquote(std::string_view s) {
    std::string_view t = trim(s);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
        t = t.substr(1, t.size() - 2);
    }
    return std::string(t);
}

} // namespace kevo::kvdoc
