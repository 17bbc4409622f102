#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kevo::kvdoc {

// Line-oriented key/value documents, the on-disk format for record metadata,
// benchmark files, generation logs and the run configuration.
//
//   key: value                 single-line value
//   key: |                     literal block; lines indented two spaces,
//     first line                 newlines preserved
//     second line
//   key: >                     folded block (accepted on parse only);
//     folded across              lines joined with single spaces
//     several lines
//
// Keys are [A-Za-z0-9_.-]+ and may repeat; entry order is preserved. Full-line
// '#' comments and blank lines outside blocks are ignored. render() emits the
// canonical form: render(parse(render(doc))) == render(doc).

struct Entry {
    std::string key;
    std::string value;
};

struct Doc {
    std::vector<Entry> entries;

    std::optional<std::string> get(std::string_view key) const;
    std::string get_or(std::string_view key, std::string fallback) const;
    std::vector<std::string> get_all(std::string_view key) const;
    bool has(std::string_view key) const;
    void add(std::string_view key, std::string_view value);
};

Doc parse(std::string_view text);
std::string render(const Doc& doc);

// Canonical single-entry encoding, appended to `out`.
void append_entry(std::string& out, std::string_view key, std::string_view value);

// Trailing-whitespace-free form of a (possibly multi-line) value; this is what
// parse() yields back after a render() round trip.
std::string canonical_value(std::string_view value);

// Strips one layer of matching double quotes, if present.
std::string unquote(std::string_view s);

} // namespace kevo::kvdoc
