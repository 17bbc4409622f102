#include <doctest.h>

#include "kvdoc.hpp"
#include "text_util.hpp"

using namespace kevo;

TEST_CASE("inline entries parse and preserve order") {
    auto doc = kvdoc::parse("alpha: 1\nbeta: two words\nalpha: 3\n");
    CHECK(doc.get("alpha") == "1");
    CHECK(doc.get("beta") == "two words");
    CHECK(doc.get_all("alpha") == std::vector<std::string>{"1", "3"});
    CHECK_FALSE(doc.has("gamma"));
}

TEST_CASE("comments and blank lines are skipped") {
    auto doc = kvdoc::parse("# a comment\n\nkey: value\n\n# more\n");
    CHECK(doc.entries.size() == 1);
    CHECK(doc.get("key") == "value");
}

TEST_CASE("literal blocks preserve newlines, folded blocks join with spaces") {
    std::string text =
        "lit: |\n  line one\n  line two\n"
        "fold: >\n  joined across\n  two lines\n";
    auto doc = kvdoc::parse(text);
    CHECK(doc.get("lit") == "line one\nline two");
    CHECK(doc.get("fold") == "joined across two lines");
}

TEST_CASE("literal blocks keep interior blank lines and deeper indentation") {
    std::string value = "first\n\n  indented\nlast";
    std::string rendered;
    kvdoc::append_entry(rendered, "body", value);
    auto doc = kvdoc::parse(rendered);
    CHECK(doc.get("body") == value);
}

TEST_CASE("a block whose first line is indented deeper than later lines survives") {
    // the shape build logs take: indented diagnostics, then a flush summary
    std::string value = "    at kernel.hip:42\n    at harness.c:7\nexit status 1";
    std::string rendered;
    kvdoc::append_entry(rendered, "note", value);
    auto doc = kvdoc::parse(rendered);
    CHECK(doc.get("note") == value);

    std::string leading_blank = "\nsecond line";
    rendered.clear();
    kvdoc::append_entry(rendered, "note", leading_blank);
    CHECK(kvdoc::parse(rendered).get("note") == leading_blank);
}

TEST_CASE("render(parse(render(doc))) is a fixed point") {
    kvdoc::Doc doc;
    doc.add("id", "00042");
    doc.add("note", "multi\nline\nvalue");
    doc.add("empty", "");
    doc.add("tricky", "> starts with marker");
    std::string once = kvdoc::render(doc);
    std::string twice = kvdoc::render(kvdoc::parse(once));
    CHECK(once == twice);
}

TEST_CASE("canonical_value trims trailing whitespace but keeps structure") {
    CHECK(kvdoc::canonical_value("a  \nb\t\n\n\n") == "a\nb");
    CHECK(kvdoc::canonical_value("plain") == "plain");
}

TEST_CASE("unquote strips exactly one layer of matching quotes") {
    CHECK(kvdoc::unquote("\"00052\"") == "00052");
    CHECK(kvdoc::unquote("  \"x\"  ") == "x");
    CHECK(kvdoc::unquote("\"\"x\"\"") == "\"x\"");
    CHECK(kvdoc::unquote("plain") == "plain");
    CHECK(kvdoc::unquote("\"unbalanced") == "\"unbalanced");
}

TEST_CASE("fenced block extraction") {
    std::string text =
        "prose\n```cpp\nint main() {}\n```\nmore\n```\nsecond block line\nlonger one\n```\n";
    auto blocks = fenced_blocks(text);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].info == "cpp");
    CHECK(blocks[0].content == "int main() {}");
    CHECK(blocks[1].content == "second block line\nlonger one");
}

TEST_CASE("unclosed fence extends to end of text") {
    auto blocks = fenced_blocks("```\ntruncated output");
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].content == "truncated output");
}

TEST_CASE("slugify") {
    CHECK(slugify("Hello, World!") == "hello-world");
    CHECK(slugify("  LDS & MFMA notes ") == "lds-mfma-notes");
    CHECK(slugify("___") == "doc");
}
