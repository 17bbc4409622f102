#include "selector_stage.hpp"

#include <sstream>

#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

// Markdown decorations models wrap keys in: bold / list / blockquote marks.
std::string_view strip_decoration(std::string_view line) {
    std::string_view t = trim(line);
    while (!t.empty() && (t.front() == '*' || t.front() == '_' || t.front() == '`' ||
                          t.front() == '>' || t.front() == '-' || t.front() == '#')) {
        t.remove_prefix(1);
        t = trim(t);
    }
    return t;
}

// First `key:` entry in the text, handling inline values and ">"/"|" blocks.
std::optional<std::string> find_field(const std::vector<std::string_view>& lines,
                                      std::string_view key) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = strip_decoration(lines[i]);
        if (line.substr(0, key.size()) != key) continue;
        std::string_view rest = line.substr(key.size());
        rest = trim(rest);
        // tolerate a closing bold marker between the key and the colon
        while (!rest.empty() && (rest.front() == '*' || rest.front() == '_' || rest.front() == '`'))
            rest.remove_prefix(1);
        if (rest.empty() || rest.front() != ':') continue;
        rest = trim(rest.substr(1));
        // and the same marks around an inline value ("**rationale:** text")
        while (!rest.empty() && (rest.front() == '*' || rest.front() == '_' || rest.front() == '`'))
            rest.remove_prefix(1);
        while (!rest.empty() && (rest.back() == '*' || rest.back() == '_' || rest.back() == '`'))
            rest.remove_suffix(1);
        rest = trim(rest);
        if (rest != ">" && rest != "|" && !rest.empty()) {
            return kvdoc::unquote(rest);
        }
        // block scalar: gather following indented lines
        std::string value;
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            std::string_view bl = lines[j];
            if (trim(bl).empty()) break;
            if (!bl.empty() && bl.front() != ' ' && bl.front() != '\t') break;
            std::string_view piece = trim(bl);
            if (!value.empty()) value.push_back(' ');
            value.append(piece);
        }
        if (!value.empty()) return kvdoc::unquote(value);
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace

std::string build_selector_prompt(const PopulationSummary& summary) {
    if (summary.rows.empty())
        fail(ErrorKind::empty_population, "cannot build a selector prompt for an empty population");
    // the full population history goes into every prompt; on very long runs
    // this table is the dominant context-size pressure
    std::ostringstream out;
    out << "You are the evolutionary selector in an autonomous GPU kernel optimization loop.\n"
        << "\n"
        << "Below is every kernel variant produced so far, with its parent ids and mean\n"
        << "benchmark time in microseconds per input configuration (lower is better).\n"
        << "Rows marked '-' failed to build or validate and are not eligible.\n"
        << "\n"
        << "### Population summary\n"
        << render_summary_table(summary) << "\n"
        << "Choose one eligible variant as the Base for the next experiment (its source\n"
        << "will be modified) and one as the Reference (provided to the kernel writer for\n"
        << "contrast and analysis). Respond with a document of exactly this form:\n"
        << "\n"
        << "basis_code: \"<id>\"\n"
        << "basis_reference: \"<id>\"\n"
        << "rationale: >\n"
        << "  \"<two or three sentences explaining both choices>\"\n";
    return out.str();
}

Parsed<SelectionDecision> parse_selection(const std::string& text) {
    auto lines = split_lines(text);
    auto basis = find_field(lines, "basis_code");
    auto reference = find_field(lines, "basis_reference");
    auto rationale = find_field(lines, "rationale");

    std::vector<std::string> missing;
    if (!basis || trim(*basis).empty()) missing.push_back("basis_code");
    if (!reference || trim(*reference).empty()) missing.push_back("basis_reference");
    if (!rationale || trim(*rationale).empty()) missing.push_back("rationale");
    if (!missing.empty()) {
        std::string why = "the document is missing required field(s):";
        for (const auto& m : missing) why += " " + m;
        return Parsed<SelectionDecision>::failure(why);
    }
    return Parsed<SelectionDecision>::success(
        SelectionDecision{std::string(trim(*basis)), std::string(trim(*reference)), *rationale});
}

std::string render_selection(const SelectionDecision& decision) {
    std::string out;
    out += "basis_code: \"" + decision.basis_code + "\"\n";
    out += "basis_reference: \"" + decision.basis_reference + "\"\n";
    out += "rationale: >\n";
    out += wrap_indent("\"" + decision.rationale + "\"", 88, "  ");
    return out;
}

SelectionDecision select_parents(const PopulationStore& population, Gateway& gateway,
                                 const CallSink* sink) {
    PopulationSummary summary = population.summarize();
    std::vector<std::string> eligible;
    for (const auto& row : summary.rows)
        if (row.aggregate) eligible.push_back(row.id);
    if (eligible.empty())
        fail(ErrorKind::empty_population, "no eligible (successfully evaluated) records to select from");

    std::string prompt = build_selector_prompt(summary);

    auto validated = [&](const std::string& text) -> Parsed<SelectionDecision> {
        Parsed<SelectionDecision> parsed = parse_selection(text);
        if (!parsed.ok()) return parsed;
        const SelectionDecision& d = *parsed.value;
        for (const std::string& id : {d.basis_code, d.basis_reference}) {
            if (!population.contains(id))
                return Parsed<SelectionDecision>::failure("id " + id + " does not exist in the population");
            if (!population.record(id).scored())
                return Parsed<SelectionDecision>::failure(
                    "id " + id + " failed evaluation and is not eligible as Base or Reference");
        }
        if (d.basis_code == d.basis_reference && eligible.size() >= 2)
            return Parsed<SelectionDecision>::failure(
                "basis_code and basis_reference must name two different records");
        return parsed;
    };

    return gateway.complete_structured<SelectionDecision>("selector", prompt, validated, sink);
}

} // namespace kevo
