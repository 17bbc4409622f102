#include "designer_stage.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

bool is_bullet(std::string_view line) {
    std::string_view t = trim(line);
    return t.size() >= 2 && (t[0] == '*' || t[0] == '-') && t[1] == ' ';
}

std::string bullet_text(std::string_view line) {
    std::string_view t = trim(line);
    return std::string(trim(t.substr(1)));
}

bool parse_range(std::string_view text, double& lo, double& hi) {
    std::string_view t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') return false;
    t = t.substr(1, t.size() - 2);
    auto comma = t.find(',');
    if (comma == std::string_view::npos) return false;
    try {
        lo = std::stod(std::string(trim(t.substr(0, comma))));
        hi = std::stod(std::string(trim(t.substr(comma + 1))));
    } catch (...) {
        return false;
    }
    return true;
}

// `- key:` or `key:` with optional indentation; returns the key and the rest.
bool item_line(std::string_view line, bool& starts_item, std::string& key, std::string& rest) {
    std::string_view t = trim(line);
    starts_item = false;
    if (t.size() >= 2 && t[0] == '-' && t[1] == ' ') {
        starts_item = true;
        t = trim(t.substr(1));
    }
    std::size_t i = 0;
    while (i < t.size() &&
           (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_')) ++i;
    if (i == 0 || i >= t.size() || t[i] != ':') return false;
    key = std::string(t.substr(0, i));
    rest = std::string(trim(t.substr(i + 1)));
    return true;
}

struct RawPlan {
    std::optional<std::string> description;
    std::optional<std::string> rubric;
    std::optional<std::string> performance;
    std::optional<std::string> innovation;
};

} // namespace

std::string build_designer_prompt(const KernelRecord& base,
                                  const std::vector<KnowledgeDoc>& knowledge) {
    if (trim(base.source).empty())
        fail(ErrorKind::precondition, "base record " + base.id + " has no source text");
    std::ostringstream out;
    out << "You are the experiment designer in an autonomous GPU kernel optimization loop.\n"
        << "Study the current Base kernel and the external notes, then propose what to try\n"
        << "next.\n\n";
    out << "### External notes\n";
    if (knowledge.empty()) {
        out << "No external notes are available.\n";
    } else {
        for (const auto& doc : knowledge) {
            out << "#### " << doc.title << "\n" << doc.body << "\n\n";
        }
    }
    out << "\n### Base code (id " << base.id << ")\n```\n" << base.source;
    if (base.source.empty() || base.source.back() != '\n') out << '\n';
    out << "```\n\n";
    out << "## Task 1: Optimization Avenues\n"
        << "List exactly 10 distinct optimization avenues worth considering, one '*' bullet\n"
        << "each, of the form `* **<short title>:** <one-line summary>`.\n\n";
    out << "## Task 2: Experiments\n"
        << "Then produce exactly 5 experiment plans as a yaml list in a fenced code block:\n"
        << "\n"
        << "```yaml\n"
        << "experiment:\n"
        << "  - description: >\n"
        << "      \"<what the experiment changes and why>\"\n"
        << "    rubric: >\n"
        << "      \"<concrete multi-step directives the kernel writer must implement>\"\n"
        << "    performance: [<lo>, <hi>]\n"
        << "    innovation: <0-100>\n"
        << "  - ...\n"
        << "```\n"
        << "\n"
        << "`performance` is the estimated percent improvement range (lo <= hi);\n"
        << "`innovation` scores how novel the experiment is, from 0 to 100.\n";
    return out.str();
}

Parsed<DesignOutput> parse_design(const std::string& text) {
    auto lines = split_lines(text);

    // locate the experiment list
    std::size_t experiment_line = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view t = trim(lines[i]);
        if (t == "experiment:") {
            experiment_line = i;
            break;
        }
    }
    if (experiment_line == lines.size())
        return Parsed<DesignOutput>::failure("no `experiment:` plan list found");

    // avenues live before the plan list (and before its fence / Task 2 header)
    std::size_t avenue_end = experiment_line;
    for (std::size_t i = 0; i < experiment_line; ++i) {
        std::string_view t = trim(lines[i]);
        if (t.substr(0, 3) == "```" && avenue_end == experiment_line) {
            // a fence with no closing fence before `experiment:` opens the
            // experiment block and terminates the avenue region
            bool encloses = true;
            for (std::size_t j = i + 1; j < experiment_line; ++j) {
                if (trim(lines[j]).substr(0, 3) == "```") encloses = false;
            }
            if (encloses) avenue_end = i;
        }
        if (to_lower(std::string(t)).substr(0, 10) == "## task 2:") avenue_end = std::min(avenue_end, i);
    }

    DesignOutput design;
    bool in_fence = false;
    for (std::size_t i = 0; i < avenue_end; ++i) {
        if (trim(lines[i]).substr(0, 3) == "```") {
            in_fence = !in_fence;
            continue;
        }
        if (!in_fence && is_bullet(lines[i])) design.avenues.push_back(bullet_text(lines[i]));
    }

    // plan items
    std::vector<RawPlan> raw;
    std::size_t i = experiment_line + 1;
    for (; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        std::string_view t = trim(line);
        if (t.empty()) continue;
        if (t.substr(0, 3) == "```") break;              // fence closed
        if (!line.empty() && line[0] != ' ' && line[0] != '-') break; // dedented prose
        bool starts_item = false;
        std::string key, rest;
        if (!item_line(line, starts_item, key, rest)) continue;
        if (starts_item) raw.emplace_back();
        if (raw.empty()) continue;
        RawPlan& plan = raw.back();

        std::string value = rest;
        if (rest.empty() || rest == ">" || rest == "|") {
            // block scalar: content is the run of lines indented deeper than
            // the key; the first content line fixes the block indent
            std::string assembled;
            std::size_t key_indent = line.find_first_not_of(' ');
            std::size_t content_indent = 0;
            while (i + 1 < lines.size()) {
                std::string_view next = lines[i + 1];
                if (trim(next).empty()) break;
                std::size_t ind = next.find_first_not_of(' ');
                if (ind == std::string_view::npos) break;
                if (content_indent == 0) {
                    if (ind <= key_indent) break;
                    content_indent = ind;
                } else if (ind < content_indent) {
                    break;
                }
                if (!assembled.empty()) assembled.push_back(' ');
                assembled.append(trim(next));
                ++i;
            }
            value = assembled;
        }
        if (key == "description") plan.description = kvdoc::unquote(value);
        else if (key == "rubric") plan.rubric = kvdoc::unquote(value);
        else if (key == "performance") plan.performance = value;
        else if (key == "innovation") plan.innovation = value;
        // unknown keys are tolerated
    }

    if (raw.size() != kPlanCount)
        return Parsed<DesignOutput>::failure("expected exactly 5 experiment plans, found " +
                                             std::to_string(raw.size()));
    if (design.avenues.size() != kAvenueCount)
        return Parsed<DesignOutput>::failure("expected exactly 10 avenue bullets, found " +
                                             std::to_string(design.avenues.size()));

    for (std::size_t p = 0; p < raw.size(); ++p) {
        const RawPlan& rp = raw[p];
        const std::string where = "plan " + std::to_string(p + 1);
        if (!rp.description || trim(*rp.description).empty())
            return Parsed<DesignOutput>::failure(where + " is missing its description");
        if (!rp.rubric || trim(*rp.rubric).empty())
            return Parsed<DesignOutput>::failure(where + " is missing its rubric");
        if (!rp.performance)
            return Parsed<DesignOutput>::failure(where + " is missing its performance range");
        if (!rp.innovation)
            return Parsed<DesignOutput>::failure(where + " is missing its innovation score");
        ExperimentPlan plan;
        plan.description = *rp.description;
        plan.rubric = *rp.rubric;
        if (!parse_range(*rp.performance, plan.performance_lo, plan.performance_hi))
            return Parsed<DesignOutput>::failure(where + " has a malformed performance range (expected [lo, hi])");
        if (plan.performance_lo > plan.performance_hi)
            return Parsed<DesignOutput>::failure(where + " has performance lo > hi");
        try {
            plan.innovation = std::stod(*rp.innovation);
        } catch (...) {
            return Parsed<DesignOutput>::failure(where + " has a non-numeric innovation score");
        }
        if (plan.innovation < 0.0 || plan.innovation > 100.0)
            return Parsed<DesignOutput>::failure(where + " has innovation outside [0, 100]");
        plan.ordinal = static_cast<int>(p) + 1;
        design.plans.push_back(std::move(plan));
    }
    return Parsed<DesignOutput>::success(std::move(design));
}

std::string render_design(const DesignOutput& design) {
    std::ostringstream out;
    out << "## Task 1: Optimization Avenues\n\n";
    for (const auto& avenue : design.avenues) out << "* " << avenue << "\n";
    out << "\n## Task 2: Experiments\n\n```yaml\nexperiment:\n";
    for (const auto& plan : design.plans) {
        out << "  - description: >\n"
            << wrap_indent("\"" + plan.description + "\"", 90, "      ") << "    rubric: >\n"
            << wrap_indent("\"" + plan.rubric + "\"", 90, "      ") << "    performance: ["
            << format_double(plan.performance_lo, 0) << ", " << format_double(plan.performance_hi, 0)
            << "]\n"
            << "    innovation: " << format_double(plan.innovation, 0) << "\n";
    }
    out << "```\n";
    return out.str();
}

std::vector<ExperimentPlan> pick_experiments(const std::vector<ExperimentPlan>& plans) {
    if (plans.size() != kPlanCount)
        fail(ErrorKind::wrong_count,
             "pick_experiments needs exactly 5 plans, got " + std::to_string(plans.size()));

    std::vector<std::size_t> remaining(plans.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

    auto take_argmax = [&](auto criterion) {
        std::size_t best = remaining.front();
        for (std::size_t idx : remaining) {
            if (criterion(plans[idx]) > criterion(plans[best])) best = idx;
            // equal keeps the earlier ordinal: remaining is in ordinal order
        }
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
        return plans[best];
    };

    std::vector<ExperimentPlan> picks;
    picks.push_back(take_argmax([](const ExperimentPlan& p) { return p.innovation; }));
    picks.push_back(take_argmax([](const ExperimentPlan& p) { return p.performance_hi; }));
    picks.push_back(take_argmax([](const ExperimentPlan& p) { return p.performance_lo; }));
    return picks;
}

DesignResult design_experiments(const KernelRecord& base,
                                const std::vector<KnowledgeDoc>& knowledge, Gateway& gateway,
                                const std::filesystem::path& artifact_path,
                                const CallSink* sink) {
    std::string prompt = build_designer_prompt(base, knowledge);
    DesignOutput all =
        gateway.complete_structured<DesignOutput>("designer", prompt, parse_design, sink);
    if (!artifact_path.empty()) {
        ensure_dir(artifact_path.parent_path());
        write_file(artifact_path, render_design(all));
    }
    DesignResult result;
    result.chosen = pick_experiments(all.plans);
    result.all = std::move(all);
    return result;
}

} // namespace kevo
