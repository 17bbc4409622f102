#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "llm_gateway.hpp"

namespace kevo {

struct KnowledgeDoc {
    enum class Origin { digested, manual };

    std::string doc_id; // slug, unique within the base
    std::string title;
    std::string body;
    Origin origin = Origin::manual;
    std::string source_note; // provenance, free text
};

// Findings/reference documents injected into designer and writer contexts.
// Raw references get digested by the LLM into task-relevant form before
// storage; curated documents enter as-is via add_manual_doc.
//
// Layout under dir(): `index` (one doc_id per line, insertion order),
// `<doc_id>` (body text) and `<doc_id>.meta` (kvdoc).
class KnowledgeBase {
public:
    explicit KnowledgeBase(std::filesystem::path dir);

    KnowledgeDoc digest_document(const std::string& raw, const std::string& task_description,
                                 const std::string& title_hint, Gateway& gateway,
                                 const CallSink* sink = nullptr);

    KnowledgeDoc add_manual_doc(const std::string& title, const std::string& body,
                                const std::string& source_note = {});

    std::vector<KnowledgeDoc> list_docs() const { return docs_; }
    std::size_t size() const { return docs_.size(); }

    // Insertion-order snapshot trimmed to the byte budget, oldest dropped
    // first. Generations snapshot once at their start, so mid-generation
    // additions only apply from the next generation on.
    std::vector<KnowledgeDoc> snapshot(std::size_t byte_budget) const;

private:
    std::string unique_doc_id(const std::string& slug) const;
    KnowledgeDoc store(KnowledgeDoc doc);
    void load();

    std::filesystem::path dir_;
    std::vector<KnowledgeDoc> docs_;
};

std::string build_digester_prompt(const std::string& raw, const std::string& task_description,
                                  const std::string& title_hint);

} // namespace kevo
