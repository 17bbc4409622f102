#include "knowledge_base.hpp"

#include <fstream>
#include <sstream>

#include "kvdoc.hpp"
#include "text_util.hpp"

namespace kevo {

namespace {

std::string_view origin_name(KnowledgeDoc::Origin origin) {
    return origin == KnowledgeDoc::Origin::digested ? "digested" : "manual";
}

} // namespace

KnowledgeBase::KnowledgeBase(std::filesystem::path dir) : dir_(std::move(dir)) {
    ensure_dir(dir_);
    load();
}

void KnowledgeBase::load() {
    std::filesystem::path index_path = dir_ / "index";
    if (!std::filesystem::exists(index_path)) return;
    std::string index_text = read_file(index_path);
    for (auto line : split_lines(index_text)) {
        std::string doc_id(trim(line));
        if (doc_id.empty()) continue;
        KnowledgeDoc doc;
        doc.doc_id = doc_id;
        doc.body = read_file(dir_ / doc_id);
        kvdoc::Doc meta = kvdoc::parse(read_file(dir_ / (doc_id + ".meta")));
        doc.title = meta.get_or("title", doc_id);
        doc.origin = meta.get_or("origin", "manual") == "digested" ? KnowledgeDoc::Origin::digested
                                                                   : KnowledgeDoc::Origin::manual;
        doc.source_note = meta.get_or("source_note", "");
        docs_.push_back(std::move(doc));
    }
}

std::string KnowledgeBase::unique_doc_id(const std::string& slug) const {
    auto taken = [&](const std::string& id) {
        for (const auto& d : docs_)
            if (d.doc_id == id) return true;
        return false;
    };
    if (!taken(slug)) return slug;
    for (int i = 2;; ++i) {
        std::string candidate = slug + "-" + std::to_string(i);
        if (!taken(candidate)) return candidate;
    }
}

KnowledgeDoc KnowledgeBase::store(KnowledgeDoc doc) {
    doc.body = kvdoc::canonical_value(doc.body);
    if (doc.body.empty()) fail(ErrorKind::precondition, "knowledge document body must be nonempty");

    write_file(dir_ / doc.doc_id, doc.body);
    std::string meta;
    kvdoc::append_entry(meta, "doc_id", doc.doc_id);
    kvdoc::append_entry(meta, "title", doc.title);
    kvdoc::append_entry(meta, "origin", origin_name(doc.origin));
    kvdoc::append_entry(meta, "source_note", doc.source_note);
    write_file(dir_ / (doc.doc_id + ".meta"), meta);

    std::ofstream index(dir_ / "index", std::ios::app | std::ios::binary);
    if (!index) fail(ErrorKind::storage, "cannot append to knowledge index");
    index << doc.doc_id << '\n';
    index.flush();
    if (!index) fail(ErrorKind::storage, "knowledge index append failed");

    docs_.push_back(doc);
    return docs_.back();
}

std::string build_digester_prompt(const std::string& raw, const std::string& task_description,
                                  const std::string& title_hint) {
    std::ostringstream out;
    out << "You are the research digester in an autonomous GPU kernel optimization loop.\n"
        << "Condense the raw document below into a findings note containing only guidance\n"
        << "relevant to the optimization task. Keep concrete numbers, code idioms and\n"
        << "hardware constraints; drop anything off-topic. Respond with the digested note\n"
        << "as plain text.\n\n"
        << "### Task description\n"
        << task_description << "\n\n"
        << "### Raw document (" << title_hint << ")\n"
        << raw << "\n";
    return out.str();
}

KnowledgeDoc KnowledgeBase::digest_document(const std::string& raw,
                                            const std::string& task_description,
                                            const std::string& title_hint, Gateway& gateway,
                                            const CallSink* sink) {
    if (trim(raw).empty()) fail(ErrorKind::precondition, "raw document must be nonempty");
    std::string digested =
        gateway.complete("digester", build_digester_prompt(raw, task_description, title_hint), sink);
    KnowledgeDoc doc;
    doc.doc_id = unique_doc_id(slugify(title_hint));
    doc.title = title_hint;
    doc.body = digested;
    doc.origin = KnowledgeDoc::Origin::digested;
    doc.source_note = "digested from raw document '" + title_hint + "'";
    return store(std::move(doc));
}

KnowledgeDoc KnowledgeBase::add_manual_doc(const std::string& title, const std::string& body,
                                           const std::string& source_note) {
    if (trim(body).empty()) fail(ErrorKind::precondition, "document body must be nonempty");
    std::string doc_id = slugify(title);
    for (const auto& d : docs_)
        if (d.doc_id == doc_id)
            fail(ErrorKind::duplicate_id, "knowledge doc id already exists: " + doc_id);
    KnowledgeDoc doc;
    doc.doc_id = doc_id;
    doc.title = title;
    doc.body = body;
    doc.origin = KnowledgeDoc::Origin::manual;
    doc.source_note = source_note.empty() ? "added manually" : source_note;
    return store(std::move(doc));
}

std::vector<KnowledgeDoc> KnowledgeBase::snapshot(std::size_t byte_budget) const {
    std::size_t total = 0;
    for (const auto& d : docs_) total += d.body.size();
    std::size_t first = 0;
    while (first < docs_.size() && total > byte_budget && docs_.size() - first > 1) {
        total -= docs_[first].body.size();
        ++first;
    }
    return {docs_.begin() + static_cast<std::ptrdiff_t>(first), docs_.end()};
}

} // namespace kevo
