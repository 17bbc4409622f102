#pragma once

#include "llm_gateway.hpp"

namespace kevo {

// Offline stand-in for a real model, usable from the CLI (backend: demo) and
// from end-to-end tests. Every response is a pure function of the request, so
// runs replay byte-identically:
//
//   selector  picks the best-scoring row of the population table as Base and
//             the runner-up as Reference;
//   designer  reads the Base listing, finds the highest OPT_<i> marker, and
//             proposes five plans introducing OPT_<i+1>..OPT_<i+5>, scored so
//             the pick rule chooses the first three;
//   writer    appends the marker named by the rubric to the Base source;
//   digester  condenses the raw document to its first lines.
//
// Paired with the mock evaluator (whose factor table assigns OPT_<i> tokens
// speedup factors < 1) this yields a loop that improves every generation.
class DemoBackend : public ChatBackend {
public:
    std::string complete(const ChatRequest& request) override;
};

} // namespace kevo
