#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gqa/kb.hpp"
#include "gqa/semgraph.hpp"

namespace gqa {

// A question with linker-resolved entities. Graph construction starts from
// the entity list; gold answers are present in training/eval datasets.
struct LinkedQuestion {
    std::string id;
    std::string utterance;
    std::vector<std::string> tokens;
    std::vector<EntityId> entities;
    std::optional<std::set<EntityId>> gold_answers;
    // Number of relations in the reference parse, carried as a dataset
    // annotation; drives the complexity breakdown of the eval report.
    std::optional<int> relation_count;
};

// State of the staged construction: the graph built so far plus the question
// entities not yet consumed. States are immutable values.
struct ConstructionState {
    SemanticGraph graph;
    std::vector<EntityId> free;
};

struct ConstructOptions {
    size_t max_edges = 4;
    // Two-step paths are enumerated only along relation pairs instantiated in
    // the KB, capped per entity to bound the expansion fan-out.
    size_t two_step_cap = 100;
};

// Empty graph plus all question entities as free.
ConstructionState initial_state(const LinkedQuestion& q);

// Add-entity action a_e: for every free entity e and every relation use of e,
// one successor grounding e against the q-node; plus two-step successors
// r1(q,d) ∧ r2(d,e) through a fresh intermediate for every KB-instantiated
// relation pair, capped by opts.two_step_cap.
std::vector<ConstructionState> add_entity_action(const ConstructionState& s,
                                                 const KnowledgeBase& kb,
                                                 const ConstructOptions& opts = {});

// Add-constraint action a_c: attaches a qualifier (r2, e2) to the last added
// edge, for free entities e2 and relations r2 of e2 that the KB uses as
// qualifier relations. Empty when the graph is empty or the last edge is
// already qualified.
std::vector<ConstructionState> add_constraint_action(const ConstructionState& s,
                                                     const KnowledgeBase& kb,
                                                     const ConstructOptions& opts = {});

// Add-sort action a_m: argmax and argmin successors r(q, argmax|argmin) for
// every date-valued relation; at most one sort edge per graph.
std::vector<ConstructionState> add_sort_action(const ConstructionState& s,
                                               const KnowledgeBase& kb,
                                               const ConstructOptions& opts = {});

// Union of the three actions, deduplicated by canonical_form of the graph.
// (A graph determines its free set: free = initial entities minus grounded.)
std::vector<ConstructionState> expand(const ConstructionState& s, const KnowledgeBase& kb,
                                      const ConstructOptions& opts = {});

// Every state reachable from initial_state(q) with a nonempty graph,
// deduplicated by canonical form. `max_states` is a safety cap; *truncated is
// set when it fires.
std::vector<ConstructionState> enumerate_states(const LinkedQuestion& q, const KnowledgeBase& kb,
                                                const ConstructOptions& opts = {},
                                                size_t max_states = 200000,
                                                bool* truncated = nullptr);

// Dataset file: JSON Lines
//   {"utterance":str,"entities":[str],"answers":[str],
//    "relations":int?, "id":str?}
// Missing ids default to the 0-based line position.
std::vector<LinkedQuestion> load_dataset(const std::string& path);

}  // namespace gqa
