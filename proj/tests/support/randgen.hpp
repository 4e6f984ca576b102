#pragma once

#include "gqa/kb.hpp"
#include "gqa/rng.hpp"
#include "gqa/semgraph.hpp"

namespace testgen {

struct KbSpec {
    size_t entities = 50;
    size_t relations = 8;
    size_t date_relations = 2;  // how many of `relations` carry dates
    size_t statements = 120;
    double qualifier_prob = 0.25;
};

gqa::KnowledgeBase random_kb(gqa::Rng& rng, const KbSpec& spec);

struct GraphSpec {
    size_t max_edges = 4;
    int max_intermediates = 2;
    double sort_prob = 0.25;
    double qualifier_prob = 0.2;
    // Probability of drawing relations/entities from an actual fact instead
    // of uniformly, so that a useful share of graphs is satisfiable.
    double guided_prob = 0.7;
};

// Always returns a well-formed graph with at least one edge.
gqa::SemanticGraph random_graph(gqa::Rng& rng, const gqa::KnowledgeBase& kb,
                                const GraphSpec& spec);

}  // namespace testgen
