#include "gqa/construct.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "gqa/error.hpp"
#include "gqa/text.hpp"

namespace gqa {

namespace {

std::vector<EntityId> without(const std::vector<EntityId>& free, const EntityId& e) {
    std::vector<EntityId> out;
    out.reserve(free.size());
    for (const auto& x : free)
        if (x != e) out.push_back(x);
    return out;
}

ConstructionState with_edges(const ConstructionState& s, std::vector<GraphEdge> added,
                             std::vector<EntityId> free) {
    ConstructionState next{s.graph, std::move(free)};
    for (auto& e : added) next.graph.edges.push_back(std::move(e));
    return next;
}

// (r1 between q and d, r2 between d and e), directions as instantiated in the
// KB with q standing in for the witness entity.
struct TwoStepPattern {
    RelationId r1;
    Direction d_dir1;  // role of the intermediate d under r1
    RelationId r2;
    Direction e_dir2;  // role of e under r2
    auto operator<=>(const TwoStepPattern&) const = default;
};

std::vector<TwoStepPattern> two_step_patterns(const KnowledgeBase& kb, const EntityId& e,
                                              size_t cap) {
    std::set<TwoStepPattern> pats;
    auto visit = [&](size_t idx, Direction e_dir) {
        const Statement& st = kb.statements()[idx];
        EntityId d;
        if (e_dir == Direction::Out) {
            auto* o = std::get_if<EntityId>(&st.object);
            if (!o) return;
            d = *o;
        } else {
            d = st.subject;
        }
        if (d == e) return;
        for (const RelationUse& use : kb.relations_of(d))
            pats.insert({use.relation, use.direction, st.relation, e_dir});
    };
    for (size_t idx : kb.by_subject(e)) visit(idx, Direction::Out);
    for (size_t idx : kb.by_object(e)) visit(idx, Direction::In);

    std::vector<TwoStepPattern> out(pats.begin(), pats.end());
    if (out.size() > cap) out.resize(cap);
    return out;
}

}  // namespace

ConstructionState initial_state(const LinkedQuestion& q) {
    ConstructionState s;
    for (const auto& e : q.entities)
        if (std::find(s.free.begin(), s.free.end(), e) == s.free.end()) s.free.push_back(e);
    return s;
}

std::vector<ConstructionState> add_entity_action(const ConstructionState& s,
                                                 const KnowledgeBase& kb,
                                                 const ConstructOptions& opts) {
    std::vector<ConstructionState> out;
    if (s.graph.size() + 1 > opts.max_edges) return out;
    for (const EntityId& e : s.free) {
        if (!kb.has_entity(e)) throw DanglingIdError(e.value, 0);
        auto rest = without(s.free, e);
        for (const RelationUse& use : kb.relations_of(e)) {
            GraphEdge edge;
            edge.relation = use.relation;
            if (use.direction == Direction::Out) {
                edge.source = Grounded{e};
                edge.target = QVar{};
            } else {
                edge.source = QVar{};
                edge.target = Grounded{e};
            }
            out.push_back(with_edges(s, {edge}, rest));
        }
        if (s.graph.size() + 2 > opts.max_edges) continue;
        const int inter = s.graph.intermediate_count();
        for (const TwoStepPattern& p : two_step_patterns(kb, e, opts.two_step_cap)) {
            GraphEdge qd;
            qd.relation = p.r1;
            if (p.d_dir1 == Direction::Out) {
                qd.source = Intermediate{inter};
                qd.target = QVar{};
            } else {
                qd.source = QVar{};
                qd.target = Intermediate{inter};
            }
            GraphEdge de;
            de.relation = p.r2;
            if (p.e_dir2 == Direction::Out) {
                de.source = Grounded{e};
                de.target = Intermediate{inter};
            } else {
                de.source = Intermediate{inter};
                de.target = Grounded{e};
            }
            out.push_back(with_edges(s, {qd, de}, rest));
        }
    }
    return out;
}

std::vector<ConstructionState> add_constraint_action(const ConstructionState& s,
                                                     const KnowledgeBase& kb,
                                                     const ConstructOptions&) {
    std::vector<ConstructionState> out;
    if (s.graph.empty() || s.free.empty()) return out;
    const GraphEdge& last = s.graph.edges.back();
    if (last.qualifier || is_sort(last.target)) return out;

    const auto& observed = kb.qualifier_relations();
    for (const EntityId& e2 : s.free) {
        if (!kb.has_entity(e2)) throw DanglingIdError(e2.value, 0);
        std::set<RelationId> rels;
        for (const RelationUse& use : kb.relations_of(e2))
            if (observed.count(use.relation)) rels.insert(use.relation);
        for (const RelationId& r2 : rels) {
            ConstructionState next{s.graph, without(s.free, e2)};
            next.graph.edges.back().qualifier = EdgeQualifier{r2, Grounded{e2}};
            out.push_back(std::move(next));
        }
    }
    return out;
}

std::vector<ConstructionState> add_sort_action(const ConstructionState& s,
                                               const KnowledgeBase& kb,
                                               const ConstructOptions& opts) {
    std::vector<ConstructionState> out;
    if (s.graph.empty() || s.graph.has_sort_edge()) return out;
    if (s.graph.size() + 1 > opts.max_edges) return out;
    for (const RelationId& r : kb.date_relations()) {
        for (SortKind kind : {SortKind::ArgMax, SortKind::ArgMin}) {
            GraphEdge edge;
            edge.relation = r;
            edge.source = QVar{};
            edge.target = SortNode{kind};
            out.push_back(with_edges(s, {edge}, s.free));
        }
    }
    return out;
}

std::vector<ConstructionState> expand(const ConstructionState& s, const KnowledgeBase& kb,
                                      const ConstructOptions& opts) {
    std::vector<ConstructionState> out;
    std::set<std::string> seen;
    auto take = [&](std::vector<ConstructionState>&& batch) {
        for (auto& st : batch) {
            if (st.graph.size() > opts.max_edges) continue;
            if (seen.insert(canonical_form(st.graph)).second) out.push_back(std::move(st));
        }
    };
    take(add_entity_action(s, kb, opts));
    take(add_constraint_action(s, kb, opts));
    take(add_sort_action(s, kb, opts));
    return out;
}

std::vector<ConstructionState> enumerate_states(const LinkedQuestion& q, const KnowledgeBase& kb,
                                                const ConstructOptions& opts, size_t max_states,
                                                bool* truncated) {
    if (truncated) *truncated = false;
    std::vector<ConstructionState> out;
    std::set<std::string> seen;
    std::deque<ConstructionState> queue;
    queue.push_back(initial_state(q));
    seen.insert(canonical_form(queue.front().graph));
    while (!queue.empty()) {
        ConstructionState cur = std::move(queue.front());
        queue.pop_front();
        for (auto& next : expand(cur, kb, opts)) {
            if (!seen.insert(canonical_form(next.graph)).second) continue;
            if (out.size() >= max_states) {
                if (truncated) *truncated = true;
                return out;
            }
            out.push_back(next);
            queue.push_back(std::move(next));
        }
    }
    std::sort(out.begin(), out.end(), [](const ConstructionState& a, const ConstructionState& b) {
        return canonical_form(a.graph) < canonical_form(b.graph);
    });
    return out;
}

std::vector<LinkedQuestion> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file '" + path + "'");
    std::vector<LinkedQuestion> out;
    std::string line;
    size_t lineno = 0;
    using nlohmann::json;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what(), lineno);
        }
        try {
            LinkedQuestion q;
            q.id = j.value("id", std::to_string(out.size()));
            q.utterance = j.at("utterance").get<std::string>();
            q.tokens = tokenize(q.utterance);
            if (q.tokens.empty()) throw ParseError("utterance has no tokens", lineno);
            for (const auto& e : j.at("entities")) q.entities.push_back({e.get<std::string>()});
            if (j.contains("answers")) {
                std::set<EntityId> golds;
                for (const auto& a : j.at("answers")) golds.insert({a.get<std::string>()});
                q.gold_answers = std::move(golds);
            }
            if (j.contains("relations")) q.relation_count = j.at("relations").get<int>();
            out.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad record in ") + path + ": " + e.what(), lineno);
        }
    }
    return out;
}

}  // namespace gqa
