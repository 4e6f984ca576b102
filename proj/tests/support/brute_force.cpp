#include "support/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace oracle {

using gqa::DateValue;
using gqa::EntityId;
using gqa::GraphEdge;
using gqa::Grounded;
using gqa::Intermediate;
using gqa::NodeRef;
using gqa::SemanticGraph;
using gqa::SortKind;
using gqa::SortNode;

FlatKb flatten(const gqa::KnowledgeBase& kb) {
    FlatKb flat;
    for (const auto& e : kb.entities()) flat.entities.push_back(e.id.value);
    for (const auto& st : kb.statements()) {
        Fact f;
        f.rel = st.relation.value;
        f.subj = st.subject.value;
        if (auto* d = std::get_if<DateValue>(&st.object)) {
            f.obj_is_date = true;
            f.obj_date = *d;
        } else {
            f.obj_entity = std::get<EntityId>(st.object).value;
        }
        for (const auto& q : st.qualifiers)
            if (auto* e = std::get_if<EntityId>(&q.value))
                f.entity_qualifiers.emplace_back(q.relation.value, e->value);
        flat.facts.push_back(std::move(f));
    }
    return flat;
}

double substitution_count(const FlatKb& kb, const SemanticGraph& g) {
    return std::pow(static_cast<double>(kb.entities.size()), 1 + g.intermediate_count());
}

namespace {

// Node under a substitution: q -> sub[0], intermediate i -> sub[1 + i].
const std::string* substituted(const NodeRef& n, const std::vector<const std::string*>& sub) {
    if (std::holds_alternative<gqa::QVar>(n)) return sub[0];
    if (auto* gr = std::get_if<Grounded>(&n)) return &gr->entity.value;
    if (auto* iv = std::get_if<Intermediate>(&n)) return sub[1 + iv->index];
    return nullptr;
}

// Highest substitution slot an edge reads, plus one: the edge can be checked
// once that many slots are assigned. Edges between grounded entities give 0.
size_t check_depth(const GraphEdge& e) {
    int max_slot = -1;
    auto slot = [&](const NodeRef& n) {
        if (std::holds_alternative<gqa::QVar>(n)) max_slot = std::max(max_slot, 0);
        if (auto* iv = std::get_if<Intermediate>(&n)) max_slot = std::max(max_slot, 1 + iv->index);
    };
    slot(e.source);
    slot(e.target);
    return static_cast<size_t>(max_slot + 1);
}

bool fact_matches(const Fact& f, const GraphEdge& e, const std::string& subj,
                  const std::string& obj) {
    if (f.obj_is_date) return false;
    if (f.rel != e.relation.value || f.subj != subj || f.obj_entity != obj) return false;
    if (!e.qualifier) return true;
    const std::string& qr = e.qualifier->relation.value;
    const std::string& qv = std::get<Grounded>(e.qualifier->value).entity.value;
    for (const auto& [r, v] : f.entity_qualifiers)
        if (r == qr && v == qv) return true;
    return false;
}

bool edge_satisfied(const FlatKb& kb, const GraphEdge& e, const std::string& subj,
                    const std::string& obj) {
    for (const Fact& f : kb.facts)
        if (fact_matches(f, e, subj, obj)) return true;
    return false;
}

// Entered with slots 0..depth-1 assigned. Checks every edge whose last
// needed slot was just filled (pruning the enumeration early), then assigns
// slot `depth` to each entity in turn.
bool exists_substitution(const FlatKb& kb, const std::vector<const GraphEdge*>& edges,
                         const std::vector<size_t>& depths,
                         std::vector<const std::string*>& sub, size_t depth) {
    for (size_t i = 0; i < edges.size(); ++i) {
        if (depths[i] != depth) continue;
        const std::string* s = substituted(edges[i]->source, sub);
        const std::string* t = substituted(edges[i]->target, sub);
        if (!edge_satisfied(kb, *edges[i], *s, *t)) return false;
    }
    if (depth == sub.size()) return true;
    for (const std::string& cand : kb.entities) {
        sub[depth] = &cand;
        if (exists_substitution(kb, edges, depths, sub, depth + 1)) {
            sub[depth] = nullptr;
            return true;
        }
        sub[depth] = nullptr;
    }
    return false;
}

}  // namespace

std::set<EntityId> evaluate(const FlatKb& kb, const SemanticGraph& g) {
    std::set<EntityId> result;
    if (g.edges.empty()) return result;

    std::vector<const GraphEdge*> match_edges;
    std::vector<const GraphEdge*> sort_edges;
    for (const auto& e : g.edges)
        (std::holds_alternative<SortNode>(e.target) ? sort_edges : match_edges).push_back(&e);

    std::vector<size_t> depths;
    bool grounded_ok = true;
    for (const GraphEdge* e : match_edges) {
        depths.push_back(check_depth(*e));
        if (depths.back() == 0) {
            const std::string& s = std::get<Grounded>(e->source).entity.value;
            const std::string& t = std::get<Grounded>(e->target).entity.value;
            grounded_ok = grounded_ok && edge_satisfied(kb, *e, s, t);
        }
    }

    const size_t slots = 1 + static_cast<size_t>(g.intermediate_count());
    if (grounded_ok) {
        for (const std::string& q : kb.entities) {
            std::vector<const std::string*> sub(slots, nullptr);
            sub[0] = &q;
            if (exists_substitution(kb, match_edges, depths, sub, 1)) result.insert(EntityId{q});
        }
    }

    for (const GraphEdge* se : sort_edges) {
        const bool want_max = std::get<SortNode>(se->target).kind == SortKind::ArgMax;
        std::vector<std::pair<EntityId, DateValue>> valued;
        for (const EntityId& c : result) {
            std::optional<DateValue> best;
            for (const Fact& f : kb.facts) {
                if (!f.obj_is_date || f.rel != se->relation.value || f.subj != c.value) continue;
                if (!best || (want_max ? (*best < f.obj_date) : (f.obj_date < *best)))
                    best = f.obj_date;
            }
            if (best) valued.emplace_back(c, *best);
        }
        result.clear();
        if (valued.empty()) continue;
        DateValue extreme = valued.front().second;
        for (const auto& [c, v] : valued)
            if (want_max ? (extreme < v) : (v < extreme)) extreme = v;
        for (const auto& [c, v] : valued)
            if (v == extreme) result.insert(c);
    }
    return result;
}

}  // namespace oracle
