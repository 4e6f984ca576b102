#include "gqa/kb.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "gqa/error.hpp"

namespace gqa {

namespace {

const std::vector<size_t> kNoStatements;

std::string triple_key(const RelationId& r, const EntityId& s, const EntityId& o) {
    return r.value + '\x1f' + s.value + '\x1f' + o.value;
}

}  // namespace

const std::string& KnowledgeBase::entity_label(const EntityId& e) const {
    auto it = entity_index_.find(e);
    if (it == entity_index_.end()) throw DanglingIdError(e.value, 0);
    return entities_[it->second].label;
}

const std::string& KnowledgeBase::relation_label(const RelationId& r) const {
    auto it = relation_index_.find(r);
    if (it == relation_index_.end()) throw DanglingIdError(r.value, 0);
    return relations_[it->second].label;
}

bool KnowledgeBase::is_date_valued(const RelationId& r) const {
    auto it = relation_index_.find(r);
    if (it == relation_index_.end()) throw DanglingIdError(r.value, 0);
    return relations_[it->second].date_valued;
}

std::vector<RelationUse> KnowledgeBase::relations_of(const EntityId& e) const {
    if (!has_entity(e)) throw DanglingIdError(e.value, 0);
    std::set<RelationUse> uses;
    if (auto it = by_subject_.find(e); it != by_subject_.end())
        for (size_t idx : it->second) uses.insert({statements_[idx].relation, Direction::Out});
    if (auto it = by_object_.find(e); it != by_object_.end())
        for (size_t idx : it->second) uses.insert({statements_[idx].relation, Direction::In});
    return {uses.begin(), uses.end()};
}

std::set<RelationId> KnowledgeBase::date_relations() const {
    std::set<RelationId> out;
    for (const auto& r : relations_)
        if (r.date_valued) out.insert(r.id);
    return out;
}

const std::vector<size_t>& KnowledgeBase::by_subject(const EntityId& e) const {
    auto it = by_subject_.find(e);
    return it == by_subject_.end() ? kNoStatements : it->second;
}

const std::vector<size_t>& KnowledgeBase::by_object(const EntityId& e) const {
    auto it = by_object_.find(e);
    return it == by_object_.end() ? kNoStatements : it->second;
}

const std::vector<size_t>& KnowledgeBase::by_subject_relation(const EntityId& e,
                                                              const RelationId& r) const {
    auto it = by_subject_relation_.find({e.value, r.value});
    return it == by_subject_relation_.end() ? kNoStatements : it->second;
}

const std::vector<size_t>& KnowledgeBase::by_object_relation(const EntityId& e,
                                                             const RelationId& r) const {
    auto it = by_object_relation_.find({e.value, r.value});
    return it == by_object_relation_.end() ? kNoStatements : it->second;
}

bool KnowledgeBase::has_triple(const RelationId& r, const EntityId& subj,
                               const EntityId& obj) const {
    return triples_.count(triple_key(r, subj, obj)) > 0;
}

std::vector<DateValue> KnowledgeBase::dates_of(const EntityId& subj, const RelationId& r) const {
    std::vector<DateValue> out;
    for (size_t idx : by_subject_relation(subj, r))
        if (auto* d = std::get_if<DateValue>(&statements_[idx].object)) out.push_back(*d);
    return out;
}

void KnowledgeBase::add_entity(EntityId id, std::string label) {
    if (id.value.empty()) throw Error("entity with empty id");
    if (label.empty()) throw Error("entity '" + id.value + "' has an empty label");
    if (entity_index_.count(id)) throw Error("duplicate entity id '" + id.value + "'");
    entity_index_.emplace(id, entities_.size());
    entities_.push_back({std::move(id), std::move(label)});
}

void KnowledgeBase::add_relation(RelationId id, std::string label, bool date_valued) {
    if (id.value.empty()) throw Error("relation with empty id");
    if (label.empty()) throw Error("relation '" + id.value + "' has an empty label");
    if (relation_index_.count(id)) throw Error("duplicate relation id '" + id.value + "'");
    relation_index_.emplace(id, relations_.size());
    relations_.push_back({std::move(id), std::move(label), date_valued});
}

void KnowledgeBase::check_object(const RelationId& r, const ObjectValue& v, size_t line) const {
    bool dated = is_date_valued(r);
    if (dated && !is_date(v))
        throw ParseError("date-valued relation '" + r.value + "' used with an entity object", line);
    if (!dated && is_date(v))
        throw ParseError("relation '" + r.value + "' is not date-valued but has a date object",
                         line);
    if (auto* e = std::get_if<EntityId>(&v); e && !has_entity(*e))
        throw DanglingIdError(e->value, line);
}

void KnowledgeBase::add_statement(Statement s) { add_statement_at_line(std::move(s), 0); }

void KnowledgeBase::add_statement_at_line(Statement s, size_t line) {
    if (!has_relation(s.relation)) throw DanglingIdError(s.relation.value, line);
    if (!has_entity(s.subject)) throw DanglingIdError(s.subject.value, line);
    check_object(s.relation, s.object, line);
    for (const auto& q : s.qualifiers) {
        if (!has_relation(q.relation)) throw DanglingIdError(q.relation.value, line);
        check_object(q.relation, q.value, line);
    }

    size_t idx = statements_.size();
    by_subject_[s.subject].push_back(idx);
    by_subject_relation_[{s.subject.value, s.relation.value}].push_back(idx);
    if (auto* obj = std::get_if<EntityId>(&s.object)) {
        by_object_[*obj].push_back(idx);
        by_object_relation_[{obj->value, s.relation.value}].push_back(idx);
        triples_.insert(triple_key(s.relation, s.subject, *obj));
    }
    for (const auto& q : s.qualifiers) qualifier_relations_.insert(q.relation);
    statements_.push_back(std::move(s));
}

// ---------------------------------------------------------------------------
// Loader

namespace {

using nlohmann::json;

ObjectValue parse_object(const json& j, size_t line) {
    if (j.is_string()) return EntityId{j.get<std::string>()};
    if (j.is_object() && j.contains("date")) {
        try {
            return DateValue::parse(j.at("date").get<std::string>());
        } catch (const Error& e) {
            throw ParseError(e.what(), line);
        }
    }
    throw ParseError("object must be an entity id string or {\"date\":\"YYYY-MM-DD\"}", line);
}

}  // namespace

KnowledgeBase load_kb(std::istream& in, const std::string& origin) {
    KnowledgeBase kb;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON in ") + origin + ": " + e.what(), lineno);
        }
        try {
            const std::string type = j.at("type").get<std::string>();
            if (type == "entity") {
                kb.add_entity(EntityId{j.at("id").get<std::string>()},
                              j.at("label").get<std::string>());
            } else if (type == "relation") {
                kb.add_relation(RelationId{j.at("id").get<std::string>()},
                                j.at("label").get<std::string>(),
                                j.value("date_valued", false));
            } else if (type == "statement") {
                Statement s;
                s.relation = RelationId{j.at("rel").get<std::string>()};
                s.subject = EntityId{j.at("subj").get<std::string>()};
                s.object = parse_object(j.at("obj"), lineno);
                for (const auto& q : j.value("qualifiers", json::array()))
                    s.qualifiers.push_back({RelationId{q.at("rel").get<std::string>()},
                                            parse_object(q.at("val"), lineno)});
                kb.add_statement_at_line(std::move(s), lineno);
            } else {
                throw ParseError("unknown line type '" + type + "'", lineno);
            }
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad record in ") + origin + ": " + e.what(), lineno);
        } catch (const ParseError&) {
            throw;
        } catch (const DanglingIdError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return kb;
}

KnowledgeBase load_kb(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open KB file '" + path + "'");
    return load_kb(in, path);
}

// ---------------------------------------------------------------------------
// Query evaluation

namespace {

// Bindings for the q-node and intermediate variables during the join.
struct Binding {
    EntityId q;
    std::vector<std::optional<EntityId>> inter;

    std::optional<EntityId> resolve(const NodeRef& n) const {
        if (is_qvar(n)) return q;
        if (auto* g = std::get_if<Grounded>(&n)) return g->entity;
        if (auto* iv = std::get_if<Intermediate>(&n)) return inter[iv->index];
        return std::nullopt;  // sort nodes are handled separately
    }
};

bool qualifier_matches(const Statement& st, const EdgeQualifier& q) {
    const EntityId& want = std::get<Grounded>(q.value).entity;
    for (const auto& sq : st.qualifiers) {
        if (sq.relation != q.relation) continue;
        if (auto* e = std::get_if<EntityId>(&sq.value); e && *e == want) return true;
    }
    return false;
}

bool edge_holds(const KnowledgeBase& kb, const GraphEdge& e, const EntityId& subj,
                const EntityId& obj) {
    if (!e.qualifier) return kb.has_triple(e.relation, subj, obj);
    for (size_t idx : kb.by_subject_relation(subj, e.relation)) {
        const Statement& st = kb.statements()[idx];
        if (auto* o = std::get_if<EntityId>(&st.object); o && *o == obj)
            if (qualifier_matches(st, *e.qualifier)) return true;
    }
    return false;
}

// Entities an unbound endpoint can take, given the other endpoint is fixed.
std::vector<EntityId> endpoint_candidates(const KnowledgeBase& kb, const GraphEdge& e,
                                          const EntityId& fixed, bool fixed_is_subject) {
    std::vector<EntityId> out;
    const auto& idxs = fixed_is_subject ? kb.by_subject_relation(fixed, e.relation)
                                        : kb.by_object_relation(fixed, e.relation);
    for (size_t idx : idxs) {
        const Statement& st = kb.statements()[idx];
        if (e.qualifier && !qualifier_matches(st, *e.qualifier)) continue;
        if (fixed_is_subject) {
            if (auto* o = std::get_if<EntityId>(&st.object)) out.push_back(*o);
        } else {
            out.push_back(st.subject);
        }
    }
    return out;
}

// Backtracking join over the intermediate variables. Edges with both
// endpoints resolved are checked eagerly; otherwise some edge with exactly
// one unresolved endpoint exists (the graph is connected through q).
bool satisfiable(const KnowledgeBase& kb, const std::vector<const GraphEdge*>& edges,
                 std::vector<bool>& done, Binding& bind) {
    int enumerable = -1;
    for (size_t i = 0; i < edges.size(); ++i) {
        if (done[i]) continue;
        auto s = bind.resolve(edges[i]->source);
        auto t = bind.resolve(edges[i]->target);
        if (s && t) {
            if (!edge_holds(kb, *edges[i], *s, *t)) return false;
            done[i] = true;
            bool ok = satisfiable(kb, edges, done, bind);
            done[i] = false;
            return ok;
        }
        if ((s || t) && enumerable < 0) enumerable = static_cast<int>(i);
    }
    bool any_open = false;
    for (size_t i = 0; i < edges.size(); ++i) any_open = any_open || !done[i];
    if (!any_open) return true;
    if (enumerable < 0) return false;  // unreachable for well-formed graphs

    const GraphEdge& e = *edges[enumerable];
    auto s = bind.resolve(e.source);
    bool fixed_is_subject = s.has_value();
    const EntityId fixed = fixed_is_subject ? *s : *bind.resolve(e.target);
    const NodeRef& open = fixed_is_subject ? e.target : e.source;
    int var = std::get<Intermediate>(open).index;

    done[enumerable] = true;
    for (const EntityId& cand : endpoint_candidates(kb, e, fixed, fixed_is_subject)) {
        bind.inter[var] = cand;
        if (satisfiable(kb, edges, done, bind)) {
            bind.inter[var].reset();
            done[enumerable] = false;
            return true;
        }
        bind.inter[var].reset();
    }
    done[enumerable] = false;
    return false;
}

void validate_against_kb(const KnowledgeBase& kb, const SemanticGraph& g) {
    auto check_node = [&](const NodeRef& n) {
        if (auto* gr = std::get_if<Grounded>(&n); gr && !kb.has_entity(gr->entity))
            throw DanglingIdError(gr->entity.value, 0);
    };
    for (const auto& e : g.edges) {
        if (!kb.has_relation(e.relation)) throw DanglingIdError(e.relation.value, 0);
        check_node(e.source);
        check_node(e.target);
        if (e.qualifier) {
            if (!kb.has_relation(e.qualifier->relation))
                throw DanglingIdError(e.qualifier->relation.value, 0);
            check_node(e.qualifier->value);
        }
        if (is_sort(e.target) && !kb.is_date_valued(e.relation))
            throw Error("sort edge over non-date relation '" + e.relation.value + "'");
    }
}

}  // namespace

std::set<EntityId> evaluate_graph(const KnowledgeBase& kb, const SemanticGraph& g) {
    if (g.edges.empty()) return {};
    if (auto v = well_formedness_violation(g)) throw Error("ill-formed graph: " + *v);
    validate_against_kb(kb, g);

    std::vector<const GraphEdge*> match_edges;
    std::vector<const GraphEdge*> sort_edges;
    for (const auto& e : g.edges)
        (is_sort(e.target) ? sort_edges : match_edges).push_back(&e);

    // Candidate pool for q: narrow through a match edge with a grounded
    // endpoint on the other side when one exists, else all entities.
    std::vector<EntityId> pool;
    bool narrowed = false;
    for (const GraphEdge* e : match_edges) {
        if (is_qvar(e->source) && is_grounded(e->target)) {
            pool = endpoint_candidates(kb, *e, std::get<Grounded>(e->target).entity, false);
            narrowed = true;
        } else if (is_qvar(e->target) && is_grounded(e->source)) {
            pool = endpoint_candidates(kb, *e, std::get<Grounded>(e->source).entity, true);
        } else {
            continue;
        }
        narrowed = true;
        break;
    }
    if (!narrowed) {
        pool.reserve(kb.entity_count());
        for (const auto& ent : kb.entities()) pool.push_back(ent.id);
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    std::set<EntityId> result;
    const int n_inter = g.intermediate_count();
    for (const EntityId& cand : pool) {
        Binding bind{cand, std::vector<std::optional<EntityId>>(n_inter)};
        std::vector<bool> done(match_edges.size(), false);
        if (match_edges.empty() || satisfiable(kb, match_edges, done, bind))
            result.insert(cand);
    }

    // Sort constraints filter the candidate set: entities without a date for
    // the relation are dropped, then only the extremal date values survive
    // (ties all kept). An entity with several dates contributes its own
    // extremum in the constraint's direction.
    for (const GraphEdge* se : sort_edges) {
        const bool want_max = std::get<SortNode>(se->target).kind == SortKind::ArgMax;
        std::vector<std::pair<EntityId, DateValue>> valued;
        for (const EntityId& c : result) {
            auto dates = kb.dates_of(c, se->relation);
            if (dates.empty()) continue;
            DateValue v = want_max ? *std::max_element(dates.begin(), dates.end())
                                   : *std::min_element(dates.begin(), dates.end());
            valued.emplace_back(c, v);
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

}  // namespace gqa
