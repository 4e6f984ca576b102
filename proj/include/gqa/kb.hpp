#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gqa/ids.hpp"
#include "gqa/semgraph.hpp"

namespace gqa {

struct Qualifier {
    RelationId relation;
    ObjectValue value;
};

// Binary statement r(subject, object), optionally qualified:
// each qualifier (r2, v) encodes the ternary instance r2(r(e1, e2), v).
struct Statement {
    RelationId relation;
    EntityId subject;
    ObjectValue object;
    std::vector<Qualifier> qualifiers;
};

enum class Direction { Out, In };  // Out: e is subject; In: e is object.

struct RelationUse {
    RelationId relation;
    Direction direction;

    auto operator<=>(const RelationUse&) const = default;
};

// In-memory triple store. Immutable after load; all queries are read-only
// and safe to share across threads.
class KnowledgeBase {
public:
    struct EntityInfo {
        EntityId id;
        std::string label;
    };
    struct RelationInfo {
        RelationId id;
        std::string label;
        bool date_valued = false;
    };

    size_t entity_count() const { return entities_.size(); }
    size_t relation_count() const { return relations_.size(); }
    size_t statement_count() const { return statements_.size(); }

    const std::vector<EntityInfo>& entities() const { return entities_; }
    const std::vector<RelationInfo>& relations() const { return relations_; }
    const std::vector<Statement>& statements() const { return statements_; }

    bool has_entity(const EntityId& e) const { return entity_index_.count(e) > 0; }
    bool has_relation(const RelationId& r) const { return relation_index_.count(r) > 0; }

    const std::string& entity_label(const EntityId& e) const;
    const std::string& relation_label(const RelationId& r) const;
    bool is_date_valued(const RelationId& r) const;

    // Relation types appearing in some statement with e as subject (Out) or
    // as object (In), in (relation, direction) order.
    std::vector<RelationUse> relations_of(const EntityId& e) const;

    // All relations flagged date-valued; these admit argmax/argmin edges.
    std::set<RelationId> date_relations() const;

    // Relations occurring as qualifier relations anywhere in the KB.
    const std::set<RelationId>& qualifier_relations() const { return qualifier_relations_; }

    // Index accessors; each returns statement indices into statements().
    const std::vector<size_t>& by_subject(const EntityId& e) const;
    const std::vector<size_t>& by_object(const EntityId& e) const;
    const std::vector<size_t>& by_subject_relation(const EntityId& e, const RelationId& r) const;
    const std::vector<size_t>& by_object_relation(const EntityId& e, const RelationId& r) const;

    bool has_triple(const RelationId& r, const EntityId& subj, const EntityId& obj) const;

    // Dates attached to (subject, relation) pairs, unsorted.
    std::vector<DateValue> dates_of(const EntityId& subj, const RelationId& r) const;

    // Mutation is only exposed to the loader and to fixture builders; the
    // same validation as the file loader applies.
    void add_entity(EntityId id, std::string label);
    void add_relation(RelationId id, std::string label, bool date_valued);
    void add_statement(Statement s);
    void add_statement_at_line(Statement s, size_t line);

private:
    std::vector<EntityInfo> entities_;
    std::vector<RelationInfo> relations_;
    std::vector<Statement> statements_;

    std::unordered_map<EntityId, size_t> entity_index_;
    std::unordered_map<RelationId, size_t> relation_index_;

    using PairKey = std::pair<std::string, std::string>;
    struct PairKeyHash {
        size_t operator()(const PairKey& k) const noexcept {
            return std::hash<std::string>{}(k.first) * 1000003u ^ std::hash<std::string>{}(k.second);
        }
    };

    std::unordered_map<EntityId, std::vector<size_t>> by_subject_;
    std::unordered_map<EntityId, std::vector<size_t>> by_object_;
    std::unordered_map<PairKey, std::vector<size_t>, PairKeyHash> by_subject_relation_;
    std::unordered_map<PairKey, std::vector<size_t>, PairKeyHash> by_object_relation_;
    std::unordered_set<std::string> triples_;
    std::set<RelationId> qualifier_relations_;

    void check_object(const RelationId& r, const ObjectValue& v, size_t line) const;
};

// Loads the JSON-Lines KB format:
//   {"type":"entity","id":...,"label":...}
//   {"type":"relation","id":...,"label":...,"date_valued":bool}
//   {"type":"statement","rel":...,"subj":...,"obj":<id or {"date":"YYYY-MM-DD"}>,
//    "qualifiers":[{"rel":...,"val":<id or {"date":...}>}]}
// Entities and relations must precede the statements that use them.
KnowledgeBase load_kb(const std::string& path);
KnowledgeBase load_kb(std::istream& in, const std::string& origin);

// Entities that can stand for the q-node so that every edge of g holds, with
// intermediate nodes existentially quantified. Sort edges filter the
// candidates to those whose date value for the edge relation is extremal
// (ties all kept; candidates without a date are dropped first). The empty
// graph evaluates to the empty set.
std::set<EntityId> evaluate_graph(const KnowledgeBase& kb, const SemanticGraph& g);

}  // namespace gqa
