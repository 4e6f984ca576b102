#pragma once

#include <compare>
#include <functional>
#include <string>
#include <variant>

#include "gqa/date.hpp"

namespace gqa {

// Opaque entity identifier ("Q42"-style).
struct EntityId {
    std::string value;

    auto operator<=>(const EntityId&) const = default;
};

// Opaque relation identifier ("P175"-style). Whether a relation is
// date-valued is recorded in the knowledge base's relation table.
struct RelationId {
    std::string value;

    auto operator<=>(const RelationId&) const = default;
};

// Object position of a statement: an entity or a calendar date.
using ObjectValue = std::variant<EntityId, DateValue>;

inline bool is_entity(const ObjectValue& v) { return std::holds_alternative<EntityId>(v); }
inline bool is_date(const ObjectValue& v) { return std::holds_alternative<DateValue>(v); }

}  // namespace gqa

template <>
struct std::hash<gqa::EntityId> {
    size_t operator()(const gqa::EntityId& e) const noexcept {
        return std::hash<std::string>{}(e.value);
    }
};

template <>
struct std::hash<gqa::RelationId> {
    size_t operator()(const gqa::RelationId& r) const noexcept {
        return std::hash<std::string>{}(r.value);
    }
};
