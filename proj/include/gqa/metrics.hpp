#pragma once

#include <set>

#include "gqa/ids.hpp"

namespace gqa {

struct PRF {
    double p = 0.0;
    double r = 0.0;
    double f = 0.0;
};

// Per-question precision/recall/F. P is 0 for an empty prediction, F is 0
// when P+R is 0; gold is assumed non-empty (dataset invariant).
PRF question_prf(const std::set<EntityId>& predicted, const std::set<EntityId>& gold);

}  // namespace gqa
