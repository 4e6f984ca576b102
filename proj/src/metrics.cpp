#include "gqa/metrics.hpp"

#include <algorithm>

namespace gqa {

PRF question_prf(const std::set<EntityId>& predicted, const std::set<EntityId>& gold) {
    PRF out;
    if (predicted.empty()) return out;
    size_t both = 0;
    for (const EntityId& e : predicted) both += gold.count(e);
    out.p = static_cast<double>(both) / static_cast<double>(predicted.size());
    out.r = gold.empty() ? 0.0 : static_cast<double>(both) / static_cast<double>(gold.size());
    out.f = (out.p + out.r) > 0.0 ? 2.0 * out.p * out.r / (out.p + out.r) : 0.0;
    return out;
}

}  // namespace gqa
