#pragma once

#include <algorithm>
#include <string>

#include "gqa/params.hpp"
#include "gqa/rng.hpp"
#include "gqa/tape.hpp"

namespace gqa {

struct GradCheckResult {
    double max_rel_err = 0.0;
    size_t coords_checked = 0;
    std::string worst_coord;

    bool pass(double tolerance) const { return coords_checked > 0 && max_rel_err < tolerance; }
};

// Central-difference check of the tape's backward pass, in 64-bit. `loss_fn`
// must deterministically rebuild the same scalar loss on a fresh tape
// (dropout off). Error is measured as |analytic - numeric| relative to the
// larger magnitude, floored at 1e-4 so dead coordinates compare absolutely.
template <typename LossFn>
GradCheckResult grad_check(ParamStore<double>& store, LossFn&& loss_fn, size_t coords_per_param,
                           Rng& rng, double h = 1e-5) {
    auto eval = [&]() -> double {
        Tape<double> tape;
        auto loss = loss_fn(tape);
        return tape.value(loss)[0];
    };

    store.zero_grads();
    {
        Tape<double> tape;
        auto loss = loss_fn(tape);
        tape.backward(loss);
        tape.accumulate_into_params();
    }

    GradCheckResult result;
    for (size_t pi = 0; pi < store.size(); ++pi) {
        Parameter<double>& p = store.at(pi);
        const size_t n = p.value.size();
        auto coords = rng.sample_without_replacement(n, std::min(coords_per_param, n));
        for (size_t c : coords) {
            const double orig = p.value[c];
            p.value[c] = orig + h;
            const double fp = eval();
            p.value[c] = orig - h;
            const double fm = eval();
            p.value[c] = orig;

            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = p.grad[c];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
            const double rel = std::abs(analytic - numeric) / denom;
            ++result.coords_checked;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_coord = p.name + "[" + std::to_string(c) + "]";
            }
        }
    }
    return result;
}

}  // namespace gqa
