#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "gqa/error.hpp"
#include "gqa/rng.hpp"
#include "gqa/tensor.hpp"

namespace gqa {

template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
        grad = Tensor<T>(value.shape);
    }
};

enum class Init { Zeros, Xavier };

// Owns all trainable parameters of a model, in creation order. Pointers stay
// stable; creation order fixes the checkpoint layout.
template <typename T>
class ParamStore {
public:
    Parameter<T>& create(const std::string& name, std::vector<size_t> shape, Init init,
                         Rng& rng) {
        if (index_.count(name)) throw Error("duplicate parameter '" + name + "'");
        Tensor<T> value(std::move(shape));
        if (init == Init::Xavier) {
            size_t fan_in = value.rank() == 2 ? value.rows() : value.size();
            size_t fan_out = value.rank() == 2 ? value.cols() : value.size();
            const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto& v : value.data) v = static_cast<T>(rng.uniform(-a, a));
        }
        params_.push_back(std::make_unique<Parameter<T>>(name, std::move(value)));
        index_.emplace(name, params_.size() - 1);
        return *params_.back();
    }

    Parameter<T>& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
        return *params_[it->second];
    }

    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    size_t size() const { return params_.size(); }
    Parameter<T>& at(size_t i) { return *params_[i]; }
    const Parameter<T>& at(size_t i) const { return *params_[i]; }

    void zero_grads() {
        for (auto& p : params_) p->grad.fill(T(0));
    }

    size_t scalar_count() const {
        size_t n = 0;
        for (const auto& p : params_) n += p->value.size();
        return n;
    }

private:
    std::vector<std::unique_ptr<Parameter<T>>> params_;
    std::unordered_map<std::string, size_t> index_;
};

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction; one moment pair per parameter, addressed by the
// parameter's position in the store.
template <typename T>
class Adam {
public:
    Adam(ParamStore<T>& store, AdamConfig cfg) : store_(store), cfg_(cfg) {
        for (size_t i = 0; i < store.size(); ++i) {
            m_.emplace_back(store.at(i).value.shape);
            v_.emplace_back(store.at(i).value.shape);
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (size_t i = 0; i < store_.size(); ++i) {
            Parameter<T>& p = store_.at(i);
            for (size_t j = 0; j < p.value.size(); ++j) {
                const double g = static_cast<double>(p.grad[j]);
                double& m = m_[i][j];
                double& v = v_[i][j];
                m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
                v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
                const double mh = m / bc1;
                const double vh = v / bc2;
                p.value[j] -= static_cast<T>(cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps));
            }
        }
    }

    int64_t steps_taken() const { return t_; }

private:
    ParamStore<T>& store_;
    AdamConfig cfg_;
    int64_t t_ = 0;
    std::vector<Tensor<double>> m_, v_;
};

}  // namespace gqa
