#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gqa/error.hpp"
#include "gqa/params.hpp"
#include "gqa/rng.hpp"
#include "gqa/tensor.hpp"

namespace gqa {

// Reverse-mode autodiff over dense tensors. A Tape records one forward
// computation; backward() walks it once in reverse. Recordings are cheap,
// single-use and independent: separate tapes may run on separate threads over
// shared read-only Parameters, with gradient accumulation deferred to
// accumulate_into_params() so the caller controls ordering.
template <typename T>
class Tape {
public:
    struct Value {
        int idx = -1;
        bool valid() const { return idx >= 0; }
    };

    Value input(Tensor<T> t) {
        check_finite(t, "input");
        return push(std::move(t), nullptr);
    }

    Value param(Parameter<T>& p) {
        check_finite(p.value, "param");
        return push(p.value, &p);
    }

    const Tensor<T>& value(Value v) const { return node(v).val; }

    const Tensor<T>& grad(Value v) const {
        if (!ran_backward_) throw Error("gradient read before backward()");
        return node(v).grad;
    }

    // ---- ops ------------------------------------------------------------

    Value matmul(Value av, Value bv) {
        Node &a = node(av), &b = node(bv);
        require(a.val.rank() == 2 && b.val.rank() == 2 && a.val.cols() == b.val.rows(),
                "matmul", a.val, b.val);
        const size_t n = a.val.rows(), k = a.val.cols(), m = b.val.cols();
        Tensor<T> out({n, m});
        for (size_t i = 0; i < n; ++i)
            for (size_t p = 0; p < k; ++p) {
                const T x = a.val.at(i, p);
                if (x == T(0)) continue;
                const T* brow = &b.val.data[p * m];
                T* orow = &out.data[i * m];
                for (size_t j = 0; j < m; ++j) orow[j] += x * brow[j];
            }
        return push(std::move(out), "matmul", [&a, &b, n, k, m](const Tensor<T>& g) {
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < m; ++j) {
                    const T gy = g.at(i, j);
                    if (gy == T(0)) continue;
                    for (size_t p = 0; p < k; ++p) {
                        a.grad.at(i, p) += gy * b.val.at(p, j);
                        b.grad.at(p, j) += gy * a.val.at(i, p);
                    }
                }
        });
    }

    Value vecmat(Value vv, Value mv) {
        Node &v = node(vv), &m = node(mv);
        require(v.val.rank() == 1 && m.val.rank() == 2 && v.val.size() == m.val.rows(),
                "vecmat", v.val, m.val);
        const size_t k = v.val.size(), out_dim = m.val.cols();
        Tensor<T> out({out_dim});
        for (size_t i = 0; i < k; ++i) {
            const T x = v.val[i];
            if (x == T(0)) continue;
            const T* mrow = &m.val.data[i * out_dim];
            for (size_t j = 0; j < out_dim; ++j) out[j] += x * mrow[j];
        }
        return push(std::move(out), "vecmat", [&v, &m, k, out_dim](const Tensor<T>& g) {
            for (size_t i = 0; i < k; ++i) {
                T acc = 0;
                const T* mrow = &m.val.data[i * out_dim];
                T* gmrow = &m.grad.data[i * out_dim];
                for (size_t j = 0; j < out_dim; ++j) {
                    acc += g[j] * mrow[j];
                    gmrow[j] += v.val[i] * g[j];
                }
                v.grad[i] += acc;
            }
        });
    }

    Value add(Value av, Value bv) { return zip(av, bv, "add", std::plus<T>(), 1, 1); }
    Value sub(Value av, Value bv) { return zip(av, bv, "sub", std::minus<T>(), 1, -1); }

    Value mul(Value av, Value bv) {
        Node &a = node(av), &b = node(bv);
        require(a.val.same_shape(b.val), "mul", a.val, b.val);
        Tensor<T> out(a.val.shape);
        for (size_t i = 0; i < out.size(); ++i) out[i] = a.val[i] * b.val[i];
        return push(std::move(out), "mul", [&a, &b](const Tensor<T>& g) {
            for (size_t i = 0; i < g.size(); ++i) {
                a.grad[i] += g[i] * b.val[i];
                b.grad[i] += g[i] * a.val[i];
            }
        });
    }

    Value scale(Value av, double c) {
        Node& a = node(av);
        Tensor<T> out(a.val.shape);
        for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(c) * a.val[i];
        return push(std::move(out), "scale", [&a, c](const Tensor<T>& g) {
            for (size_t i = 0; i < g.size(); ++i) a.grad[i] += static_cast<T>(c) * g[i];
        });
    }

    // {n,d} + {d}, the only broadcast in the library.
    Value add_rowwise(Value mv, Value bv) {
        Node &m = node(mv), &b = node(bv);
        require(m.val.rank() == 2 && b.val.rank() == 1 && m.val.cols() == b.val.size(),
                "add_rowwise", m.val, b.val);
        Tensor<T> out(m.val.shape);
        const size_t n = m.val.rows(), d = m.val.cols();
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < d; ++j) out.at(i, j) = m.val.at(i, j) + b.val[j];
        return push(std::move(out), "add_rowwise", [&m, &b, n, d](const Tensor<T>& g) {
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < d; ++j) {
                    m.grad.at(i, j) += g.at(i, j);
                    b.grad[j] += g.at(i, j);
                }
        });
    }

    Value tanh_(Value av) {
        return unary(av, "tanh", [](T x) { return std::tanh(x); },
                     [](T, T y) { return T(1) - y * y; });
    }

    Value sigmoid_(Value av) {
        return unary(av, "sigmoid", [](T x) { return T(1) / (T(1) + std::exp(-x)); },
                     [](T, T y) { return y * (T(1) - y); });
    }

    Value relu_(Value av) {
        return unary(av, "relu", [](T x) { return x > T(0) ? x : T(0); },
                     [](T x, T) { return x > T(0) ? T(1) : T(0); });
    }

    Value concat(Value av, Value bv) {
        Node &a = node(av), &b = node(bv);
        require(a.val.rank() == 1 && b.val.rank() == 1, "concat", a.val, b.val);
        Tensor<T> out({a.val.size() + b.val.size()});
        std::copy(a.val.data.begin(), a.val.data.end(), out.data.begin());
        std::copy(b.val.data.begin(), b.val.data.end(), out.data.begin() + a.val.size());
        return push(std::move(out), "concat", [&a, &b](const Tensor<T>& g) {
            for (size_t i = 0; i < a.grad.size(); ++i) a.grad[i] += g[i];
            for (size_t i = 0; i < b.grad.size(); ++i) b.grad[i] += g[a.grad.size() + i];
        });
    }

    Value stack_rows(const std::vector<Value>& rows) {
        if (rows.empty()) throw ShapeError("stack_rows of zero rows");
        const size_t d = node(rows[0]).val.size();
        std::vector<Node*> ins;
        Tensor<T> out({rows.size(), d});
        for (size_t i = 0; i < rows.size(); ++i) {
            Node& r = node(rows[i]);
            require(r.val.rank() == 1 && r.val.size() == d, "stack_rows", node(rows[0]).val,
                    r.val);
            std::copy(r.val.data.begin(), r.val.data.end(), out.data.begin() + i * d);
            ins.push_back(&r);
        }
        return push(std::move(out), "stack_rows", [ins, d](const Tensor<T>& g) {
            for (size_t i = 0; i < ins.size(); ++i)
                for (size_t j = 0; j < d; ++j) ins[i]->grad[j] += g.at(i, j);
        });
    }

    Value row(Value mv, size_t i) {
        Node& m = node(mv);
        require(m.val.rank() == 2 && i < m.val.rows(), "row", m.val, m.val);
        const size_t d = m.val.cols();
        Tensor<T> out({d});
        std::copy(m.val.data.begin() + i * d, m.val.data.begin() + (i + 1) * d,
                  out.data.begin());
        return push(std::move(out), "row", [&m, i, d](const Tensor<T>& g) {
            for (size_t j = 0; j < d; ++j) m.grad.at(i, j) += g[j];
        });
    }

    Value sum_axis0(Value mv) { return pool(mv, "sum_axis0"); }
    Value avg_axis0(Value mv) { return pool(mv, "avg_axis0"); }
    Value max_axis0(Value mv) { return pool(mv, "max_axis0"); }

    Value sum_all(Value av) {
        Node& a = node(av);
        T s = 0;
        for (const T& x : a.val.data) s += x;
        return push(Tensor<T>({1}, {s}), "sum_all", [&a](const Tensor<T>& g) {
            for (size_t i = 0; i < a.grad.size(); ++i) a.grad[i] += g[0];
        });
    }

    // cos(u, v); either input all-zero yields 0 with zero gradient.
    Value cosine(Value uv, Value vv) {
        Node &u = node(uv), &v = node(vv);
        require(u.val.same_shape(v.val) && u.val.rank() == 1, "cosine", u.val, v.val);
        double dot = 0, nu = 0, nv = 0;
        for (size_t i = 0; i < u.val.size(); ++i) {
            dot += static_cast<double>(u.val[i]) * v.val[i];
            nu += static_cast<double>(u.val[i]) * u.val[i];
            nv += static_cast<double>(v.val[i]) * v.val[i];
        }
        nu = std::sqrt(nu);
        nv = std::sqrt(nv);
        const bool degenerate = nu == 0.0 || nv == 0.0;
        const double c = degenerate ? 0.0 : dot / (nu * nv);
        return push(Tensor<T>({1}, {static_cast<T>(c)}), "cosine",
                    [&u, &v, nu, nv, c, degenerate](const Tensor<T>& g) {
                        if (degenerate) return;
                        const double gy = static_cast<double>(g[0]);
                        for (size_t i = 0; i < u.grad.size(); ++i) {
                            const double ui = u.val[i], vi = v.val[i];
                            u.grad[i] += static_cast<T>(gy * (vi / (nu * nv) - c * ui / (nu * nu)));
                            v.grad[i] += static_cast<T>(gy * (ui / (nu * nv) - c * vi / (nv * nv)));
                        }
                    });
    }

    // Inverted-scaling dropout: keep with probability 1-p and divide by 1-p,
    // so evaluation needs no rescaling. Identity when train is false or p=0.
    Value dropout(Value av, double p, bool train, Rng& rng) {
        if (p < 0.0 || p >= 1.0) throw Error("dropout rate must be in [0,1)");
        if (!train || p == 0.0) return av;
        Node& a = node(av);
        auto mask = std::make_shared<std::vector<T>>(a.val.size());
        const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
        Tensor<T> out(a.val.shape);
        for (size_t i = 0; i < out.size(); ++i) {
            (*mask)[i] = rng.bernoulli(p) ? T(0) : keep_scale;
            out[i] = a.val[i] * (*mask)[i];
        }
        return push(std::move(out), "dropout", [&a, mask](const Tensor<T>& g) {
            for (size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i] * (*mask)[i];
        });
    }

    // 1-D convolution over the row axis with zero same-padding.
    // x: {n, d_in}, w: {k*d_in, d_out} (kernel-major), b: {d_out} -> {n, d_out}.
    Value conv1d_same(Value xv, Value wv, Value bv, size_t kernel) {
        Node &x = node(xv), &w = node(wv), &b = node(bv);
        require(x.val.rank() == 2 && w.val.rank() == 2 && b.val.rank() == 1, "conv1d_same",
                x.val, w.val);
        const size_t n = x.val.rows(), din = x.val.cols(), dout = w.val.cols();
        require(w.val.rows() == kernel * din && b.val.size() == dout, "conv1d_same", w.val,
                b.val);
        const long off = static_cast<long>(kernel / 2);
        Tensor<T> out({n, dout});
        for (size_t i = 0; i < n; ++i) {
            T* orow = &out.data[i * dout];
            for (size_t j = 0; j < dout; ++j) orow[j] = b.val[j];
            for (size_t t = 0; t < kernel; ++t) {
                const long src = static_cast<long>(i) + static_cast<long>(t) - off;
                if (src < 0 || src >= static_cast<long>(n)) continue;
                const T* xrow = &x.val.data[static_cast<size_t>(src) * din];
                for (size_t c = 0; c < din; ++c) {
                    const T xv_ = xrow[c];
                    if (xv_ == T(0)) continue;
                    const T* wrow = &w.val.data[(t * din + c) * dout];
                    for (size_t j = 0; j < dout; ++j) orow[j] += xv_ * wrow[j];
                }
            }
        }
        return push(std::move(out), "conv1d_same",
                    [&x, &w, &b, n, din, dout, kernel, off](const Tensor<T>& g) {
                        for (size_t i = 0; i < n; ++i) {
                            const T* grow = &g.data[i * dout];
                            for (size_t j = 0; j < dout; ++j) b.grad[j] += grow[j];
                            for (size_t t = 0; t < kernel; ++t) {
                                const long src =
                                    static_cast<long>(i) + static_cast<long>(t) - off;
                                if (src < 0 || src >= static_cast<long>(n)) continue;
                                const T* xrow = &x.val.data[static_cast<size_t>(src) * din];
                                T* gxrow = &x.grad.data[static_cast<size_t>(src) * din];
                                for (size_t c = 0; c < din; ++c) {
                                    const T* wrow = &w.val.data[(t * din + c) * dout];
                                    T* gwrow = &w.grad.data[(t * din + c) * dout];
                                    T acc = 0;
                                    for (size_t j = 0; j < dout; ++j) {
                                        acc += grow[j] * wrow[j];
                                        gwrow[j] += xrow[c] * grow[j];
                                    }
                                    gxrow[c] += acc;
                                }
                            }
                        }
                    });
    }

    // Low-level node insertion with a caller-provided backward rule. Exists
    // so tests can register deliberately wrong rules against grad_check.
    Value custom(const std::vector<Value>& inputs, Tensor<T> out,
                 std::function<void(const Tensor<T>& gout, std::vector<Tensor<T>*> gin)> back) {
        check_finite(out, "custom");
        std::vector<Node*> ins;
        for (Value v : inputs) ins.push_back(&node(v));
        return push(std::move(out), "custom", [ins, back](const Tensor<T>& g) {
            std::vector<Tensor<T>*> gin;
            for (Node* n : ins) gin.push_back(&n->grad);
            back(g, gin);
        });
    }

    // ---- backward -------------------------------------------------------

    void backward(Value loss) {
        if (ran_backward_) throw Error("backward() called twice on one tape");
        Node& l = node(loss);
        if (l.val.size() != 1)
            throw ShapeError("backward() needs a scalar loss, got " + shape_string(l.val.shape));
        for (auto& n : nodes_) {
            n->grad = Tensor<T>(n->val.shape);
        }
        l.grad[0] = T(1);
        for (size_t i = nodes_.size(); i-- > 0;)
            if (nodes_[i]->back) nodes_[i]->back(nodes_[i]->grad);
        ran_backward_ = true;
    }

    // Adds this recording's parameter gradients into the bound Parameters.
    // Callers sequence these calls to keep multi-threaded training
    // deterministic.
    void accumulate_into_params() {
        if (!ran_backward_) throw Error("accumulate_into_params() before backward()");
        for (auto& n : nodes_)
            if (n->param)
                for (size_t i = 0; i < n->grad.size(); ++i) n->param->grad[i] += n->grad[i];
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor<T> val;
        Tensor<T> grad;
        std::function<void(const Tensor<T>&)> back;
        Parameter<T>* param = nullptr;
    };

    std::vector<std::unique_ptr<Node>> nodes_;
    bool ran_backward_ = false;

    Node& node(Value v) {
        if (!v.valid() || static_cast<size_t>(v.idx) >= nodes_.size())
            throw Error("invalid tape value handle");
        return *nodes_[v.idx];
    }
    const Node& node(Value v) const { return const_cast<Tape*>(this)->node(v); }

    Value push(Tensor<T> val, Parameter<T>* p) {
        auto n = std::make_unique<Node>();
        n->val = std::move(val);
        n->param = p;
        nodes_.push_back(std::move(n));
        return Value{static_cast<int>(nodes_.size()) - 1};
    }

    Value push(Tensor<T> val, const char* op, std::function<void(const Tensor<T>&)> back) {
        check_finite(val, op);
        auto n = std::make_unique<Node>();
        n->val = std::move(val);
        n->back = std::move(back);
        nodes_.push_back(std::move(n));
        return Value{static_cast<int>(nodes_.size()) - 1};
    }

    static void check_finite(const Tensor<T>& t, const char* op) {
        if (!t.all_finite())
            throw Error(std::string(op) + " produced a non-finite value");
    }

    static void require(bool ok, const char* op, const Tensor<T>& a, const Tensor<T>& b) {
        if (!ok)
            throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape) +
                             " and " + shape_string(b.shape));
    }

    template <typename Fwd, typename Bwd>
    Value unary(Value av, const char* op, Fwd fwd, Bwd bwd) {
        Node& a = node(av);
        Tensor<T> out(a.val.shape);
        for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(a.val[i]);
        Node* self = nullptr;
        Value v = push(std::move(out), op, nullptr);
        self = nodes_.back().get();
        self->back = [&a, self, bwd](const Tensor<T>& g) {
            for (size_t i = 0; i < g.size(); ++i) a.grad[i] += g[i] * bwd(a.val[i], self->val[i]);
        };
        return v;
    }

    template <typename Op>
    Value zip(Value av, Value bv, const char* opname, Op op, int da, int db) {
        Node &a = node(av), &b = node(bv);
        require(a.val.same_shape(b.val), opname, a.val, b.val);
        Tensor<T> out(a.val.shape);
        for (size_t i = 0; i < out.size(); ++i) out[i] = op(a.val[i], b.val[i]);
        return push(std::move(out), opname, [&a, &b, da, db](const Tensor<T>& g) {
            for (size_t i = 0; i < g.size(); ++i) {
                a.grad[i] += static_cast<T>(da) * g[i];
                b.grad[i] += static_cast<T>(db) * g[i];
            }
        });
    }

    Value pool(Value mv, const std::string& kind) {
        Node& m = node(mv);
        require(m.val.rank() == 2 && m.val.rows() > 0, kind.c_str(), m.val, m.val);
        const size_t n = m.val.rows(), d = m.val.cols();
        Tensor<T> out({d});
        if (kind == "max_axis0") {
            auto arg = std::make_shared<std::vector<size_t>>(d, 0);
            for (size_t j = 0; j < d; ++j) {
                T best = m.val.at(0, j);
                for (size_t i = 1; i < n; ++i)
                    if (m.val.at(i, j) > best) {
                        best = m.val.at(i, j);
                        (*arg)[j] = i;
                    }
                out[j] = best;
            }
            return push(std::move(out), "max_axis0", [&m, arg](const Tensor<T>& g) {
                for (size_t j = 0; j < g.size(); ++j) m.grad.at((*arg)[j], j) += g[j];
            });
        }
        const T denom = kind == "avg_axis0" ? static_cast<T>(n) : T(1);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < d; ++j) out[j] += m.val.at(i, j) / denom;
        return push(std::move(out), kind.c_str(), [&m, n, d, denom](const Tensor<T>& g) {
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < d; ++j) m.grad.at(i, j) += g[j] / denom;
        });
    }
};

}  // namespace gqa
