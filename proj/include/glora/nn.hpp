#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

namespace glora::nn {

// Dense 64-bit tensor with reverse-mode differentiation. Shapes are at most
// 2-D (rows x cols); vectors use cols == 1.
struct TensorNode {
    std::vector<double> value;
    std::vector<double> grad;
    std::size_t rows = 0;
    std::size_t cols = 1;
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;

    std::size_t size() const { return rows * cols; }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// When off, ops skip graph construction; forwards stay identical.
inline bool& grad_mode() {
    static bool enabled = true;
    return enabled;
}

struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
    ~NoGradGuard() { grad_mode() = prev; }
};

class Tensor {
  public:
    Tensor() : node_(std::make_shared<TensorNode>()) {}
    explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}

    static Tensor zeros(std::size_t rows, std::size_t cols = 1,
                        bool requires_grad = false) {
        Tensor t;
        t.node_->rows = rows;
        t.node_->cols = cols;
        t.node_->value.assign(rows * cols, 0.0);
        t.node_->requires_grad = requires_grad;
        return t;
    }

    static Tensor from_values(std::vector<double> v) {
        Tensor t;
        t.node_->rows = v.size();
        t.node_->value = std::move(v);
        return t;
    }

    static Tensor scalar(double v) { return from_values({v}); }

    std::size_t rows() const { return node_->rows; }
    std::size_t cols() const { return node_->cols; }
    std::size_t size() const { return node_->size(); }
    std::vector<double>& values() { return node_->value; }
    const std::vector<double>& values() const { return node_->value; }
    std::vector<double>& grad() { node_->ensure_grad(); return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }
    double item() const {
        if (node_->size() != 1) throw std::logic_error("Tensor::item: not a scalar");
        return node_->value[0];
    }
    std::shared_ptr<TensorNode> node() const { return node_; }

    Tensor detach() const {
        Tensor t;
        t.node_->rows = node_->rows;
        t.node_->cols = node_->cols;
        t.node_->value = node_->value;
        return t;
    }

    void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

  private:
    std::shared_ptr<TensorNode> node_;
};

namespace detail {

inline Tensor make_op(std::size_t rows, std::size_t cols,
                      std::vector<Tensor> parents,
                      std::function<void(TensorNode&)> backward_fn) {
    Tensor out = Tensor::zeros(rows, cols);
    if (!grad_mode()) return out;
    bool needs = false;
    for (const auto& p : parents) {
        needs = needs || p.node()->requires_grad || !p.node()->parents.empty() ||
                static_cast<bool>(p.node()->backward_fn);
    }
    if (!needs) return out;
    out.node()->requires_grad = false;
    for (auto& p : parents) out.node()->parents.push_back(p.node());
    out.node()->backward_fn = std::move(backward_fn);
    return out;
}

}  // namespace detail

// y = W x  (W: m x n, x: n)
inline Tensor matvec(const Tensor& W, const Tensor& x) {
    const std::size_t m = W.rows(), n = W.cols();
    if (x.size() != n) throw std::invalid_argument("matvec: shape mismatch");
    auto Wn = W.node();
    auto xn = x.node();
    Tensor y = detail::make_op(m, 1, {W, x}, [Wn, xn, m, n](TensorNode& out) {
        Wn->ensure_grad();
        xn->ensure_grad();
        const double* w = Wn->value.data();
        const double* xv = xn->value.data();
        const double* gy = out.grad.data();
        double* gw = Wn->grad.data();
        double* gx = xn->grad.data();
        for (std::size_t i = 0; i < m; ++i) {
            const double g = gy[i];
            if (g == 0.0) continue;
            const double* row = w + i * n;
            double* grow = gw + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                grow[j] += g * xv[j];
                gx[j] += g * row[j];
            }
        }
    });
    const double* w = W.values().data();
    const double* xv = x.values().data();
    double* yv = y.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = w + i * n;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            s0 += row[j] * xv[j];
            s1 += row[j + 1] * xv[j + 1];
            s2 += row[j + 2] * xv[j + 2];
            s3 += row[j + 3] * xv[j + 3];
        }
        for (; j < n; ++j) s0 += row[j] * xv[j];
        yv[i] = (s0 + s1) + (s2 + s3);
    }
    return y;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: shape mismatch");
    auto an = a.node(); auto bn = b.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a, b}, [an, bn](TensorNode& out) {
        an->ensure_grad(); bn->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            an->grad[i] += out.grad[i];
            bn->grad[i] += out.grad[i];
        }
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = a.values()[i] + b.values()[i];
    return y;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: shape mismatch");
    auto an = a.node(); auto bn = b.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a, b}, [an, bn](TensorNode& out) {
        an->ensure_grad(); bn->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            an->grad[i] += out.grad[i];
            bn->grad[i] -= out.grad[i];
        }
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = a.values()[i] - b.values()[i];
    return y;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mul: shape mismatch");
    auto an = a.node(); auto bn = b.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a, b}, [an, bn](TensorNode& out) {
        an->ensure_grad(); bn->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            an->grad[i] += out.grad[i] * bn->value[i];
            bn->grad[i] += out.grad[i] * an->value[i];
        }
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = a.values()[i] * b.values()[i];
    return y;
}

inline Tensor scale(const Tensor& a, double c) {
    auto an = a.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an, c](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += c * out.grad[i];
    });
    for (std::size_t i = 0; i < a.size(); ++i) y.values()[i] = c * a.values()[i];
    return y;
}

inline Tensor add_scalar(const Tensor& a, double c) {
    auto an = a.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += out.grad[i];
    });
    for (std::size_t i = 0; i < a.size(); ++i) y.values()[i] = a.values()[i] + c;
    return y;
}

inline Tensor tanh_op(const Tensor& a) {
    auto an = a.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += out.grad[i] * (1.0 - out.value[i] * out.value[i]);
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = std::tanh(a.values()[i]);
    return y;
}

inline Tensor sigmoid_op(const Tensor& a) {
    auto an = a.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += out.grad[i] * out.value[i] * (1.0 - out.value[i]);
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = 1.0 / (1.0 + std::exp(-a.values()[i]));
    return y;
}

inline Tensor exp_op(const Tensor& a) {
    auto an = a.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += out.grad[i] * out.value[i];
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = std::exp(a.values()[i]);
    return y;
}

inline Tensor concat(const std::vector<Tensor>& parts) {
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    std::vector<std::shared_ptr<TensorNode>> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    Tensor y = detail::make_op(total, 1, parts, [nodes](TensorNode& out) {
        std::size_t off = 0;
        for (auto& n : nodes) {
            n->ensure_grad();
            for (std::size_t i = 0; i < n->value.size(); ++i)
                n->grad[i] += out.grad[off + i];
            off += n->value.size();
        }
    });
    std::size_t off = 0;
    for (const auto& p : parts) {
        std::copy(p.values().begin(), p.values().end(), y.values().begin() + off);
        off += p.size();
    }
    return y;
}

inline Tensor slice(const Tensor& a, std::size_t start, std::size_t len) {
    if (start + len > a.size()) throw std::invalid_argument("slice: out of range");
    auto an = a.node();
    Tensor y = detail::make_op(len, 1, {a}, [an, start](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[start + i] += out.grad[i];
    });
    std::copy(a.values().begin() + start, a.values().begin() + start + len,
              y.values().begin());
    return y;
}

inline Tensor log_softmax(const Tensor& a) {
    auto an = a.node();
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an](TensorNode& out) {
        an->ensure_grad();
        double gsum = 0.0;
        for (double g : out.grad) gsum += g;
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            an->grad[i] += out.grad[i] - std::exp(out.value[i]) * gsum;
    });
    double mx = a.values()[0];
    for (double v : a.values()) mx = std::max(mx, v);
    double lse = 0.0;
    for (double v : a.values()) lse += std::exp(v - mx);
    lse = mx + std::log(lse);
    for (std::size_t i = 0; i < a.size(); ++i) y.values()[i] = a.values()[i] - lse;
    return y;
}

inline Tensor pick(const Tensor& a, std::size_t index) {
    if (index >= a.size()) throw std::invalid_argument("pick: out of range");
    auto an = a.node();
    Tensor y = detail::make_op(1, 1, {a}, [an, index](TensorNode& out) {
        an->ensure_grad();
        an->grad[index] += out.grad[0];
    });
    y.values()[0] = a.values()[index];
    return y;
}

inline Tensor sum(const Tensor& a) {
    auto an = a.node();
    Tensor y = detail::make_op(1, 1, {a}, [an](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < an->grad.size(); ++i)
            an->grad[i] += out.grad[0];
    });
    double s = 0.0;
    for (double v : a.values()) s += v;
    y.values()[0] = s;
    return y;
}

// Entropy of a categorical distribution given its log-probabilities.
inline Tensor entropy_from_log_probs(const Tensor& log_probs) {
    return scale(sum(mul(exp_op(log_probs), log_probs)), -1.0);
}

// Clamp with pass-through gradient inside the band and zero outside. Bounds
// are treated as constants.
inline Tensor clip_band(const Tensor& a, double lo, double hi) {
    auto an = a.node();
    std::vector<char> inside(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        inside[i] = a.values()[i] >= lo && a.values()[i] <= hi;
    }
    Tensor y = detail::make_op(a.rows(), a.cols(), {a}, [an, inside](TensorNode& out) {
        an->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            if (inside[i]) an->grad[i] += out.grad[i];
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = std::clamp(a.values()[i], lo, hi);
    return y;
}

// Elementwise min/max; gradient follows the selected branch (ties pick a).
inline Tensor minimum(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("minimum: shape mismatch");
    auto an = a.node(); auto bn = b.node();
    std::vector<char> pick_a(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        pick_a[i] = a.values()[i] <= b.values()[i];
    Tensor y = detail::make_op(a.rows(), a.cols(), {a, b},
                               [an, bn, pick_a](TensorNode& out) {
        an->ensure_grad(); bn->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            if (pick_a[i]) an->grad[i] += out.grad[i];
            else bn->grad[i] += out.grad[i];
        }
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = std::min(a.values()[i], b.values()[i]);
    return y;
}

inline Tensor maximum(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("maximum: shape mismatch");
    auto an = a.node(); auto bn = b.node();
    std::vector<char> pick_a(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        pick_a[i] = a.values()[i] >= b.values()[i];
    Tensor y = detail::make_op(a.rows(), a.cols(), {a, b},
                               [an, bn, pick_a](TensorNode& out) {
        an->ensure_grad(); bn->ensure_grad();
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            if (pick_a[i]) an->grad[i] += out.grad[i];
            else bn->grad[i] += out.grad[i];
        }
    });
    for (std::size_t i = 0; i < a.size(); ++i)
        y.values()[i] = std::max(a.values()[i], b.values()[i]);
    return y;
}

// Reverse-mode sweep from a scalar loss. A second call on the same loss node
// without re-running the forward pass is a usage error.
inline void backward(const Tensor& loss) {
    if (loss.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    auto root = loss.node();
    if (!root->backward_fn && root->parents.empty()) {
        throw std::logic_error("backward: loss is a leaf; no recorded computation");
    }
    if (!root->grad.empty() && root->grad[0] != 0.0) {
        throw std::logic_error("backward: called twice without a new forward pass");
    }

    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    std::vector<std::pair<TensorNode*, std::size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            TensorNode* p = node->parents[next++].get();
            if (seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorNode* node = *it;
        if (node->backward_fn) {
            node->ensure_grad();
            node->backward_fn(*node);
        }
    }
}

// ---------------------------------------------------------------------------
// Initialization and layers.

// Orthogonal rows (or columns when rows > cols) via modified Gram-Schmidt on
// a seeded gaussian sample.
inline std::vector<double> orthogonal_init(std::size_t rows, std::size_t cols,
                                           std::mt19937_64& rng, double gain = 1.0) {
    const bool transpose = rows > cols;
    const std::size_t m = transpose ? cols : rows;  // m <= n
    const std::size_t n = transpose ? rows : cols;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> q(m, std::vector<double>(n));
    for (auto& row : q)
        for (auto& v : row) v = normal(rng);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += q[i][j] * q[k][j];
            for (std::size_t j = 0; j < n; ++j) q[i][j] -= dot * q[k][j];
        }
        double norm = 0.0;
        for (double v : q[i]) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : q[i]) v /= norm;
    }
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out[r * cols + c] = gain * (transpose ? q[c][r] : q[r][c]);
    return out;
}

// Named parameter registry; owns nothing beyond the tensors it hands out.
class ParamStore {
  public:
    Tensor make(const std::string& name, std::size_t rows, std::size_t cols,
                std::mt19937_64& rng, bool orthogonal = true, double gain = 1.0) {
        Tensor t = Tensor::zeros(rows, cols, true);
        t.node()->cols = cols;
        if (orthogonal && rows > 1 && cols > 1) {
            t.values() = orthogonal_init(rows, cols, rng, gain);
        } else if (orthogonal && cols > 1) {
            // Single-row case: random unit vector.
            t.values() = orthogonal_init(1, cols, rng, gain);
        }
        params_.emplace_back(name, t);
        return t;
    }

    Tensor make_zeros(const std::string& name, std::size_t rows) {
        Tensor t = Tensor::zeros(rows, 1, true);
        params_.emplace_back(name, t);
        return t;
    }

    const std::vector<std::pair<std::string, Tensor>>& params() const {
        return params_;
    }

    void zero_grad() {
        for (auto& [name, t] : params_) t.zero_grad();
    }

    nlohmann::json checkpoint() const {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& [name, t] : params_) {
            j.push_back({{"name", name},
                         {"rows", t.rows()},
                         {"cols", t.cols()},
                         {"values", t.values()}});
        }
        return j;
    }

    void load_checkpoint(const nlohmann::json& j) {
        if (j.size() != params_.size()) {
            throw std::invalid_argument("checkpoint: parameter count mismatch");
        }
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const auto& entry = j.at(i);
            auto& [name, t] = params_[i];
            if (entry.at("name") != name || entry.at("rows") != t.rows() ||
                entry.at("cols") != t.cols()) {
                throw std::invalid_argument("checkpoint: layout mismatch at " + name);
            }
            t.values() = entry.at("values").get<std::vector<double>>();
        }
    }

  private:
    std::vector<std::pair<std::string, Tensor>> params_;
};

struct Linear {
    Tensor weight;
    Tensor bias;

    static Linear create(ParamStore& store, const std::string& name,
                         std::size_t in_dim, std::size_t out_dim,
                         std::mt19937_64& rng, double gain = 1.0) {
        Linear l;
        l.weight = store.make(name + ".weight", out_dim, in_dim, rng, true, gain);
        l.bias = store.make_zeros(name + ".bias", out_dim);
        return l;
    }

    Tensor forward(const Tensor& x) const { return add(matvec(weight, x), bias); }
};

// Standard GRU recurrence:
//   z = sigma(Wz x + Uz h + bz), r = sigma(Wr x + Ur h + br)
//   n = tanh(Wn x + r * (Un h + bn)), h' = (1 - z) * n + z * h
struct GruCell {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Tensor wz, uz, bz, wr, ur, br, wn, un, bn;

    static GruCell create(ParamStore& store, const std::string& name,
                          std::size_t input_dim, std::size_t hidden_dim,
                          std::mt19937_64& rng) {
        GruCell g;
        g.input_dim = input_dim;
        g.hidden_dim = hidden_dim;
        g.wz = store.make(name + ".wz", hidden_dim, input_dim, rng);
        g.uz = store.make(name + ".uz", hidden_dim, hidden_dim, rng);
        g.bz = store.make_zeros(name + ".bz", hidden_dim);
        g.wr = store.make(name + ".wr", hidden_dim, input_dim, rng);
        g.ur = store.make(name + ".ur", hidden_dim, hidden_dim, rng);
        g.br = store.make_zeros(name + ".br", hidden_dim);
        g.wn = store.make(name + ".wn", hidden_dim, input_dim, rng);
        g.un = store.make(name + ".un", hidden_dim, hidden_dim, rng);
        g.bn = store.make_zeros(name + ".bn", hidden_dim);
        return g;
    }

    Tensor forward(const Tensor& input, const Tensor& hidden) const {
        if (input.size() != input_dim || hidden.size() != hidden_dim) {
            throw std::invalid_argument("GruCell::forward: shape mismatch");
        }
        Tensor z = sigmoid_op(add(add(matvec(wz, input), matvec(uz, hidden)), bz));
        Tensor r = sigmoid_op(add(add(matvec(wr, input), matvec(ur, hidden)), br));
        Tensor n = tanh_op(add(matvec(wn, input),
                               mul(r, add(matvec(un, hidden), bn))));
        Tensor one_minus_z = add_scalar(scale(z, -1.0), 1.0);
        return add(mul(one_minus_z, n), mul(z, hidden));
    }
};

class Adam {
  public:
    Adam(ParamStore& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : store_(store), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& [name, t] : store_.params()) {
            m_.emplace_back(t.size(), 0.0);
            v_.emplace_back(t.size(), 0.0);
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        std::size_t idx = 0;
        for (auto& [name, p] : const_cast<std::vector<std::pair<std::string, Tensor>>&>(
                 store_.params())) {
            auto& value = p.values();
            auto& grad = p.grad();
            auto& m = m_[idx];
            auto& v = v_[idx];
            for (std::size_t i = 0; i < value.size(); ++i) {
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
                value[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
            }
            ++idx;
        }
    }

  private:
    ParamStore& store_;
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace glora::nn
