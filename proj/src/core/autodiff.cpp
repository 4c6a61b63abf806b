// Copyright (C) 2026 The gcl-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/diag.hpp"
#include "core/error.hpp"

namespace gcl::ad {

namespace {

std::size_t rows_of(const Tensor& t) { return t.rows(); }
std::size_t cols_of(const Tensor& t) { return t.cols(); }

void require_same_tape(Var a, Var b) {
    if (a.tape() != b.tape()) throw InvalidArgument("operands recorded on different tapes");
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()));
}

// c += a * b, a [m x k], b [k x n]
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            if (aip == 0.0) continue;
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

// c += a * b^T, a [m x k], b [n x k]
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        std::size_t j = 0;
        // Four output columns at a time; each sum still runs in index order.
        for (; j + 4 <= n; j += 4) {
            const double* b0 = b + j * k;
            const double* b1 = b0 + k;
            const double* b2 = b1 + k;
            const double* b3 = b2 + k;
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double x = ai[p];
                s0 += x * b0[p];
                s1 += x * b1[p];
                s2 += x * b2[p];
                s3 += x * b3[p];
            }
            c[i * n + j] += s0;
            c[i * n + j + 1] += s1;
            c[i * n + j + 2] += s2;
            c[i * n + j + 3] += s3;
        }
        for (; j < n; ++j) {
            const double* bj = b + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            c[i * n + j] += s;
        }
    }
}

// c += a^T * b, a [k x m], b [k x n]
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m;
        const double* bp = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double api = ap[i];
            if (api == 0.0) continue;
            double* ci = c + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
}

Tensor as_matrix(Tensor t) {
    if (t.rank() == 2) return t;
    const std::size_t r = t.rows(), c = t.cols();
    return t.reshaped({r, c});
}

}  // namespace

const Tensor& Var::value() const {
    if (!tape_) throw InvalidArgument("use of an unbound Var");
    return tape_->value(*this);
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::parameter(const ParameterStore& store, std::string_view name) {
    if (store_ && store_ != &store) throw InvalidArgument("tape already bound to another ParameterStore");
    store_ = &store;
    if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var(this, it->second);
    Node n;
    n.value = store.get(name);
    n.requires_grad = grad_enabled_ && store.is_trainable(name);
    n.param = std::string(name);
    Var v = push(std::move(n));
    param_ids_.emplace(std::string(name), v.id());
    return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
    return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, Backward backward) {
    Node n;
    n.value = std::move(value);
    for (Var in : inputs) {
        if (in.tape() != this) throw InvalidArgument("input recorded on a different tape");
        n.inputs.push_back(in.id());
        n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
    }
    n.requires_grad = n.requires_grad && grad_enabled_;
    if (n.requires_grad) n.backward = std::move(backward);
    return push(std::move(n));
}

GradVector Tape::backward(Var loss) {
    if (loss.tape() != this) throw InvalidArgument("loss recorded on a different tape");
    const Node& root = nodes_[loss.id()];
    if (root.value.size() != 1) {
        throw DimensionError("backward needs a scalar loss, got shape " + to_string(root.value.shape()));
    }
    const std::size_t flat = store_ ? store_->flat_size() : 0;
    if (!root.requires_grad) {
        if (flat > 0 || !store_) diag::warn("loss is not connected to any trainable parameter; gradient is zero");
        return GradVector(std::vector<double>(flat, 0.0));
    }

    for (std::size_t i = 0; i <= loss.id(); ++i) {
        Node& n = nodes_[i];
        if (n.requires_grad) {
            n.grad = Tensor(n.value.shape());
        } else {
            n.grad = Tensor();
        }
    }
    nodes_[loss.id()].grad.fill(1.0);

    std::vector<const Tensor*> in_values;
    std::vector<Tensor*> in_grads;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.backward) continue;
        in_values.clear();
        in_grads.clear();
        for (std::size_t id : n.inputs) {
            in_values.push_back(&nodes_[id].value);
            in_grads.push_back(nodes_[id].requires_grad ? &nodes_[id].grad : nullptr);
        }
        n.backward(n.value, n.grad, in_values, in_grads);
    }

    std::vector<double> out(flat, 0.0);
    for (const auto& [name, id] : param_ids_) {
        const Node& n = nodes_[id];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        const std::size_t offset = *store_->flat_offset(name);
        for (std::size_t j = 0; j < n.grad.size(); ++j) out[offset + j] += n.grad[j];
    }
    return GradVector(std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) shape_error("matmul", a, b);
    Tensor c({m, n});
    gemm_acc(a.data().data(), b.data().data(), c.data().data(), m, k, n);
    return c;
}

Var matmul(Var a, Var b) {
    require_same_tape(a, b);
    Tensor out = matmul(a.value(), b.value());
    return a.tape()->record(std::move(out), {a, b}, [](const Tensor&, const Tensor& g, auto in, auto grads) {
        const Tensor& A = *in[0];
        const Tensor& B = *in[1];
        const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
        if (grads[0]) gemm_nt_acc(g.data().data(), B.data().data(), grads[0]->data().data(), m, n, k);
        if (grads[1]) gemm_tn_acc(A.data().data(), g.data().data(), grads[1]->data().data(), k, m, n);
    });
}

Var transpose(Var a) {
    const Tensor& A = a.value();
    const std::size_t r = A.rows(), c = A.cols();
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(j, i) = A.at(i, j);
    return a.tape()->record(std::move(out), {a}, [r, c](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) grads[0]->at(i, j) += g.at(j, i);
    });
}

Var linear(Var x, Var weight, Var bias) {
    require_same_tape(x, weight);
    const Tensor& X = x.value();
    const Tensor& W = weight.value();
    const std::size_t m = X.rows(), in = X.cols(), out_dim = W.rows();
    if (W.cols() != in) shape_error("linear", X, W);
    const bool has_bias = bias.tape() != nullptr;
    if (has_bias && bias.value().size() != out_dim) shape_error("linear(bias)", W, bias.value());
    Tensor out({m, out_dim});
    gemm_nt_acc(X.data().data(), W.data().data(), out.data().data(), m, in, out_dim);
    if (has_bias) {
        const Tensor& B = bias.value();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < out_dim; ++j) out.at(i, j) += B[j];
    }
    std::vector<Var> inputs{x, weight};
    if (has_bias) inputs.push_back(bias);
    return x.tape()->record(std::move(out), inputs, [m, in, out_dim](const Tensor&, const Tensor& g, auto vals, auto grads) {
        const Tensor& Xv = *vals[0];
        const Tensor& Wv = *vals[1];
        if (grads[0]) gemm_acc(g.data().data(), Wv.data().data(), grads[0]->data().data(), m, out_dim, in);
        if (grads[1]) gemm_tn_acc(g.data().data(), Xv.data().data(), grads[1]->data().data(), out_dim, m, in);
        if (grads.size() > 2 && grads[2]) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < out_dim; ++j) (*grads[2])[j] += g.at(i, j);
        }
    });
}

Var add(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    if (A.shape() != B.shape()) shape_error("add", A, B);
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
    return a.tape()->record(std::move(out), {a, b}, [](const Tensor&, const Tensor& g, auto, auto grads) {
        for (Tensor* gi : grads) {
            if (!gi) continue;
            for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
        }
    });
}

Var add_row(Var x, Var row) {
    require_same_tape(x, row);
    const Tensor& X = x.value();
    const Tensor& R = row.value();
    const std::size_t r = X.rows(), c = X.cols();
    if (R.size() != c) shape_error("add_row", X, R);
    Tensor out = X;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) += R[j];
    return x.tape()->record(std::move(out), {x, row}, [r, c](const Tensor&, const Tensor& g, auto, auto grads) {
        if (grads[0])
            for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
        if (grads[1])
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) (*grads[1])[j] += g.at(i, j);
    });
}

Var scale(Var a, double s) {
    Tensor out = a.value();
    for (double& v : out.data()) v *= s;
    return a.tape()->record(std::move(out), {a}, [s](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += s * g[i];
    });
}

Var mul_const(Var a, const Tensor& factors) {
    const Tensor& A = a.value();
    if (A.size() != factors.size()) shape_error("mul_const", A, factors);
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
    return a.tape()->record(std::move(out), {a}, [factors](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += factors[i] * g[i];
    });
}

Var relu(Var a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return a.tape()->record(std::move(out), {a}, [](const Tensor& y, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (y[i] > 0.0) (*grads[0])[i] += g[i];
        }
    });
}

Var layer_norm(Var x, double eps) {
    const Tensor& X = x.value();
    const std::size_t r = X.rows(), c = X.cols();
    Tensor out(X.shape());
    std::vector<double> inv_std(r);
    for (std::size_t i = 0; i < r; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < c; ++j) mu += X.at(i, j);
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) var += (X.at(i, j) - mu) * (X.at(i, j) - mu);
        var /= static_cast<double>(c);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = (X.at(i, j) - mu) * inv_std[i];
    }
    return x.tape()->record(std::move(out), {x}, [r, c, inv_std](const Tensor& y, const Tensor& g, auto, auto grads) {
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t i = 0; i < r; ++i) {
            double mean_g = 0.0, mean_gy = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                mean_g += g.at(i, j);
                mean_gy += g.at(i, j) * y.at(i, j);
            }
            mean_g *= inv_c;
            mean_gy *= inv_c;
            for (std::size_t j = 0; j < c; ++j) {
                grads[0]->at(i, j) += inv_std[i] * (g.at(i, j) - mean_g - y.at(i, j) * mean_gy);
            }
        }
    });
}

Var affine_cols(Var x, Var gain, Var bias) {
    require_same_tape(x, gain);
    require_same_tape(x, bias);
    const Tensor& X = x.value();
    const std::size_t r = X.rows(), c = X.cols();
    if (gain.value().size() != c) shape_error("affine_cols(gain)", X, gain.value());
    if (bias.value().size() != c) shape_error("affine_cols(bias)", X, bias.value());
    Tensor out(X.shape());
    const Tensor& G = gain.value();
    const Tensor& B = bias.value();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = X.at(i, j) * G[j] + B[j];
    return x.tape()->record(std::move(out), {x, gain, bias}, [r, c](const Tensor&, const Tensor& g, auto vals, auto grads) {
        const Tensor& Xv = *vals[0];
        const Tensor& Gv = *vals[1];
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                const double gij = g.at(i, j);
                if (grads[0]) grads[0]->at(i, j) += gij * Gv[j];
                if (grads[1]) (*grads[1])[j] += gij * Xv.at(i, j);
                if (grads[2]) (*grads[2])[j] += gij;
            }
        }
    });
}

Var softmax_rows(Var x) {
    const Tensor& X = x.value();
    const std::size_t r = X.rows(), c = X.cols();
    Tensor out(X.shape());
    for (std::size_t i = 0; i < r; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, X.at(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            out.at(i, j) = std::exp(X.at(i, j) - mx);
            z += out.at(i, j);
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
    }
    return x.tape()->record(std::move(out), {x}, [r, c](const Tensor& y, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j) dot += g.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < c; ++j) grads[0]->at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
    });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
    const Tensor& X = x.value();
    const std::size_t r = X.rows(), c = X.cols();
    if (begin + count > c) {
        throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                             ") out of range for shape " + to_string(X.shape()));
    }
    Tensor out({r, count});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j) out.at(i, j) = X.at(i, begin + j);
    return x.tape()->record(std::move(out), {x}, [r, begin, count](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < count; ++j) grads[0]->at(i, begin + j) += g.at(i, j);
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw InvalidArgument("concat_cols of nothing");
    const std::size_t r = parts.front().value().rows();
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (Var p : parts) {
        require_same_tape(parts.front(), p);
        if (p.value().rows() != r) shape_error("concat_cols", parts.front().value(), p.value());
        widths.push_back(p.value().cols());
        total += widths.back();
    }
    Tensor out({r, total});
    std::size_t col = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Tensor& P = parts[k].value();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < widths[k]; ++j) out.at(i, col + j) = P.at(i, j);
        col += widths[k];
    }
    return parts.front().tape()->record(std::move(out), parts, [r, widths](const Tensor&, const Tensor& g, auto, auto grads) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
            if (grads[k]) {
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < widths[k]; ++j) grads[k]->at(i, j) += g.at(i, col + j);
            }
            col += widths[k];
        }
    });
}

Var concat_tokens(Var a, Var b) {
    require_same_tape(a, b);
    const Tensor A = as_matrix(a.value());
    const Tensor B = as_matrix(b.value());
    if (A.size() == 0) return b;
    if (B.size() == 0) return a;
    if (A.cols() != B.cols()) shape_error("concat_tokens", A, B);
    const std::size_t ra = A.rows(), rb = B.rows(), c = A.cols();
    std::vector<double> values(A.values());
    values.insert(values.end(), B.values().begin(), B.values().end());
    Tensor out({ra + rb, c}, std::move(values));
    const std::size_t split = ra * c;
    return a.tape()->record(std::move(out), {a, b}, [split](const Tensor&, const Tensor& g, auto, auto grads) {
        if (grads[0])
            for (std::size_t i = 0; i < split; ++i) (*grads[0])[i] += g[i];
        if (grads[1])
            for (std::size_t i = split; i < g.size(); ++i) (*grads[1])[i - split] += g[i];
    });
}

Var mean_pool(Var x) {
    const Tensor& X = x.value();
    const std::size_t r = X.rows(), c = X.cols();
    if (r == 0) throw DimensionError("mean_pool over zero tokens");
    Tensor out({1, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += X.at(i, j);
    for (double& v : out.data()) v /= static_cast<double>(r);
    return x.tape()->record(std::move(out), {x}, [r, c](const Tensor&, const Tensor& g, auto, auto grads) {
        const double inv = 1.0 / static_cast<double>(r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) grads[0]->at(i, j) += g[j] * inv;
    });
}

Var reshape(Var x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    return x.tape()->record(std::move(out), {x}, [](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
    });
}

Var sum(const std::vector<Var>& scalars) {
    if (scalars.empty()) throw InvalidArgument("sum of nothing");
    double s = 0.0;
    for (Var v : scalars) {
        if (v.value().size() != 1) throw DimensionError("sum expects scalars, got " + to_string(v.shape()));
        s += v.value()[0];
    }
    return scalars.front().tape()->record(Tensor({1}, {s}), scalars, [](const Tensor&, const Tensor& g, auto, auto grads) {
        for (Tensor* gi : grads) {
            if (gi) (*gi)[0] += g[0];
        }
    });
}

Var mean(const std::vector<Var>& scalars) { return scale(sum(scalars), 1.0 / static_cast<double>(scalars.size())); }

Var masked_softmax_cross_entropy(Var logits, std::size_t label, const MaskVector& mask) {
    const Tensor& Z = logits.value();
    const std::size_t n = Z.size();
    if (mask.size() != n) {
        throw DimensionError("mask length " + std::to_string(mask.size()) + " != logits " + to_string(Z.shape()));
    }
    if (label >= n) throw InvalidArgument("label " + std::to_string(label) + " out of range for " + std::to_string(n) + " logits");
    if (!mask.test(label)) {
        throw MaskedLabelError("label " + std::to_string(label) + " is masked out");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (mask.test(i)) mx = std::max(mx, Z[i]);
    }
    std::vector<double> prob(n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.test(i)) continue;
        prob[i] = std::exp(Z[i] - mx);
        z += prob[i];
    }
    for (double& p : prob) p /= z;
    const double loss = -(Z[label] - mx) + std::log(z);
    return logits.tape()->record(Tensor({1}, {loss}), {logits}, [prob, label](const Tensor&, const Tensor& g, auto, auto grads) {
        for (std::size_t i = 0; i < prob.size(); ++i) {
            (*grads[0])[i] += g[0] * (prob[i] - (i == label ? 1.0 : 0.0));
        }
    });
}

Var cross_entropy(Var logits, std::size_t label) {
    return masked_softmax_cross_entropy(logits, label, MaskVector::full(logits.value().size()));
}

}  // namespace gcl::ad
