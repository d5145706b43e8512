#include "svskit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace svskit::nn {

namespace {

VarPtr make_op(TensorData value, std::vector<VarPtr> parents,
               std::function<void(Variable&)> backward_fn, const char* name) {
    check_finite(value, name);
    auto node = std::make_shared<Variable>();
    node->value = std::move(value);
    node->parents = std::move(parents);
    for (const VarPtr& p : node->parents) node->requires_grad |= p->requires_grad;
    if (node->requires_grad) node->backward_fn = std::move(backward_fn);
    return node;
}

void require_same_shape(const VarPtr& a, const VarPtr& b, const char* who) {
    if (!same_shape(a->value, b->value)) {
        throw std::runtime_error(std::string(who) + ": shapes differ, " +
                                 shape_string(a->value.shape) + " vs " +
                                 shape_string(b->value.shape));
    }
}

} // namespace

void Variable::ensure_grad() {
    if (grad.data.size() != value.data.size()) {
        grad = TensorData(value.shape, 0.0);
    }
}

VarPtr make_leaf(TensorData value, bool requires_grad) {
    check_finite(value, "leaf");
    auto node = std::make_shared<Variable>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    return node;
}

VarPtr make_const(TensorData value) { return make_leaf(std::move(value), false); }

void backward(const VarPtr& root) {
    if (!root) throw std::runtime_error("backward: null root");
    if (root->numel() != 1) {
        throw std::runtime_error("backward requires a scalar root, got shape " +
                                 shape_string(root->value.shape));
    }
    // Iterative post-order DFS for a topological ordering.
    std::vector<Variable*> order;
    std::unordered_set<Variable*> visited;
    std::vector<std::pair<VarPtr, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root.get());
    std::vector<VarPtr> keep_alive{root};
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            VarPtr child = node->parents[next_child++];
            if (child->requires_grad && visited.insert(child.get()).second) {
                keep_alive.push_back(child);
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node.get());
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Variable* node = *it;
        if (node->requires_grad && node->backward_fn) node->backward_fn(*node);
    }
}

VarPtr add(const VarPtr& a, const VarPtr& b) {
    require_same_shape(a, b, "add");
    TensorData out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b->value[i];
    return make_op(std::move(out), {a, b}, [](Variable& node) {
        for (int side = 0; side < 2; ++side) {
            Variable& p = *node.parents[static_cast<std::size_t>(side)];
            if (!p.requires_grad) continue;
            p.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) p.grad[i] += node.grad[i];
        }
    }, "add");
}

VarPtr sub(const VarPtr& a, const VarPtr& b) {
    require_same_shape(a, b, "sub");
    TensorData out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b->value[i];
    return make_op(std::move(out), {a, b}, [](Variable& node) {
        Variable& pa = *node.parents[0];
        Variable& pb = *node.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) pa.grad[i] += node.grad[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) pb.grad[i] -= node.grad[i];
        }
    }, "sub");
}

VarPtr mul(const VarPtr& a, const VarPtr& b) {
    require_same_shape(a, b, "mul");
    TensorData out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
    return make_op(std::move(out), {a, b}, [](Variable& node) {
        Variable& pa = *node.parents[0];
        Variable& pb = *node.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) {
                pa.grad[i] += node.grad[i] * pb.value[i];
            }
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) {
                pb.grad[i] += node.grad[i] * pa.value[i];
            }
        }
    }, "mul");
}

VarPtr div(const VarPtr& a, const VarPtr& b) {
    require_same_shape(a, b, "div");
    TensorData out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] /= b->value[i];
    return make_op(std::move(out), {a, b}, [](Variable& node) {
        Variable& pa = *node.parents[0];
        Variable& pb = *node.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) {
                pa.grad[i] += node.grad[i] / pb.value[i];
            }
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) {
                pb.grad[i] -= node.grad[i] * pa.value[i] / (pb.value[i] * pb.value[i]);
            }
        }
    }, "div");
}

VarPtr affine(const VarPtr& x, double scale, double shift) {
    TensorData out = x->value;
    for (double& v : out.data) v = scale * v + shift;
    return make_op(std::move(out), {x}, [scale](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) p.grad[i] += scale * node.grad[i];
    }, "affine");
}

VarPtr tanh(const VarPtr& x) {
    TensorData out = x->value;
    for (double& v : out.data) v = std::tanh(v);
    return make_op(std::move(out), {x}, [](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) {
            double y = node.value[i];
            p.grad[i] += node.grad[i] * (1.0 - y * y);
        }
    }, "tanh");
}

VarPtr abs(const VarPtr& x) {
    TensorData out = x->value;
    for (double& v : out.data) v = std::abs(v);
    return make_op(std::move(out), {x}, [](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) {
            double xv = p.value[i];
            double sign = xv > 0.0 ? 1.0 : (xv < 0.0 ? -1.0 : 0.0);
            p.grad[i] += node.grad[i] * sign;
        }
    }, "abs");
}

VarPtr max_with(const VarPtr& x, double floor) {
    TensorData out = x->value;
    for (double& v : out.data) v = std::max(v, floor);
    return make_op(std::move(out), {x}, [floor](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) {
            if (p.value[i] > floor) p.grad[i] += node.grad[i];
        }
    }, "max_with");
}

VarPtr reshape(const VarPtr& x, std::vector<std::size_t> shape) {
    if (shape_numel(shape) != x->numel()) {
        throw std::runtime_error("reshape: element count mismatch " +
                                 shape_string(x->value.shape) + " -> " + shape_string(shape));
    }
    TensorData out;
    out.shape = std::move(shape);
    out.data = x->value.data;
    return make_op(std::move(out), {x}, [](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) p.grad[i] += node.grad[i];
    }, "reshape");
}

VarPtr add_rowvec(const VarPtr& x, const VarPtr& v) {
    if (x->value.rank() != 2 || v->value.rank() != 1 || v->numel() != x->value.cols()) {
        throw std::runtime_error("add_rowvec: need [N,C] and [C], got " +
                                 shape_string(x->value.shape) + " and " +
                                 shape_string(v->value.shape));
    }
    const std::size_t n = x->value.rows(), c = x->value.cols();
    TensorData out = x->value;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) out(r, j) += v->value[j];
    }
    return make_op(std::move(out), {x, v}, [n, c](Variable& node) {
        Variable& px = *node.parents[0];
        Variable& pv = *node.parents[1];
        if (px.requires_grad) {
            px.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) px.grad[i] += node.grad[i];
        }
        if (pv.requires_grad) {
            pv.ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) pv.grad[j] += node.grad(r, j);
            }
        }
    }, "add_rowvec");
}

VarPtr mul_rowvec(const VarPtr& x, const VarPtr& v) {
    if (x->value.rank() != 2 || v->value.rank() != 1 || v->numel() != x->value.cols()) {
        throw std::runtime_error("mul_rowvec: need [N,C] and [C], got " +
                                 shape_string(x->value.shape) + " and " +
                                 shape_string(v->value.shape));
    }
    const std::size_t n = x->value.rows(), c = x->value.cols();
    TensorData out = x->value;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) out(r, j) *= v->value[j];
    }
    return make_op(std::move(out), {x, v}, [n, c](Variable& node) {
        Variable& px = *node.parents[0];
        Variable& pv = *node.parents[1];
        if (px.requires_grad) {
            px.ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) px.grad(r, j) += node.grad(r, j) * pv.value[j];
            }
        }
        if (pv.requires_grad) {
            pv.ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) pv.grad[j] += node.grad(r, j) * px.value(r, j);
            }
        }
    }, "mul_rowvec");
}

VarPtr broadcast_sub(const VarPtr& x, const VarPtr& s) {
    if (s->numel() != 1) throw std::runtime_error("broadcast_sub: s must be scalar");
    TensorData out = x->value;
    const double sv = s->value[0];
    for (double& v : out.data) v -= sv;
    return make_op(std::move(out), {x, s}, [](Variable& node) {
        Variable& px = *node.parents[0];
        Variable& ps = *node.parents[1];
        if (px.requires_grad) {
            px.ensure_grad();
            for (std::size_t i = 0; i < node.grad.numel(); ++i) px.grad[i] += node.grad[i];
        }
        if (ps.requires_grad) {
            ps.ensure_grad();
            double acc = 0.0;
            for (std::size_t i = 0; i < node.grad.numel(); ++i) acc += node.grad[i];
            ps.grad[0] -= acc;
        }
    }, "broadcast_sub");
}

VarPtr repeat_rows(const VarPtr& x, const std::vector<std::size_t>& counts) {
    if (x->value.rank() != 2 || counts.size() != x->value.rows()) {
        throw std::runtime_error("repeat_rows: need [R,C] with one count per row");
    }
    const std::size_t c = x->value.cols();
    std::size_t total = 0;
    for (std::size_t k : counts) total += k;
    if (total == 0) throw std::runtime_error("repeat_rows: zero total rows");
    TensorData out = TensorData::matrix(total, c);
    std::size_t row = 0;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        for (std::size_t k = 0; k < counts[r]; ++k, ++row) {
            for (std::size_t j = 0; j < c; ++j) out(row, j) = x->value(r, j);
        }
    }
    auto counts_copy = counts;
    return make_op(std::move(out), {x}, [counts_copy, c](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        std::size_t row = 0;
        for (std::size_t r = 0; r < counts_copy.size(); ++r) {
            for (std::size_t k = 0; k < counts_copy[r]; ++k, ++row) {
                for (std::size_t j = 0; j < c; ++j) p.grad(r, j) += node.grad(row, j);
            }
        }
    }, "repeat_rows");
}

VarPtr sum(const VarPtr& x) {
    TensorData out = TensorData::vector(1);
    double acc = 0.0;
    for (double v : x->value.data) acc += v;
    out[0] = acc;
    return make_op(std::move(out), {x}, [](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += node.grad[0];
    }, "sum");
}

VarPtr mean(const VarPtr& x) {
    if (x->numel() == 0) throw std::runtime_error("mean of empty tensor");
    TensorData out = TensorData::vector(1);
    double acc = 0.0;
    for (double v : x->value.data) acc += v;
    out[0] = acc / static_cast<double>(x->numel());
    return make_op(std::move(out), {x}, [](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        const double g = node.grad[0] / static_cast<double>(p.grad.numel());
        for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += g;
    }, "mean");
}

VarPtr matmul(const VarPtr& x, const VarPtr& w) {
    if (x->value.rank() != 2 || w->value.rank() != 2 || x->value.cols() != w->value.rows()) {
        throw std::runtime_error("matmul: incompatible shapes " + shape_string(x->value.shape) +
                                 " x " + shape_string(w->value.shape));
    }
    const std::size_t n = x->value.rows(), k = x->value.cols(), m = w->value.cols();
    TensorData out = TensorData::matrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x->value.data.data() + i * k;
        double* oi = out.data.data() + i * m;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double xv = xi[kk];
            if (xv == 0.0) continue;
            const double* wk = w->value.data.data() + kk * m;
            for (std::size_t j = 0; j < m; ++j) oi[j] += xv * wk[j];
        }
    }
    return make_op(std::move(out), {x, w}, [n, k, m](Variable& node) {
        Variable& px = *node.parents[0];
        Variable& pw = *node.parents[1];
        if (px.requires_grad) {
            px.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                const double* gi = node.grad.data.data() + i * m;
                double* dxi = px.grad.data.data() + i * k;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const double* wk = pw.value.data.data() + kk * m;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j) acc += gi[j] * wk[j];
                    dxi[kk] += acc;
                }
            }
        }
        if (pw.requires_grad) {
            pw.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                const double* xi = px.value.data.data() + i * k;
                const double* gi = node.grad.data.data() + i * m;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const double xv = xi[kk];
                    if (xv == 0.0) continue;
                    double* dwk = pw.grad.data.data() + kk * m;
                    for (std::size_t j = 0; j < m; ++j) dwk[j] += xv * gi[j];
                }
            }
        }
    }, "matmul");
}

VarPtr conv1d(const VarPtr& x, const VarPtr& w, const VarPtr& b) {
    if (x->value.rank() != 2 || w->value.rank() != 3 || b->value.rank() != 1) {
        throw std::runtime_error("conv1d: need x [N,Cin], w [Cout,Cin,K], b [Cout]");
    }
    const std::size_t n = x->value.shape[0], cin = x->value.shape[1];
    const std::size_t cout = w->value.shape[0], k = w->value.shape[2];
    if (w->value.shape[1] != cin || b->numel() != cout || k % 2 == 0) {
        throw std::runtime_error("conv1d: mismatched channels or even kernel");
    }
    const std::size_t pad = k / 2;
    TensorData out = TensorData::matrix(n, cout);
    for (std::size_t t = 0; t < n; ++t) {
        double* ot = out.data.data() + t * cout;
        for (std::size_t co = 0; co < cout; ++co) ot[co] = b->value[co];
        for (std::size_t kk = 0; kk < k; ++kk) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + kk) - static_cast<std::ptrdiff_t>(pad);
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
            const double* xs = x->value.data.data() + static_cast<std::size_t>(src) * cin;
            for (std::size_t co = 0; co < cout; ++co) {
                const double* wrow = w->value.data.data() + (co * cin + 0) * k + kk;
                double acc = 0.0;
                for (std::size_t ci = 0; ci < cin; ++ci) acc += xs[ci] * wrow[ci * k];
                ot[co] += acc;
            }
        }
    }
    return make_op(std::move(out), {x, w, b}, [n, cin, cout, k, pad](Variable& node) {
        Variable& px = *node.parents[0];
        Variable& pw = *node.parents[1];
        Variable& pb = *node.parents[2];
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t t = 0; t < n; ++t) {
                const double* gt = node.grad.data.data() + t * cout;
                for (std::size_t co = 0; co < cout; ++co) pb.grad[co] += gt[co];
            }
        }
        const bool need_x = px.requires_grad;
        const bool need_w = pw.requires_grad;
        if (need_x) px.ensure_grad();
        if (need_w) pw.ensure_grad();
        if (!need_x && !need_w) return;
        for (std::size_t t = 0; t < n; ++t) {
            const double* gt = node.grad.data.data() + t * cout;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + kk) - static_cast<std::ptrdiff_t>(pad);
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
                const std::size_t s = static_cast<std::size_t>(src);
                const double* xs = px.value.data.data() + s * cin;
                double* dxs = need_x ? px.grad.data.data() + s * cin : nullptr;
                for (std::size_t co = 0; co < cout; ++co) {
                    const double g = gt[co];
                    if (g == 0.0) continue;
                    const double* wrow = pw.value.data.data() + (co * cin) * k + kk;
                    if (need_x) {
                        for (std::size_t ci = 0; ci < cin; ++ci) dxs[ci] += g * wrow[ci * k];
                    }
                    if (need_w) {
                        double* dwrow = pw.grad.data.data() + (co * cin) * k + kk;
                        for (std::size_t ci = 0; ci < cin; ++ci) dwrow[ci * k] += g * xs[ci];
                    }
                }
            }
        }
    }, "conv1d");
}

VarPtr conv2d(const VarPtr& x, const VarPtr& w, const VarPtr& b) {
    if (x->value.rank() != 3 || w->value.rank() != 4 || b->value.rank() != 1) {
        throw std::runtime_error("conv2d: need x [Cin,H,W], w [Cout,Cin,Kh,Kw], b [Cout]");
    }
    const std::size_t cin = x->value.shape[0], h = x->value.shape[1], wd = x->value.shape[2];
    const std::size_t cout = w->value.shape[0], kh = w->value.shape[2], kw = w->value.shape[3];
    if (w->value.shape[1] != cin || b->numel() != cout || kh % 2 == 0 || kw % 2 == 0) {
        throw std::runtime_error("conv2d: mismatched channels or even kernel");
    }
    const std::size_t ph = kh / 2, pw_ = kw / 2;
    TensorData out(std::vector<std::size_t>{cout, h, wd});
    for (std::size_t co = 0; co < cout; ++co) {
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < wd; ++j) {
                double acc = b->value[co];
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    for (std::size_t a = 0; a < kh; ++a) {
                        const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + a) - static_cast<std::ptrdiff_t>(ph);
                        if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t c2 = 0; c2 < kw; ++c2) {
                            const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j + c2) - static_cast<std::ptrdiff_t>(pw_);
                            if (sj < 0 || sj >= static_cast<std::ptrdiff_t>(wd)) continue;
                            acc += x->value.data[(ci * h + static_cast<std::size_t>(si)) * wd + static_cast<std::size_t>(sj)] *
                                   w->value.data[((co * cin + ci) * kh + a) * kw + c2];
                        }
                    }
                }
                out.data[(co * h + i) * wd + j] = acc;
            }
        }
    }
    return make_op(std::move(out), {x, w, b}, [cin, h, wd, cout, kh, kw, ph, pw_](Variable& node) {
        Variable& px = *node.parents[0];
        Variable& pwv = *node.parents[1];
        Variable& pb = *node.parents[2];
        const bool need_x = px.requires_grad;
        const bool need_w = pwv.requires_grad;
        if (need_x) px.ensure_grad();
        if (need_w) pwv.ensure_grad();
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t co = 0; co < cout; ++co) {
                double acc = 0.0;
                for (std::size_t i = 0; i < h * wd; ++i) acc += node.grad.data[co * h * wd + i];
                pb.grad[co] += acc;
            }
        }
        if (!need_x && !need_w) return;
        for (std::size_t co = 0; co < cout; ++co) {
            for (std::size_t i = 0; i < h; ++i) {
                for (std::size_t j = 0; j < wd; ++j) {
                    const double g = node.grad.data[(co * h + i) * wd + j];
                    if (g == 0.0) continue;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        for (std::size_t a = 0; a < kh; ++a) {
                            const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + a) - static_cast<std::ptrdiff_t>(ph);
                            if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t c2 = 0; c2 < kw; ++c2) {
                                const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j + c2) - static_cast<std::ptrdiff_t>(pw_);
                                if (sj < 0 || sj >= static_cast<std::ptrdiff_t>(wd)) continue;
                                const std::size_t xi = (ci * h + static_cast<std::size_t>(si)) * wd + static_cast<std::size_t>(sj);
                                const std::size_t wi = ((co * cin + ci) * kh + a) * kw + c2;
                                if (need_x) px.grad.data[xi] += g * pwv.value.data[wi];
                                if (need_w) pwv.grad.data[wi] += g * px.value.data[xi];
                            }
                        }
                    }
                }
            }
        }
    }, "conv2d");
}

VarPtr avg_pool2d(const VarPtr& x) {
    if (x->value.rank() != 3) throw std::runtime_error("avg_pool2d: need [C,H,W]");
    const std::size_t c = x->value.shape[0], h = x->value.shape[1], w = x->value.shape[2];
    const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
    TensorData out(std::vector<std::size_t>{c, oh, ow});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                double acc = 0.0;
                int count = 0;
                for (std::size_t a = 0; a < 2; ++a) {
                    for (std::size_t bcol = 0; bcol < 2; ++bcol) {
                        const std::size_t si = 2 * i + a, sj = 2 * j + bcol;
                        if (si < h && sj < w) {
                            acc += x->value.data[(ch * h + si) * w + sj];
                            ++count;
                        }
                    }
                }
                out.data[(ch * oh + i) * ow + j] = acc / static_cast<double>(count);
            }
        }
    }
    return make_op(std::move(out), {x}, [c, h, w, oh, ow](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t i = 0; i < oh; ++i) {
                for (std::size_t j = 0; j < ow; ++j) {
                    int count = 0;
                    for (std::size_t a = 0; a < 2; ++a) {
                        for (std::size_t bcol = 0; bcol < 2; ++bcol) {
                            if (2 * i + a < h && 2 * j + bcol < w) ++count;
                        }
                    }
                    const double g = node.grad.data[(ch * oh + i) * ow + j] / static_cast<double>(count);
                    for (std::size_t a = 0; a < 2; ++a) {
                        for (std::size_t bcol = 0; bcol < 2; ++bcol) {
                            const std::size_t si = 2 * i + a, sj = 2 * j + bcol;
                            if (si < h && sj < w) p.grad.data[(ch * h + si) * w + sj] += g;
                        }
                    }
                }
            }
        }
    }, "avg_pool2d");
}

VarPtr global_avg_pool2d(const VarPtr& x) {
    if (x->value.rank() != 3) throw std::runtime_error("global_avg_pool2d: need [C,H,W]");
    const std::size_t c = x->value.shape[0], hw = x->value.shape[1] * x->value.shape[2];
    TensorData out = TensorData::vector(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) acc += x->value.data[ch * hw + i];
        out[ch] = acc / static_cast<double>(hw);
    }
    return make_op(std::move(out), {x}, [c, hw](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double g = node.grad[ch] / static_cast<double>(hw);
            for (std::size_t i = 0; i < hw; ++i) p.grad.data[ch * hw + i] += g;
        }
    }, "global_avg_pool2d");
}

VarPtr softmax_rows(const VarPtr& x, double temperature) {
    if (x->value.rank() != 2) throw std::runtime_error("softmax_rows: need [N,C]");
    if (!(temperature > 0.0)) throw std::runtime_error("softmax_rows: temperature must be positive");
    const std::size_t n = x->value.rows(), c = x->value.cols();
    TensorData out = TensorData::matrix(n, c);
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = x->value.data.data() + r * c;
        double* orow = out.data.data() + r * c;
        double mx = xr[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, xr[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            orow[j] = std::exp((xr[j] - mx) / temperature);
            z += orow[j];
        }
        for (std::size_t j = 0; j < c; ++j) orow[j] /= z;
    }
    return make_op(std::move(out), {x}, [n, c, temperature](Variable& node) {
        Variable& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (std::size_t r = 0; r < n; ++r) {
            const double* prow = node.value.data.data() + r * c;
            const double* grow = node.grad.data.data() + r * c;
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j) dot += grow[j] * prow[j];
            double* dxr = p.grad.data.data() + r * c;
            for (std::size_t j = 0; j < c; ++j) {
                dxr[j] += prow[j] * (grow[j] - dot) / temperature;
            }
        }
    }, "softmax_rows");
}

namespace {

GradCheckReport run_grad_check(const ScalarFn& f, const TensorData& x0,
                               const std::vector<std::size_t>& probes, double eps) {
    VarPtr leaf = make_leaf(x0, true);
    VarPtr y = f(leaf);
    if (y->numel() != 1) throw std::runtime_error("grad_check: f must return a scalar");
    backward(y);
    leaf->ensure_grad();

    GradCheckReport report;
    report.components = probes.size();
    for (std::size_t i : probes) {
        TensorData xp = x0, xm = x0;
        xp.data[i] += eps;
        xm.data[i] -= eps;
        const double yp = f(make_leaf(xp, false))->value[0];
        const double ym = f(make_leaf(xm, false))->value[0];
        const double numeric = (yp - ym) / (2.0 * eps);
        const double analytic = leaf->grad.data[i];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
        report.max_rel_err = std::max(report.max_rel_err, std::abs(analytic - numeric) / denom);
    }
    return report;
}

} // namespace

GradCheckReport grad_check(const ScalarFn& f, const TensorData& x0, double eps) {
    std::vector<std::size_t> probes(x0.numel());
    for (std::size_t i = 0; i < probes.size(); ++i) probes[i] = i;
    return run_grad_check(f, x0, probes, eps);
}

GradCheckReport grad_check_sampled(const ScalarFn& f, const TensorData& x0,
                                   std::size_t n_probes, Rng& rng, double eps) {
    std::vector<std::size_t> probes;
    const std::size_t n = x0.numel();
    if (n_probes >= n) {
        probes.resize(n);
        for (std::size_t i = 0; i < n; ++i) probes[i] = i;
    } else {
        std::unordered_set<std::size_t> seen;
        while (probes.size() < n_probes) {
            std::size_t i = static_cast<std::size_t>(rng.next_u64() % n);
            if (seen.insert(i).second) probes.push_back(i);
        }
    }
    return run_grad_check(f, x0, probes, eps);
}

} // namespace svskit::nn
