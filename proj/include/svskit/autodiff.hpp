#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "svskit/rng.hpp"
#include "svskit/tensor.hpp"

namespace svskit::nn {

/// Node in a define-by-run reverse-mode differentiation graph. Ops build
/// fresh nodes eagerly; backward() walks the recorded graph once. Every op
/// validates shapes and raises on non-finite outputs.
class Variable;
using VarPtr = std::shared_ptr<Variable>;

class Variable {
public:
    TensorData value;
    TensorData grad;
    bool requires_grad = false;
    std::vector<VarPtr> parents;
    std::function<void(Variable&)> backward_fn;

    const std::vector<std::size_t>& shape() const { return value.shape; }
    std::size_t numel() const { return value.numel(); }
    void ensure_grad();
};

VarPtr make_leaf(TensorData value, bool requires_grad);
VarPtr make_const(TensorData value);

/// Accumulates d(root)/d(leaf) into the .grad of every reachable node that
/// requires gradients. root must be scalar (one element).
void backward(const VarPtr& root);

// ---- elementwise ----
VarPtr add(const VarPtr& a, const VarPtr& b);
VarPtr sub(const VarPtr& a, const VarPtr& b);
VarPtr mul(const VarPtr& a, const VarPtr& b);
VarPtr div(const VarPtr& a, const VarPtr& b);
VarPtr affine(const VarPtr& x, double scale, double shift);
VarPtr tanh(const VarPtr& x);
VarPtr abs(const VarPtr& x);
/// max(x, floor) elementwise; gradient flows only where x > floor.
VarPtr max_with(const VarPtr& x, double floor);

// ---- shape / broadcast ----
VarPtr reshape(const VarPtr& x, std::vector<std::size_t> shape);
/// x [N, C] plus a length-C vector added to every row.
VarPtr add_rowvec(const VarPtr& x, const VarPtr& v);
/// x minus a broadcast scalar (s has one element).
VarPtr broadcast_sub(const VarPtr& x, const VarPtr& s);
/// Repeats row r of x [R, C] counts[r] times; total rows = sum(counts).
VarPtr repeat_rows(const VarPtr& x, const std::vector<std::size_t>& counts);

// ---- reductions ----
VarPtr sum(const VarPtr& x);
VarPtr mean(const VarPtr& x);

// ---- linear algebra / networks ----
VarPtr matmul(const VarPtr& x, const VarPtr& w);  // [N,K] x [K,M] -> [N,M]
/// 1-D convolution over rows: x [N, Cin], w [Cout, Cin, K] (K odd,
/// zero-padded same length), b [Cout]; output [N, Cout].
VarPtr conv1d(const VarPtr& x, const VarPtr& w, const VarPtr& b);
/// 2-D convolution: x [Cin, H, W], w [Cout, Cin, Kh, Kw] (odd kernels,
/// zero-padded), b [Cout]; output [Cout, H, W].
VarPtr conv2d(const VarPtr& x, const VarPtr& w, const VarPtr& b);
/// 2x2 average pooling, stride 2, ceil mode; edge cells average over the
/// valid elements only. x [C, H, W] -> [C, ceil(H/2), ceil(W/2)].
VarPtr avg_pool2d(const VarPtr& x);
/// Global average over H and W: [C, H, W] -> [C].
VarPtr global_avg_pool2d(const VarPtr& x);
/// Row-wise softmax of x / temperature; x [N, C].
VarPtr softmax_rows(const VarPtr& x, double temperature);

/// Numerical gradient verification. Builds f on a leaf at x0, backpropagates,
/// and compares against central finite differences with step eps. Relative
/// error uses max(|analytic|, |numeric|, 1e-4) as the denominator.
struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t components = 0;
};
using ScalarFn = std::function<VarPtr(const VarPtr&)>;
GradCheckReport grad_check(const ScalarFn& f, const TensorData& x0, double eps = 1e-5);
/// Same, probing only n_probes randomly chosen components (for costly fns).
GradCheckReport grad_check_sampled(const ScalarFn& f, const TensorData& x0,
                                   std::size_t n_probes, Rng& rng, double eps = 1e-5);

} // namespace svskit::nn
