#ifndef COURTQG_TENSOR_HPP
#define COURTQG_TENSOR_HPP

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "courtqg/common.hpp"

namespace courtqg {

// Value + gradient storage. Nodes are shared between the tape that created
// them and any handles still alive; parameter nodes outlive every tape.
struct TensorNode {
  std::vector<size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on first backward touch
  bool requires_grad = false;

  size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  }
  bool has_grad() const { return grad.size() == value.size() && !value.empty(); }
};

using NodePtr = std::shared_ptr<TensorNode>;

class Tape;

// Lightweight handle: a node plus the tape it participates in.
class Tensor {
 public:
  Tensor() = default;
  Tensor(NodePtr node, Tape* tape) : node_(std::move(node)), tape_(tape) {}

  bool defined() const { return node_ != nullptr; }
  const std::vector<size_t>& shape() const { return node_->shape; }
  size_t size() const { return node_->value.size(); }
  size_t rows() const { return node_->shape.empty() ? 0 : node_->shape[0]; }
  size_t cols() const { return node_->shape.size() < 2 ? 1 : node_->shape[1]; }
  bool is_vector() const { return node_->shape.size() == 1; }
  bool is_matrix() const { return node_->shape.size() == 2; }
  const std::vector<double>& value() const { return node_->value; }
  const std::vector<double>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }

  // Scalar convenience for 1-element tensors.
  double item() const;

  const NodePtr& node() const { return node_; }
  Tape* tape() const { return tape_; }

 private:
  NodePtr node_;
  Tape* tape_ = nullptr;
};

// Define-by-run tape. Forward execution appends one record per operation;
// backward replays the records in exact reverse order, which is a reverse
// topological order because forward appended them in dependency order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(std::vector<size_t> shape, std::vector<double> data, bool requires_grad);
  Tensor constant(std::vector<size_t> shape, std::vector<double> data);
  Tensor zeros(std::vector<size_t> shape);
  // Wrap a persistent node (a model parameter) as a leaf on this tape.
  Tensor use(const NodePtr& node) { return Tensor(node, this); }

  // Append an operation record. The closure must accumulate (+=) into input
  // gradients. Public so composite layers and tests can register custom ops.
  void record(std::function<void()> backward_fn);

  // Seeds d(loss)/d(loss) = 1 and replays all records in reverse. Rejects a
  // second call until reset().
  void backward(const Tensor& scalar_loss);

  void reset();

  size_t num_recorded() const { return records_.size(); }
  // Number of record visits performed by backward() (instrumentation).
  size_t backward_visits() const { return backward_visits_; }
  bool backward_was_run() const { return backward_run_; }

 private:
  std::vector<std::function<void()>> records_;
  bool backward_run_ = false;
  size_t backward_visits_ = 0;
};

// ---- operations -----------------------------------------------------------
// All ops check shapes eagerly and throw DimensionError naming the offending
// shapes. There is no implicit broadcasting; the only scalar-tensor bridges
// are the explicitly named scale()/scale_by()/add_row() ops.

// (m×k)·(k×n) → m×n, or (m×k)·(k) → (m).
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor log(const Tensor& x);

// Numerically stable softmax over a 1-D tensor (max subtraction).
Tensor softmax(const Tensor& x);

// axis 0 for 1-D tensors; axis 0 (rows) or 1 (columns) for 2-D tensors.
Tensor concat(const std::vector<Tensor>& parts, size_t axis = 0);

// Contiguous 1-D slice [start, start+len).
Tensor slice(const Tensor& x, size_t start, size_t len);

// Stack T equal-length 1-D tensors into a T×d matrix.
Tensor stack_rows(const std::vector<Tensor>& rows);

Tensor transpose(const Tensor& m);

// out = c * x for a plain double c.
Tensor scale(const Tensor& x, double c);

// out = s[0] * x for a 1-element tensor s (explicit scalar broadcast).
Tensor scale_by(const Tensor& x, const Tensor& s);

// out[t,:] = m[t,:] + r (explicit row broadcast).
Tensor add_row(const Tensor& m, const Tensor& r);

// 1-element tensor out = x[index].
Tensor gather(const Tensor& x, size_t index);

// Row index of a matrix (embedding lookup); gradient touches only that row.
Tensor gather_row(const Tensor& m, size_t row);

// out[ids[t]] += v[t]; linear scatter used by the copy distribution.
Tensor scatter_sum(const Tensor& v, const std::vector<int>& ids, size_t out_size);

Tensor sum(const Tensor& x);

// Fused-gate LSTM cell. weights: (4·d_h)×(d_in+d_h); bias: 4·d_h.
// Gate layout along the fused axis: input, forget, candidate, output.
struct LstmWeights {
  Tensor w;
  Tensor b;
};
std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c,
                                    const LstmWeights& weights);

// ---- parameters -----------------------------------------------------------

struct Parameter {
  std::string name;
  NodePtr node;
};

// Named registry of learnable tensors. Initialization is uniform in
// [-0.08, 0.08], drawn deterministically from the supplied RNG in
// registration order.
class ParamSet {
 public:
  NodePtr add(const std::string& name, std::vector<size_t> shape, Rng& rng);
  const std::vector<Parameter>& all() const { return params_; }
  NodePtr find(const std::string& name) const;
  void zero_grads();
  size_t total_size() const;

 private:
  std::vector<Parameter> params_;
};

}  // namespace courtqg

#endif  // COURTQG_TENSOR_HPP
