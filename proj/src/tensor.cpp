#include "courtqg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "courtqg/kernels.hpp"

namespace courtqg {

namespace {

std::string shape_str(const std::vector<size_t>& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

size_t shape_product(const std::vector<size_t>& s) {
  size_t n = 1;
  for (size_t d : s) n *= d;
  return n;
}

NodePtr make_node(std::vector<size_t> shape, size_t n, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value.assign(n, 0.0);
  node->requires_grad = requires_grad;
  return node;
}

Tape* common_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.tape() != b.tape())
    throw DomainError(std::string(op) + ": operands belong to different tapes");
  return a.tape();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

}  // namespace

double Tensor::item() const {
  if (size() != 1)
    throw DimensionError("item(): tensor has " + std::to_string(size()) + " elements");
  return node_->value[0];
}

Tensor Tape::leaf(std::vector<size_t> shape, std::vector<double> data, bool requires_grad) {
  if (shape_product(shape) != data.size())
    throw DimensionError("leaf: shape " + shape_str(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node), this);
}

Tensor Tape::constant(std::vector<size_t> shape, std::vector<double> data) {
  return leaf(std::move(shape), std::move(data), false);
}

Tensor Tape::zeros(std::vector<size_t> shape) {
  size_t n = shape_product(shape);
  return leaf(std::move(shape), std::vector<double>(n, 0.0), false);
}

void Tape::record(std::function<void()> backward_fn) {
  records_.push_back(std::move(backward_fn));
}

void Tape::backward(const Tensor& scalar_loss) {
  if (backward_run_)
    throw DomainError("backward called twice on the same tape without reset()");
  if (scalar_loss.tape() != this)
    throw DomainError("backward: loss tensor does not belong to this tape");
  if (scalar_loss.size() != 1)
    throw DimensionError("backward: loss must be scalar, got shape " +
                         shape_str(scalar_loss.shape()));
  if (!scalar_loss.requires_grad())
    throw DomainError("backward: loss does not require gradients");
  scalar_loss.node()->ensure_grad();
  scalar_loss.node()->grad[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    ++backward_visits_;
    (*it)();
  }
  backward_run_ = true;
}

void Tape::reset() {
  records_.clear();
  backward_run_ = false;
  backward_visits_ = 0;
}

// ---- op helpers ------------------------------------------------------------

namespace {

// True when the record should propagate; allocates input grad buffers.
bool grad_ready(const NodePtr& out) { return out->has_grad(); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape* tape = common_tape(a, b, "matmul");
  if (!a.is_matrix())
    throw DimensionError("matmul: left operand must be 2-D, got " + shape_str(a.shape()));
  if (!b.is_matrix() && !b.is_vector())
    throw DimensionError("matmul: right operand must be 1-D or 2-D, got " +
                         shape_str(b.shape()));
  const size_t m = a.shape()[0];
  const size_t k = a.shape()[1];
  const size_t bk = b.shape()[0];
  const size_t n = b.is_matrix() ? b.shape()[1] : 1;
  if (k != bk)
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  std::vector<size_t> out_shape =
      b.is_matrix() ? std::vector<size_t>{m, n} : std::vector<size_t>{m};
  auto out = make_node(std::move(out_shape), m * n, a.requires_grad() || b.requires_grad());
  kernels::gemm(false, false, m, n, k, a.value().data(), b.value().data(),
                out->value.data(), false);
  if (out->requires_grad) {
    NodePtr an = a.node(), bn = b.node(), on = out;
    tape->record([an, bn, on, m, n, k] {
      if (!grad_ready(on)) return;
      const double* g = on->grad.data();
      if (an->requires_grad) {
        an->ensure_grad();
        // dA = g · Bᵀ
        kernels::gemm(false, true, m, k, n, g, bn->value.data(), an->grad.data(), true);
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        // dB = Aᵀ · g
        kernels::gemm(true, false, k, n, m, an->value.data(), g, bn->grad.data(), true);
      }
    });
  }
  return Tensor(out, tape);
}

namespace {

using BinKernel = void (*)(const double*, const double*, double*, size_t);

Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, BinKernel fwd,
                 const std::function<void(const NodePtr&, const NodePtr&, const NodePtr&)>& bwd) {
  Tape* tape = common_tape(a, b, name);
  check_same_shape(a, b, name);
  auto out = make_node(a.shape(), a.size(), a.requires_grad() || b.requires_grad());
  fwd(a.value().data(), b.value().data(), out->value.data(), a.size());
  if (out->requires_grad) {
    NodePtr an = a.node(), bn = b.node(), on = out;
    tape->record([an, bn, on, bwd] {
      if (!grad_ready(on)) return;
      bwd(an, bn, on);
    });
  }
  return Tensor(out, tape);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "add", kernels::vadd,
                   [](const NodePtr& an, const NodePtr& bn, const NodePtr& on) {
                     const size_t n = on->size();
                     if (an->requires_grad) {
                       an->ensure_grad();
                       kernels::axpy(1.0, on->grad.data(), an->grad.data(), n);
                     }
                     if (bn->requires_grad) {
                       bn->ensure_grad();
                       kernels::axpy(1.0, on->grad.data(), bn->grad.data(), n);
                     }
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "sub", kernels::vsub,
                   [](const NodePtr& an, const NodePtr& bn, const NodePtr& on) {
                     const size_t n = on->size();
                     if (an->requires_grad) {
                       an->ensure_grad();
                       kernels::axpy(1.0, on->grad.data(), an->grad.data(), n);
                     }
                     if (bn->requires_grad) {
                       bn->ensure_grad();
                       kernels::axpy(-1.0, on->grad.data(), bn->grad.data(), n);
                     }
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(a, b, "mul", kernels::vmul,
                   [](const NodePtr& an, const NodePtr& bn, const NodePtr& on) {
                     const size_t n = on->size();
                     if (an->requires_grad) {
                       an->ensure_grad();
                       for (size_t i = 0; i < n; ++i)
                         an->grad[i] += on->grad[i] * bn->value[i];
                     }
                     if (bn->requires_grad) {
                       bn->ensure_grad();
                       for (size_t i = 0; i < n; ++i)
                         bn->grad[i] += on->grad[i] * an->value[i];
                     }
                   });
}

Tensor sigmoid(const Tensor& x) {
  auto out = make_node(x.shape(), x.size(), x.requires_grad());
  kernels::map_sigmoid(x.value().data(), out->value.data(), x.size());
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      for (size_t i = 0; i < on->size(); ++i) {
        const double y = on->value[i];
        xn->grad[i] += on->grad[i] * y * (1.0 - y);
      }
    });
  }
  return Tensor(out, x.tape());
}

Tensor tanh(const Tensor& x) {
  auto out = make_node(x.shape(), x.size(), x.requires_grad());
  kernels::map_tanh(x.value().data(), out->value.data(), x.size());
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      for (size_t i = 0; i < on->size(); ++i) {
        const double y = on->value[i];
        xn->grad[i] += on->grad[i] * (1.0 - y * y);
      }
    });
  }
  return Tensor(out, x.tape());
}

Tensor log(const Tensor& x) {
  auto out = make_node(x.shape(), x.size(), x.requires_grad());
  for (size_t i = 0; i < x.size(); ++i) out->value[i] = std::log(x.value()[i]);
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      for (size_t i = 0; i < on->size(); ++i) xn->grad[i] += on->grad[i] / xn->value[i];
    });
  }
  return Tensor(out, x.tape());
}

Tensor softmax(const Tensor& x) {
  if (!x.is_vector())
    throw DimensionError("softmax: expected 1-D tensor, got " + shape_str(x.shape()));
  if (x.size() == 0) throw DomainError("softmax: empty input");
  auto out = make_node(x.shape(), x.size(), x.requires_grad());
  const double mx = *std::max_element(x.value().begin(), x.value().end());
  double total = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    out->value[i] = std::exp(x.value()[i] - mx);
    total += out->value[i];
  }
  for (size_t i = 0; i < x.size(); ++i) out->value[i] /= total;
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      double dot = 0.0;
      for (size_t i = 0; i < on->size(); ++i) dot += on->grad[i] * on->value[i];
      for (size_t i = 0; i < on->size(); ++i)
        xn->grad[i] += on->value[i] * (on->grad[i] - dot);
    });
  }
  return Tensor(out, x.tape());
}

Tensor concat(const std::vector<Tensor>& parts, size_t axis) {
  if (parts.empty()) throw DomainError("concat: empty tensor list");
  Tape* tape = parts[0].tape();
  bool needs_grad = false;
  for (const Tensor& t : parts) {
    if (t.tape() != tape) throw DomainError("concat: operands belong to different tapes");
    needs_grad = needs_grad || t.requires_grad();
  }
  const auto& s0 = parts[0].shape();

  if (parts[0].is_vector()) {
    if (axis != 0)
      throw DimensionError("concat: axis " + std::to_string(axis) + " invalid for 1-D tensors");
    size_t n = 0;
    for (const Tensor& t : parts) {
      if (!t.is_vector())
        throw DimensionError("concat: rank mismatch, " + shape_str(s0) + " vs " +
                             shape_str(t.shape()));
      n += t.size();
    }
    auto out = make_node({n}, n, needs_grad);
    size_t off = 0;
    for (const Tensor& t : parts) {
      std::copy(t.value().begin(), t.value().end(), out->value.begin() + off);
      off += t.size();
    }
    if (needs_grad) {
      std::vector<NodePtr> ins;
      for (const Tensor& t : parts) ins.push_back(t.node());
      NodePtr on = out;
      tape->record([ins, on] {
        if (!grad_ready(on)) return;
        size_t off = 0;
        for (const NodePtr& in : ins) {
          if (in->requires_grad) {
            in->ensure_grad();
            for (size_t i = 0; i < in->size(); ++i) in->grad[i] += on->grad[off + i];
          }
          off += in->size();
        }
      });
    }
    return Tensor(out, tape);
  }

  if (!parts[0].is_matrix() || axis > 1)
    throw DimensionError("concat: unsupported rank/axis for shape " + shape_str(s0));

  if (axis == 0) {
    const size_t cols = s0[1];
    size_t rows = 0;
    for (const Tensor& t : parts) {
      if (!t.is_matrix() || t.shape()[1] != cols)
        throw DimensionError("concat axis 0: incompatible shapes " + shape_str(s0) +
                             " vs " + shape_str(t.shape()));
      rows += t.shape()[0];
    }
    auto out = make_node({rows, cols}, rows * cols, needs_grad);
    size_t off = 0;
    for (const Tensor& t : parts) {
      std::copy(t.value().begin(), t.value().end(), out->value.begin() + off);
      off += t.size();
    }
    if (needs_grad) {
      std::vector<NodePtr> ins;
      for (const Tensor& t : parts) ins.push_back(t.node());
      NodePtr on = out;
      tape->record([ins, on] {
        if (!grad_ready(on)) return;
        size_t off = 0;
        for (const NodePtr& in : ins) {
          if (in->requires_grad) {
            in->ensure_grad();
            for (size_t i = 0; i < in->size(); ++i) in->grad[i] += on->grad[off + i];
          }
          off += in->size();
        }
      });
    }
    return Tensor(out, tape);
  }

  // axis == 1: glue column blocks row by row
  const size_t rows = s0[0];
  size_t cols = 0;
  for (const Tensor& t : parts) {
    if (!t.is_matrix() || t.shape()[0] != rows)
      throw DimensionError("concat axis 1: incompatible shapes " + shape_str(s0) + " vs " +
                           shape_str(t.shape()));
    cols += t.shape()[1];
  }
  auto out = make_node({rows, cols}, rows * cols, needs_grad);
  size_t col_off = 0;
  for (const Tensor& t : parts) {
    const size_t tc = t.shape()[1];
    for (size_t r = 0; r < rows; ++r)
      std::copy(t.value().begin() + r * tc, t.value().begin() + (r + 1) * tc,
                out->value.begin() + r * cols + col_off);
    col_off += tc;
  }
  if (needs_grad) {
    std::vector<NodePtr> ins;
    for (const Tensor& t : parts) ins.push_back(t.node());
    NodePtr on = out;
    tape->record([ins, on, rows, cols] {
      if (!grad_ready(on)) return;
      size_t col_off = 0;
      for (const NodePtr& in : ins) {
        const size_t tc = in->shape[1];
        if (in->requires_grad) {
          in->ensure_grad();
          for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < tc; ++c)
              in->grad[r * tc + c] += on->grad[r * cols + col_off + c];
        }
        col_off += tc;
      }
    });
  }
  return Tensor(out, tape);
}

Tensor slice(const Tensor& x, size_t start, size_t len) {
  if (!x.is_vector())
    throw DimensionError("slice: expected 1-D tensor, got " + shape_str(x.shape()));
  if (start + len > x.size())
    throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + len) + ") exceeds size " +
                         std::to_string(x.size()));
  auto out = make_node({len}, len, x.requires_grad());
  std::copy(x.value().begin() + start, x.value().begin() + start + len, out->value.begin());
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on, start, len] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      for (size_t i = 0; i < len; ++i) xn->grad[start + i] += on->grad[i];
    });
  }
  return Tensor(out, x.tape());
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw DomainError("stack_rows: empty tensor list");
  Tape* tape = rows[0].tape();
  const size_t d = rows[0].size();
  bool needs_grad = false;
  for (const Tensor& r : rows) {
    if (r.tape() != tape) throw DomainError("stack_rows: operands belong to different tapes");
    if (!r.is_vector() || r.size() != d)
      throw DimensionError("stack_rows: expected 1-D size " + std::to_string(d) + ", got " +
                           shape_str(r.shape()));
    needs_grad = needs_grad || r.requires_grad();
  }
  auto out = make_node({rows.size(), d}, rows.size() * d, needs_grad);
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].value().begin(), rows[i].value().end(), out->value.begin() + i * d);
  if (needs_grad) {
    std::vector<NodePtr> ins;
    for (const Tensor& r : rows) ins.push_back(r.node());
    NodePtr on = out;
    tape->record([ins, on, d] {
      if (!grad_ready(on)) return;
      for (size_t i = 0; i < ins.size(); ++i) {
        if (!ins[i]->requires_grad) continue;
        ins[i]->ensure_grad();
        for (size_t c = 0; c < d; ++c) ins[i]->grad[c] += on->grad[i * d + c];
      }
    });
  }
  return Tensor(out, tape);
}

Tensor transpose(const Tensor& m) {
  if (!m.is_matrix())
    throw DimensionError("transpose: expected 2-D tensor, got " + shape_str(m.shape()));
  const size_t r = m.shape()[0], c = m.shape()[1];
  auto out = make_node({c, r}, r * c, m.requires_grad());
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out->value[j * r + i] = m.value()[i * c + j];
  if (out->requires_grad) {
    NodePtr mn = m.node(), on = out;
    m.tape()->record([mn, on, r, c] {
      if (!grad_ready(on)) return;
      mn->ensure_grad();
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) mn->grad[i * c + j] += on->grad[j * r + i];
    });
  }
  return Tensor(out, m.tape());
}

Tensor scale(const Tensor& x, double c) {
  auto out = make_node(x.shape(), x.size(), x.requires_grad());
  for (size_t i = 0; i < x.size(); ++i) out->value[i] = c * x.value()[i];
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on, c] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      kernels::axpy(c, on->grad.data(), xn->grad.data(), on->size());
    });
  }
  return Tensor(out, x.tape());
}

Tensor scale_by(const Tensor& x, const Tensor& s) {
  Tape* tape = common_tape(x, s, "scale_by");
  if (s.size() != 1)
    throw DimensionError("scale_by: scaling factor must be 1-element, got " +
                         shape_str(s.shape()));
  auto out = make_node(x.shape(), x.size(), x.requires_grad() || s.requires_grad());
  const double sv = s.value()[0];
  for (size_t i = 0; i < x.size(); ++i) out->value[i] = sv * x.value()[i];
  if (out->requires_grad) {
    NodePtr xn = x.node(), sn = s.node(), on = out;
    tape->record([xn, sn, on] {
      if (!grad_ready(on)) return;
      if (xn->requires_grad) {
        xn->ensure_grad();
        kernels::axpy(sn->value[0], on->grad.data(), xn->grad.data(), on->size());
      }
      if (sn->requires_grad) {
        sn->ensure_grad();
        double acc = 0.0;
        for (size_t i = 0; i < on->size(); ++i) acc += on->grad[i] * xn->value[i];
        sn->grad[0] += acc;
      }
    });
  }
  return Tensor(out, tape);
}

Tensor add_row(const Tensor& m, const Tensor& r) {
  Tape* tape = common_tape(m, r, "add_row");
  if (!m.is_matrix() || !r.is_vector() || m.shape()[1] != r.size())
    throw DimensionError("add_row: incompatible shapes " + shape_str(m.shape()) + " and " +
                         shape_str(r.shape()));
  const size_t rows = m.shape()[0], cols = m.shape()[1];
  auto out = make_node(m.shape(), m.size(), m.requires_grad() || r.requires_grad());
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) out->value[i * cols + j] = m.value()[i * cols + j] + r.value()[j];
  if (out->requires_grad) {
    NodePtr mn = m.node(), rn = r.node(), on = out;
    tape->record([mn, rn, on, rows, cols] {
      if (!grad_ready(on)) return;
      if (mn->requires_grad) {
        mn->ensure_grad();
        kernels::axpy(1.0, on->grad.data(), mn->grad.data(), rows * cols);
      }
      if (rn->requires_grad) {
        rn->ensure_grad();
        for (size_t i = 0; i < rows; ++i)
          for (size_t j = 0; j < cols; ++j) rn->grad[j] += on->grad[i * cols + j];
      }
    });
  }
  return Tensor(out, tape);
}

Tensor gather(const Tensor& x, size_t index) {
  if (index >= x.size())
    throw DimensionError("gather: index " + std::to_string(index) + " out of range for size " +
                         std::to_string(x.size()));
  auto out = make_node({1}, 1, x.requires_grad());
  out->value[0] = x.value()[index];
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on, index] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      xn->grad[index] += on->grad[0];
    });
  }
  return Tensor(out, x.tape());
}

Tensor gather_row(const Tensor& m, size_t row) {
  if (!m.is_matrix())
    throw DimensionError("gather_row: expected 2-D tensor, got " + shape_str(m.shape()));
  const size_t rows = m.shape()[0], cols = m.shape()[1];
  if (row >= rows)
    throw DimensionError("gather_row: row " + std::to_string(row) + " out of range for " +
                         shape_str(m.shape()));
  auto out = make_node({cols}, cols, m.requires_grad());
  std::copy(m.value().begin() + row * cols, m.value().begin() + (row + 1) * cols,
            out->value.begin());
  if (out->requires_grad) {
    NodePtr mn = m.node(), on = out;
    m.tape()->record([mn, on, row, cols] {
      if (!grad_ready(on)) return;
      mn->ensure_grad();
      for (size_t j = 0; j < cols; ++j) mn->grad[row * cols + j] += on->grad[j];
    });
  }
  return Tensor(out, m.tape());
}

Tensor scatter_sum(const Tensor& v, const std::vector<int>& ids, size_t out_size) {
  if (!v.is_vector())
    throw DimensionError("scatter_sum: expected 1-D tensor, got " + shape_str(v.shape()));
  if (ids.size() != v.size())
    throw DimensionError("scatter_sum: " + std::to_string(ids.size()) + " ids for " +
                         std::to_string(v.size()) + " values");
  for (int id : ids)
    if (id < 0 || static_cast<size_t>(id) >= out_size)
      throw DimensionError("scatter_sum: id " + std::to_string(id) + " out of range for size " +
                           std::to_string(out_size));
  auto out = make_node({out_size}, out_size, v.requires_grad());
  for (size_t t = 0; t < ids.size(); ++t) out->value[ids[t]] += v.value()[t];
  if (out->requires_grad) {
    NodePtr vn = v.node(), on = out;
    v.tape()->record([vn, on, ids] {
      if (!grad_ready(on)) return;
      vn->ensure_grad();
      for (size_t t = 0; t < ids.size(); ++t) vn->grad[t] += on->grad[ids[t]];
    });
  }
  return Tensor(out, v.tape());
}

Tensor sum(const Tensor& x) {
  auto out = make_node({1}, 1, x.requires_grad());
  double acc = 0.0;
  for (double v : x.value()) acc += v;
  out->value[0] = acc;
  if (out->requires_grad) {
    NodePtr xn = x.node(), on = out;
    x.tape()->record([xn, on] {
      if (!grad_ready(on)) return;
      xn->ensure_grad();
      const double g = on->grad[0];
      for (size_t i = 0; i < xn->size(); ++i) xn->grad[i] += g;
    });
  }
  return Tensor(out, x.tape());
}

std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c,
                                    const LstmWeights& weights) {
  if (!x.is_vector() || !h.is_vector() || !c.is_vector())
    throw DimensionError("lstm_cell: x, h, c must be 1-D");
  const size_t d_h = h.size();
  if (c.size() != d_h)
    throw DimensionError("lstm_cell: h size " + std::to_string(d_h) + " vs c size " +
                         std::to_string(c.size()));
  if (!weights.w.is_matrix() || weights.w.shape()[0] != 4 * d_h ||
      weights.w.shape()[1] != x.size() + d_h)
    throw DimensionError("lstm_cell: weight shape " + shape_str(weights.w.shape()) +
                         " incompatible with d_in=" + std::to_string(x.size()) +
                         " d_h=" + std::to_string(d_h));
  if (weights.b.size() != 4 * d_h)
    throw DimensionError("lstm_cell: bias size " + std::to_string(weights.b.size()) +
                         " != " + std::to_string(4 * d_h));

  Tensor z = add(matmul(weights.w, concat({x, h})), weights.b);
  Tensor gate_in = sigmoid(slice(z, 0, d_h));
  Tensor gate_forget = sigmoid(slice(z, d_h, d_h));
  Tensor candidate = tanh(slice(z, 2 * d_h, d_h));
  Tensor gate_out = sigmoid(slice(z, 3 * d_h, d_h));
  Tensor c_next = add(mul(gate_forget, c), mul(gate_in, candidate));
  Tensor h_next = mul(gate_out, tanh(c_next));
  return {h_next, c_next};
}

// ---- parameters ------------------------------------------------------------

NodePtr ParamSet::add(const std::string& name, std::vector<size_t> shape, Rng& rng) {
  if (find(name)) throw ConfigError("duplicate parameter name: " + name);
  const size_t n = shape_product(shape);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value.resize(n);
  for (size_t i = 0; i < n; ++i) node->value[i] = rng.uniform(-0.08, 0.08);
  node->requires_grad = true;
  node->ensure_grad();
  params_.push_back({name, node});
  return node;
}

NodePtr ParamSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.node;
  return nullptr;
}

void ParamSet::zero_grads() {
  for (const auto& p : params_) {
    p.node->ensure_grad();
    p.node->zero_grad();
  }
}

size_t ParamSet::total_size() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.node->size();
  return n;
}

}  // namespace courtqg
