#include "sbg/autodiff.hpp"

#include <cmath>
#include <utility>

namespace sbg::ad {

namespace {

[[noreturn]] void shape_error(const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, what);
}

// C += A * B; A [r x k], B [k x c]. The j loop streams along contiguous
// rows of B and C, so it vectorizes without any reduction chain.
void gemm_acc(const double* a, const double* b, double* c, std::size_t r, std::size_t k,
              std::size_t cols) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * cols;
    for (std::size_t p = 0; p < k; ++p) {
      double av = arow[p];
      const double* brow = b + p * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * brow[j];
    }
  }
}

// C += A^T * B; A [k x r], B [k x c]
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t r, std::size_t k,
                 std::size_t cols) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * r;
    const double* brow = b + p * cols;
    for (std::size_t i = 0; i < r; ++i) {
      double av = arow[i];
      double* crow = c + i * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

// gradient buffers appear only when backward() runs; forward-only tapes
// never pay for them
NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

// Weight matrices are multiplied as W^T against whole batches at every
// timestep; one cached transpose turns those products into streaming
// gemm_acc calls. Node values are immutable once pushed, so the cache
// never goes stale.
const Tensor& Tape::transposed(NodeId id) {
  auto it = transpose_cache_.find(id);
  if (it != transpose_cache_.end()) return it->second;
  const Tensor& src = node(id).val;
  Tensor t(src.cols, src.rows);
  for (std::size_t i = 0; i < src.rows; ++i) {
    for (std::size_t j = 0; j < src.cols; ++j) t.at(j, i) = src.at(i, j);
  }
  return transpose_cache_.emplace(id, std::move(t)).first->second;
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id >= nodes_.size()) throw Error(ErrorCode::kGraphError, "node id not on tape");
  return nodes_[id];
}

Tape::Node& Tape::node(NodeId id) {
  if (id >= nodes_.size()) throw Error(ErrorCode::kGraphError, "node id not on tape");
  return nodes_[id];
}

double Tape::scalar_value(NodeId id) const {
  const Tensor& t = value(id);
  if (t.size() != 1) throw Error(ErrorCode::kGraphError, "node is not scalar");
  return t.v[0];
}

NodeId Tape::input(Tensor value) {
  Node n;
  n.op = Op::kLeaf;
  n.val = std::move(value);
  return push(std::move(n));
}

NodeId Tape::param(const Tensor& value) { return input(value); }

NodeId Tape::linear(NodeId x, NodeId w, NodeId b) {
  const Tensor& xv = node(x).val;
  const Tensor& wv = node(w).val;
  const Tensor& bv = node(b).val;
  if (xv.cols != wv.cols || bv.rows != 1 || bv.cols != wv.rows) {
    shape_error("linear: x[" + std::to_string(xv.rows) + "x" + std::to_string(xv.cols) +
                "], w[" + std::to_string(wv.rows) + "x" + std::to_string(wv.cols) + "], b[" +
                std::to_string(bv.rows) + "x" + std::to_string(bv.cols) + "]");
  }
  Node n;
  n.op = Op::kLinear;
  n.a = x;
  n.b = w;
  n.c = b;
  n.val = Tensor(xv.rows, wv.rows);
  for (std::size_t i = 0; i < xv.rows; ++i) {
    double* row = n.val.v.data() + i * wv.rows;
    for (std::size_t j = 0; j < wv.rows; ++j) row[j] = bv.v[j];
  }
  const Tensor& wt = transposed(w);
  gemm_acc(xv.v.data(), wt.v.data(), n.val.v.data(), xv.rows, xv.cols, wv.rows);
  return push(std::move(n));
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  const Tensor& av = node(a).val;
  const Tensor& bv = node(b).val;
  if (av.cols != bv.cols) shape_error("matmul_nt: inner dimensions differ");
  Node n;
  n.op = Op::kMatmulNT;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, bv.rows);
  const Tensor& bt = transposed(b);
  gemm_acc(av.v.data(), bt.v.data(), n.val.v.data(), av.rows, av.cols, bv.rows);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& av = node(a).val;
  const Tensor& bv = node(b).val;
  if (!av.same_shape(bv)) shape_error("add: shapes differ");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.val = av;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] += bv.v[i];
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& av = node(a).val;
  const Tensor& bv = node(b).val;
  if (!av.same_shape(bv)) shape_error("mul: shapes differ");
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.val = av;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] *= bv.v[i];
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId x) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = x;
  n.val = node(x).val;
  for (double& v : n.val.v) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId x) {
  Node n;
  n.op = Op::kTanh;
  n.a = x;
  n.val = node(x).val;
  for (double& v : n.val.v) v = std::tanh(v);
  return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& av = node(a).val;
  const Tensor& bv = node(b).val;
  if (av.rows != bv.rows) shape_error("concat_cols: row counts differ");
  Node n;
  n.op = Op::kConcatCols;
  n.a = a;
  n.b = b;
  n.val = Tensor(av.rows, av.cols + bv.cols);
  for (std::size_t i = 0; i < av.rows; ++i) {
    double* out = n.val.v.data() + i * n.val.cols;
    const double* pa = av.v.data() + i * av.cols;
    const double* pb = bv.v.data() + i * bv.cols;
    for (std::size_t j = 0; j < av.cols; ++j) out[j] = pa[j];
    for (std::size_t j = 0; j < bv.cols; ++j) out[av.cols + j] = pb[j];
  }
  return push(std::move(n));
}

NodeId Tape::slice_cols(NodeId x, std::size_t first, std::size_t count) {
  const Tensor& xv = node(x).val;
  if (first + count > xv.cols) shape_error("slice_cols: range out of bounds");
  Node n;
  n.op = Op::kSliceCols;
  n.a = x;
  n.first = first;
  n.val = Tensor(xv.rows, count);
  for (std::size_t i = 0; i < xv.rows; ++i) {
    const double* src = xv.v.data() + i * xv.cols + first;
    double* dst = n.val.v.data() + i * count;
    for (std::size_t j = 0; j < count; ++j) dst[j] = src[j];
  }
  return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double k) {
  Node n;
  n.op = Op::kScale;
  n.a = x;
  n.k = k;
  n.val = node(x).val;
  for (double& v : n.val.v) v *= k;
  return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
  Node n;
  n.op = Op::kSum;
  n.a = x;
  double acc = 0.0;
  for (double v : node(x).val.v) acc += v;
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

NodeId Tape::mse(NodeId a, NodeId b) {
  const Tensor& av = node(a).val;
  const Tensor& bv = node(b).val;
  if (!av.same_shape(bv)) shape_error("mse: shapes differ");
  Node n;
  n.op = Op::kMse;
  n.a = a;
  n.b = b;
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    double d = av.v[i] - bv.v[i];
    acc += d * d;
  }
  n.val = Tensor::scalar(acc / static_cast<double>(av.size()));
  return push(std::move(n));
}

NodeId Tape::bce(NodeId p, double target) {
  const Tensor& pv = node(p).val;
  Node n;
  n.op = Op::kBce;
  n.a = p;
  n.k = target;
  double acc = 0.0;
  for (double raw : pv.v) {
    double q = raw;
    if (q < kProbClamp) q = kProbClamp;
    if (q > 1.0 - kProbClamp) q = 1.0 - kProbClamp;
    acc += -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
  }
  n.val = Tensor::scalar(acc / static_cast<double>(pv.size()));
  return push(std::move(n));
}

NodeId Tape::detach(NodeId x) { return input(node(x).val); }

void Tape::backward(NodeId loss) {
  Node& top = node(loss);
  if (top.val.size() != 1) throw Error(ErrorCode::kGraphError, "backward: loss is not scalar");
  if (!std::isfinite(top.val.v[0])) {
    throw Error(ErrorCode::kGraphError, "backward: loss is not finite");
  }
  for (Node& n : nodes_) {
    if (!n.grad.same_shape(n.val)) n.grad = Tensor(n.val.rows, n.val.cols);
  }
  node(loss).grad.v[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    backward_node(nodes_[i]);
  }
}

void Tape::backward_node(Node& n) {
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kLinear: {
      Node& x = node(n.a);
      Node& w = node(n.b);
      Node& b = node(n.c);
      // dx += dy*W, dW += dy^T*x, db += column sums of dy
      gemm_acc(n.grad.v.data(), w.val.v.data(), x.grad.v.data(), n.grad.rows, n.grad.cols,
               w.val.cols);
      gemm_tn_acc(n.grad.v.data(), x.val.v.data(), w.grad.v.data(), w.val.rows, n.grad.rows,
                  x.val.cols);
      for (std::size_t i = 0; i < n.grad.rows; ++i) {
        const double* row = n.grad.v.data() + i * n.grad.cols;
        for (std::size_t j = 0; j < n.grad.cols; ++j) b.grad.v[j] += row[j];
      }
      break;
    }
    case Op::kMatmulNT: {
      Node& a = node(n.a);
      Node& b = node(n.b);
      gemm_acc(n.grad.v.data(), b.val.v.data(), a.grad.v.data(), n.grad.rows, n.grad.cols,
               b.val.cols);
      gemm_tn_acc(n.grad.v.data(), a.val.v.data(), b.grad.v.data(), b.val.rows, n.grad.rows,
                  a.val.cols);
      break;
    }
    case Op::kAdd: {
      Node& a = node(n.a);
      Node& b = node(n.b);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        a.grad.v[i] += n.grad.v[i];
        b.grad.v[i] += n.grad.v[i];
      }
      break;
    }
    case Op::kMul: {
      Node& a = node(n.a);
      Node& b = node(n.b);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        a.grad.v[i] += n.grad.v[i] * b.val.v[i];
        b.grad.v[i] += n.grad.v[i] * a.val.v[i];
      }
      break;
    }
    case Op::kSigmoid: {
      Node& x = node(n.a);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        double y = n.val.v[i];
        x.grad.v[i] += n.grad.v[i] * y * (1.0 - y);
      }
      break;
    }
    case Op::kTanh: {
      Node& x = node(n.a);
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        double y = n.val.v[i];
        x.grad.v[i] += n.grad.v[i] * (1.0 - y * y);
      }
      break;
    }
    case Op::kConcatCols: {
      Node& a = node(n.a);
      Node& b = node(n.b);
      for (std::size_t i = 0; i < n.grad.rows; ++i) {
        const double* src = n.grad.v.data() + i * n.grad.cols;
        double* pa = a.grad.v.data() + i * a.grad.cols;
        double* pb = b.grad.v.data() + i * b.grad.cols;
        for (std::size_t j = 0; j < a.grad.cols; ++j) pa[j] += src[j];
        for (std::size_t j = 0; j < b.grad.cols; ++j) pb[j] += src[a.grad.cols + j];
      }
      break;
    }
    case Op::kSliceCols: {
      Node& x = node(n.a);
      for (std::size_t i = 0; i < n.grad.rows; ++i) {
        const double* src = n.grad.v.data() + i * n.grad.cols;
        double* dst = x.grad.v.data() + i * x.grad.cols + n.first;
        for (std::size_t j = 0; j < n.grad.cols; ++j) dst[j] += src[j];
      }
      break;
    }
    case Op::kScale: {
      Node& x = node(n.a);
      for (std::size_t i = 0; i < n.grad.size(); ++i) x.grad.v[i] += n.k * n.grad.v[i];
      break;
    }
    case Op::kSum: {
      Node& x = node(n.a);
      double g = n.grad.v[0];
      for (double& v : x.grad.v) v += g;
      break;
    }
    case Op::kMse: {
      Node& a = node(n.a);
      Node& b = node(n.b);
      double g = n.grad.v[0] * 2.0 / static_cast<double>(a.val.size());
      for (std::size_t i = 0; i < a.val.size(); ++i) {
        double d = a.val.v[i] - b.val.v[i];
        a.grad.v[i] += g * d;
        b.grad.v[i] -= g * d;
      }
      break;
    }
    case Op::kBce: {
      Node& p = node(n.a);
      double t = n.k;
      double g = n.grad.v[0] / static_cast<double>(p.val.size());
      for (std::size_t i = 0; i < p.val.size(); ++i) {
        double q = p.val.v[i];
        if (q < kProbClamp || q > 1.0 - kProbClamp) continue;  // clamped: flat
        p.grad.v[i] += g * (-t / q + (1.0 - t) / (1.0 - q));
      }
      break;
    }
  }
}

// --- LSTM ------------------------------------------------------------------

LstmNodeIds register_lstm(Tape& tape, const LstmWeights& w) {
  LstmNodeIds ids;
  ids.w_ih = tape.param(w.w_ih);
  ids.w_hh = tape.param(w.w_hh);
  ids.bias = tape.param(w.bias);
  return ids;
}

LstmState lstm_cell(Tape& tape, NodeId x, LstmState prev, const LstmNodeIds& w,
                    std::size_t hidden, NodeId* gates_out) {
  NodeId gates = tape.add(tape.linear(x, w.w_ih, w.bias), tape.matmul_nt(prev.h, w.w_hh));
  if (gates_out) *gates_out = gates;
  NodeId ig = tape.sigmoid(tape.slice_cols(gates, 0, hidden));
  NodeId fg = tape.sigmoid(tape.slice_cols(gates, hidden, hidden));
  NodeId gg = tape.tanh(tape.slice_cols(gates, 2 * hidden, hidden));
  NodeId og = tape.sigmoid(tape.slice_cols(gates, 3 * hidden, hidden));
  LstmState next;
  next.c = tape.add(tape.mul(fg, prev.c), tape.mul(ig, gg));
  next.h = tape.mul(og, tape.tanh(next.c));
  return next;
}

// --- initialization -----------------------------------------------------------

Tensor uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& v : t.v) v = rng.uniform(-bound, bound);
  return t;
}

LstmWeights lstm_init(std::size_t in_dim, std::size_t hidden, Rng& rng) {
  LstmWeights w;
  w.w_ih = uniform_init(4 * hidden, in_dim, rng);
  w.w_hh = uniform_init(4 * hidden, hidden, rng);
  w.bias = Tensor(1, 4 * hidden);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) w.bias.v[j] = 1.0;  // forget gate
  return w;
}

// --- optimizer ------------------------------------------------------------------

void AdamState::init_like(const std::vector<Tensor*>& params) {
  m.clear();
  v.clear();
  for (const Tensor* p : params) {
    m.emplace_back(p->rows, p->cols);
    v.emplace_back(p->rows, p->cols);
  }
  step = 0;
}

double clip_grad_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.v) sq += v * v;
  }
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (Tensor& g : grads) {
      for (double& v : g.v) v *= s;
    }
  }
  return norm;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam_step: parameter/gradient count mismatch");
  }
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    if (!p.same_shape(g)) throw Error(ErrorCode::kShapeMismatch, "adam_step: shape mismatch");
    Tensor& mk = state.m[k];
    Tensor& vk = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      mk.v[i] = state.cfg.beta1 * mk.v[i] + (1.0 - state.cfg.beta1) * g.v[i];
      vk.v[i] = state.cfg.beta2 * vk.v[i] + (1.0 - state.cfg.beta2) * g.v[i] * g.v[i];
      double mhat = mk.v[i] / bc1;
      double vhat = vk.v[i] / bc2;
      p.v[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  }
}

}  // namespace sbg::ad
