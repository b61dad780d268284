#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sbg/errors.hpp"
#include "sbg/rng.hpp"

namespace sbg::ad {

// Row-major 2D tensor of 64-bit reals. Vectors are 1 x n, scalars 1 x 1.
struct Tensor {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  static Tensor scalar(double value) {
    Tensor t(1, 1);
    t.v[0] = value;
    return t;
  }

  std::size_t size() const { return v.size(); }
  double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

// Dynamic reverse-mode tape. Node order is a topological order by
// construction, so backward() is a single reverse sweep.
class Tape {
 public:
  // leaves; the two names only signal intent at call sites
  NodeId input(Tensor value);
  NodeId param(const Tensor& value);

  // y = x * W^T + b; x [r x in], W [out x in], b [1 x out] broadcast per row
  NodeId linear(NodeId x, NodeId w, NodeId b);
  // y = a * b^T; a [r x k], b [c x k]
  NodeId matmul_nt(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId sigmoid(NodeId x);
  NodeId tanh(NodeId x);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId slice_cols(NodeId x, std::size_t first, std::size_t count);
  NodeId scale(NodeId x, double k);
  NodeId sum(NodeId x);  // scalar: sum of all elements

  // scalar: mean of squared differences over all elements
  NodeId mse(NodeId a, NodeId b);
  // scalar: mean over elements of -(t*ln p + (1-t)*ln(1-p)), p clamped to
  // [1e-7, 1 - 1e-7]
  NodeId bce(NodeId p, double target);

  // copies the value into a fresh leaf, cutting gradient flow
  NodeId detach(NodeId x);

  // accumulates gradients of `loss` (must be scalar) into every node it
  // depends on; d(loss)/d(loss) = 1
  void backward(NodeId loss);

  const Tensor& value(NodeId id) const { return node(id).val; }
  const Tensor& grad(NodeId id) const { return node(id).grad; }
  double scalar_value(NodeId id) const;

  std::size_t node_count() const { return nodes_.size(); }

  static constexpr double kProbClamp = 1e-7;

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kLinear,
    kMatmulNT,
    kAdd,
    kMul,
    kSigmoid,
    kTanh,
    kConcatCols,
    kSliceCols,
    kScale,
    kSum,
    kMse,
    kBce,
  };

  struct Node {
    Op op = Op::kLeaf;
    NodeId a = kNoNode, b = kNoNode, c = kNoNode;
    std::size_t first = 0;  // slice offset
    double k = 0.0;         // scale factor or bce target
    Tensor val;
    Tensor grad;
  };

  NodeId push(Node n);
  const Node& node(NodeId id) const;
  Node& node(NodeId id);
  const Tensor& transposed(NodeId id);
  void backward_node(Node& n);

  std::vector<Node> nodes_;
  std::map<NodeId, Tensor> transpose_cache_;
};

// --- LSTM ---------------------------------------------------------------

// Gate order i, f, g, o.
struct LstmWeights {
  Tensor w_ih;  // [4H x in]
  Tensor w_hh;  // [4H x H]
  Tensor bias;  // [1 x 4H]

  std::size_t hidden() const { return w_hh.cols; }
  std::size_t input_dim() const { return w_ih.cols; }
};

struct LstmNodeIds {
  NodeId w_ih = kNoNode, w_hh = kNoNode, bias = kNoNode;
};

struct LstmState {
  NodeId h = kNoNode, c = kNoNode;
};

LstmNodeIds register_lstm(Tape& tape, const LstmWeights& w);

// standard gated update; x [batch x in], states [batch x H]; gates_out, when
// given, receives the pre-activation node
LstmState lstm_cell(Tape& tape, NodeId x, LstmState prev, const LstmNodeIds& w,
                    std::size_t hidden, NodeId* gates_out = nullptr);

// --- initialization -------------------------------------------------------

// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
Tensor uniform_init(std::size_t rows, std::size_t cols, Rng& rng);
// zero bias with the forget-gate block set to +1
LstmWeights lstm_init(std::size_t in_dim, std::size_t hidden, Rng& rng);

// --- optimizer --------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::uint64_t step = 0;
  std::vector<Tensor> m, v;

  void init_like(const std::vector<Tensor*>& params);
};

// scales all gradients by max_norm/g when the global L2 norm g exceeds
// max_norm; returns the pre-clip norm
double clip_grad_norm(std::vector<Tensor>& grads, double max_norm = 1.0);

// bias-corrected Adam update, in place
void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state);

}  // namespace sbg::ad
