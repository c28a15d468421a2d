#pragma once

#include <cstdint>
#include <vector>

#include "srdr/matrix.hpp"

namespace srdr {

using NodeId = std::uint32_t;

// Recorded computation graph over vector-valued nodes (scalars are length-1
// nodes, matrix leaves carry an explicit column count). Values are computed
// eagerly while recording; backward() then accumulates adjoints in a single
// reverse sweep with a fixed, deterministic order. Completed tapes replay
// bit-identically.
//
// The second-order path needed by the trace term is reverse-over-forward:
// tangent propagation (matvec, dtanh_mul) is recorded as ordinary nodes, so
// one reverse sweep differentiates through it.
class Tape {
 public:
  NodeId constant_vector(const Vector& v);
  NodeId constant_matrix(const Matrix& m);
  // Like constants, but their adjoints are the gradients read back after
  // backward().
  NodeId param_vector(const Vector& v);
  NodeId param_matrix(const Matrix& m);

  NodeId matvec(NodeId w, NodeId x);    // w is a matrix leaf or value
  NodeId matvec_t(NodeId w, NodeId x);  // wᵀ · x
  NodeId add(NodeId u, NodeId v);
  NodeId sub(NodeId u, NodeId v);
  NodeId scale(NodeId u, double c);
  NodeId tanh(NodeId u);
  // (1 - h²) ⊙ t, where h is a tanh output node: the tangent of tanh.
  NodeId dtanh_mul(NodeId h, NodeId t);
  NodeId dot(NodeId u, NodeId v);  // scalar
  NodeId add_scalars(const std::vector<NodeId>& terms);
  NodeId concat(NodeId u, NodeId v);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t length(NodeId id) const;
  std::size_t matrix_rows(NodeId id) const;
  std::size_t matrix_cols(NodeId id) const;
  Vector value(NodeId id) const;
  const double* value_data(NodeId id) const;
  // Throws NotScalar unless the node has length 1.
  double scalar(NodeId id) const;

  // Reverse sweep from a scalar root; resets all adjoints first.
  void backward(NodeId root);
  Vector adjoint(NodeId id) const;
  const double* adjoint_data(NodeId id) const;

  // Recomputes every non-leaf value in recording order, overwriting the
  // stored values; used to verify bit-identical replay.
  void replay();

  // Drops all nodes but keeps allocated capacity for reuse across batches.
  void clear();

 private:
  enum class Op : std::uint8_t {
    constant,
    param,
    matvec,
    matvec_t,
    add,
    sub,
    scale,
    tanh,
    dtanh_mul,
    dot,
    add_scalars,
    concat,
  };

  struct Node {
    Op op;
    std::uint32_t rows;  // value length = rows * cols
    std::uint32_t cols;  // 1 except for matrix leaves
    NodeId a = 0;
    NodeId b = 0;
    double aux = 0.0;
    std::uint32_t extra_off = 0;
    std::uint32_t extra_len = 0;
    std::size_t off = 0;  // offset into the value/adjoint arenas
  };

  NodeId push(Op op, std::uint32_t rows, std::uint32_t cols, NodeId a,
              NodeId b);
  void compute(Node& n);
  double* mutable_value(const Node& n) { return values_.data() + n.off; }
  const double* node_value(const Node& n) const { return values_.data() + n.off; }
  double* node_adjoint(const Node& n) { return adjoints_.data() + n.off; }

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> adjoints_;
  std::vector<NodeId> extras_;
  bool has_adjoints_ = false;
};

}  // namespace srdr
