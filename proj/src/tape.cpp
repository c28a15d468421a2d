#include "srdr/tape.hpp"

#include <cmath>
#include <string>

#include "srdr/errors.hpp"

namespace srdr {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw DimensionMismatch(std::string("tape: ") + what);
}

}  // namespace

NodeId Tape::push(Op op, std::uint32_t rows, std::uint32_t cols, NodeId a,
                  NodeId b) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.a = a;
  n.b = b;
  n.off = values_.size();
  values_.resize(values_.size() + std::size_t{rows} * cols, 0.0);
  nodes_.push_back(n);
  has_adjoints_ = false;
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant_vector(const Vector& v) {
  require(!v.empty(), "empty constant");
  const NodeId id = push(Op::constant, static_cast<std::uint32_t>(v.size()), 1,
                         0, 0);
  std::copy(v.begin(), v.end(), mutable_value(nodes_[id]));
  return id;
}

NodeId Tape::constant_matrix(const Matrix& m) {
  require(!m.empty(), "empty constant matrix");
  const NodeId id = push(Op::constant, static_cast<std::uint32_t>(m.rows()),
                         static_cast<std::uint32_t>(m.cols()), 0, 0);
  std::copy(m.entries().begin(), m.entries().end(), mutable_value(nodes_[id]));
  return id;
}

NodeId Tape::param_vector(const Vector& v) {
  const NodeId id = constant_vector(v);
  nodes_[id].op = Op::param;
  return id;
}

NodeId Tape::param_matrix(const Matrix& m) {
  const NodeId id = constant_matrix(m);
  nodes_[id].op = Op::param;
  return id;
}

std::size_t Tape::length(NodeId id) const {
  return std::size_t{nodes_[id].rows} * nodes_[id].cols;
}

std::size_t Tape::matrix_rows(NodeId id) const { return nodes_[id].rows; }
std::size_t Tape::matrix_cols(NodeId id) const { return nodes_[id].cols; }

Vector Tape::value(NodeId id) const {
  const Node& n = nodes_[id];
  return Vector(node_value(n), node_value(n) + length(id));
}

const double* Tape::value_data(NodeId id) const {
  return node_value(nodes_[id]);
}

double Tape::scalar(NodeId id) const {
  if (length(id) != 1)
    throw NotScalar("tape: node has length " + std::to_string(length(id)));
  return *node_value(nodes_[id]);
}

NodeId Tape::matvec(NodeId w, NodeId x) {
  const Node& wn = nodes_[w];
  require(nodes_[x].cols == 1, "matvec: x must be a vector");
  require(wn.cols == nodes_[x].rows, "matvec: extents");
  const NodeId id = push(Op::matvec, wn.rows, 1, w, x);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::matvec_t(NodeId w, NodeId x) {
  const Node& wn = nodes_[w];
  require(nodes_[x].cols == 1, "matvec_t: x must be a vector");
  require(wn.rows == nodes_[x].rows, "matvec_t: extents");
  const NodeId id = push(Op::matvec_t, wn.cols, 1, w, x);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::add(NodeId u, NodeId v) {
  require(length(u) == length(v), "add: lengths");
  const NodeId id = push(Op::add, nodes_[u].rows, nodes_[u].cols, u, v);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::sub(NodeId u, NodeId v) {
  require(length(u) == length(v), "sub: lengths");
  const NodeId id = push(Op::sub, nodes_[u].rows, nodes_[u].cols, u, v);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::scale(NodeId u, double c) {
  const NodeId id = push(Op::scale, nodes_[u].rows, nodes_[u].cols, u, 0);
  nodes_[id].aux = c;
  compute(nodes_[id]);
  return id;
}

NodeId Tape::tanh(NodeId u) {
  const NodeId id = push(Op::tanh, nodes_[u].rows, nodes_[u].cols, u, 0);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::dtanh_mul(NodeId h, NodeId t) {
  require(length(h) == length(t), "dtanh_mul: lengths");
  const NodeId id = push(Op::dtanh_mul, nodes_[h].rows, nodes_[h].cols, h, t);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::dot(NodeId u, NodeId v) {
  require(length(u) == length(v), "dot: lengths");
  const NodeId id = push(Op::dot, 1, 1, u, v);
  compute(nodes_[id]);
  return id;
}

NodeId Tape::add_scalars(const std::vector<NodeId>& terms) {
  require(!terms.empty(), "add_scalars: empty term list");
  for (NodeId t : terms) require(length(t) == 1, "add_scalars: scalar terms");
  const NodeId id = push(Op::add_scalars, 1, 1, 0, 0);
  nodes_[id].extra_off = static_cast<std::uint32_t>(extras_.size());
  nodes_[id].extra_len = static_cast<std::uint32_t>(terms.size());
  extras_.insert(extras_.end(), terms.begin(), terms.end());
  compute(nodes_[id]);
  return id;
}

NodeId Tape::concat(NodeId u, NodeId v) {
  require(nodes_[u].cols == 1 && nodes_[v].cols == 1, "concat: vectors");
  const NodeId id = push(Op::concat,
                         nodes_[u].rows + nodes_[v].rows, 1, u, v);
  compute(nodes_[id]);
  return id;
}

void Tape::compute(Node& n) {
  double* out = mutable_value(n);
  switch (n.op) {
    case Op::constant:
    case Op::param:
      break;
    case Op::matvec: {
      const Node& w = nodes_[n.a];
      matvec_into(node_value(w), w.rows, w.cols, node_value(nodes_[n.b]), out);
      break;
    }
    case Op::matvec_t: {
      const Node& w = nodes_[n.a];
      matvec_t_into(node_value(w), w.rows, w.cols, node_value(nodes_[n.b]),
                    out);
      break;
    }
    case Op::add: {
      const double* u = node_value(nodes_[n.a]);
      const double* v = node_value(nodes_[n.b]);
      const std::size_t len = std::size_t{n.rows} * n.cols;
      for (std::size_t i = 0; i < len; ++i) out[i] = u[i] + v[i];
      break;
    }
    case Op::sub: {
      const double* u = node_value(nodes_[n.a]);
      const double* v = node_value(nodes_[n.b]);
      const std::size_t len = std::size_t{n.rows} * n.cols;
      for (std::size_t i = 0; i < len; ++i) out[i] = u[i] - v[i];
      break;
    }
    case Op::scale: {
      const double* u = node_value(nodes_[n.a]);
      const std::size_t len = std::size_t{n.rows} * n.cols;
      for (std::size_t i = 0; i < len; ++i) out[i] = n.aux * u[i];
      break;
    }
    case Op::tanh: {
      const double* u = node_value(nodes_[n.a]);
      const std::size_t len = std::size_t{n.rows} * n.cols;
      for (std::size_t i = 0; i < len; ++i) out[i] = std::tanh(u[i]);
      break;
    }
    case Op::dtanh_mul: {
      const double* h = node_value(nodes_[n.a]);
      const double* t = node_value(nodes_[n.b]);
      const std::size_t len = std::size_t{n.rows} * n.cols;
      for (std::size_t i = 0; i < len; ++i) out[i] = (1.0 - h[i] * h[i]) * t[i];
      break;
    }
    case Op::dot: {
      const double* u = node_value(nodes_[n.a]);
      const double* v = node_value(nodes_[n.b]);
      const std::size_t len = length(n.a);
      double acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) acc += u[i] * v[i];
      out[0] = acc;
      break;
    }
    case Op::add_scalars: {
      double acc = 0.0;
      for (std::uint32_t k = 0; k < n.extra_len; ++k)
        acc += *node_value(nodes_[extras_[n.extra_off + k]]);
      out[0] = acc;
      break;
    }
    case Op::concat: {
      const Node& u = nodes_[n.a];
      const Node& v = nodes_[n.b];
      std::copy(node_value(u), node_value(u) + u.rows, out);
      std::copy(node_value(v), node_value(v) + v.rows, out + u.rows);
      break;
    }
  }
}

void Tape::backward(NodeId root) {
  if (length(root) != 1)
    throw NotScalar("tape: backward root has length " +
                    std::to_string(length(root)));
  adjoints_.assign(values_.size(), 0.0);
  has_adjoints_ = true;
  node_adjoint(nodes_[root])[0] = 1.0;

  for (std::size_t k = nodes_.size(); k-- > 0;) {
    const Node& n = nodes_[k];
    const double* g = adjoints_.data() + n.off;
    switch (n.op) {
      case Op::constant:
      case Op::param:
        break;
      case Op::matvec: {
        // y = W x:  W̄ += ȳ xᵀ,  x̄ += Wᵀ ȳ
        const Node& w = nodes_[n.a];
        const Node& x = nodes_[n.b];
        double* wg = node_adjoint(w);
        double* xg = node_adjoint(x);
        const double* wv = node_value(w);
        const double* xv = node_value(x);
        for (std::uint32_t i = 0; i < w.rows; ++i) {
          const double gi = g[i];
          double* wgi = wg + std::size_t{i} * w.cols;
          const double* wvi = wv + std::size_t{i} * w.cols;
          for (std::uint32_t j = 0; j < w.cols; ++j) {
            wgi[j] += gi * xv[j];
            xg[j] += wvi[j] * gi;
          }
        }
        break;
      }
      case Op::matvec_t: {
        // y = Wᵀ x:  W̄ += x ȳᵀ,  x̄ += W ȳ
        const Node& w = nodes_[n.a];
        const Node& x = nodes_[n.b];
        double* wg = node_adjoint(w);
        double* xg = node_adjoint(x);
        const double* wv = node_value(w);
        const double* xv = node_value(x);
        for (std::uint32_t i = 0; i < w.rows; ++i) {
          const double xi = xv[i];
          double* wgi = wg + std::size_t{i} * w.cols;
          const double* wvi = wv + std::size_t{i} * w.cols;
          double acc = 0.0;
          for (std::uint32_t j = 0; j < w.cols; ++j) {
            wgi[j] += xi * g[j];
            acc += wvi[j] * g[j];
          }
          xg[i] += acc;
        }
        break;
      }
      case Op::add: {
        double* ug = node_adjoint(nodes_[n.a]);
        double* vg = node_adjoint(nodes_[n.b]);
        const std::size_t len = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < len; ++i) {
          ug[i] += g[i];
          vg[i] += g[i];
        }
        break;
      }
      case Op::sub: {
        double* ug = node_adjoint(nodes_[n.a]);
        double* vg = node_adjoint(nodes_[n.b]);
        const std::size_t len = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < len; ++i) {
          ug[i] += g[i];
          vg[i] -= g[i];
        }
        break;
      }
      case Op::scale: {
        double* ug = node_adjoint(nodes_[n.a]);
        const std::size_t len = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < len; ++i) ug[i] += n.aux * g[i];
        break;
      }
      case Op::tanh: {
        double* ug = node_adjoint(nodes_[n.a]);
        const double* y = node_value(n);
        const std::size_t len = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < len; ++i)
          ug[i] += (1.0 - y[i] * y[i]) * g[i];
        break;
      }
      case Op::dtanh_mul: {
        // y = (1 - h²) ⊙ t:  h̄ += -2 h ⊙ t ⊙ ȳ,  t̄ += (1 - h²) ⊙ ȳ
        double* hg = node_adjoint(nodes_[n.a]);
        double* tg = node_adjoint(nodes_[n.b]);
        const double* hv = node_value(nodes_[n.a]);
        const double* tv = node_value(nodes_[n.b]);
        const std::size_t len = std::size_t{n.rows} * n.cols;
        for (std::size_t i = 0; i < len; ++i) {
          hg[i] += -2.0 * hv[i] * tv[i] * g[i];
          tg[i] += (1.0 - hv[i] * hv[i]) * g[i];
        }
        break;
      }
      case Op::dot: {
        double* ug = node_adjoint(nodes_[n.a]);
        double* vg = node_adjoint(nodes_[n.b]);
        const double* uv = node_value(nodes_[n.a]);
        const double* vv = node_value(nodes_[n.b]);
        const std::size_t len = length(n.a);
        const double g0 = g[0];
        for (std::size_t i = 0; i < len; ++i) {
          ug[i] += g0 * vv[i];
          vg[i] += g0 * uv[i];
        }
        break;
      }
      case Op::add_scalars: {
        const double g0 = g[0];
        for (std::uint32_t t = 0; t < n.extra_len; ++t)
          node_adjoint(nodes_[extras_[n.extra_off + t]])[0] += g0;
        break;
      }
      case Op::concat: {
        const Node& u = nodes_[n.a];
        const Node& v = nodes_[n.b];
        double* ug = node_adjoint(u);
        double* vg = node_adjoint(v);
        for (std::uint32_t i = 0; i < u.rows; ++i) ug[i] += g[i];
        for (std::uint32_t i = 0; i < v.rows; ++i) vg[i] += g[u.rows + i];
        break;
      }
    }
  }
}

Vector Tape::adjoint(NodeId id) const {
  if (!has_adjoints_) throw NotScalar("tape: backward has not been run");
  const Node& n = nodes_[id];
  return Vector(adjoints_.data() + n.off, adjoints_.data() + n.off + length(id));
}

const double* Tape::adjoint_data(NodeId id) const {
  if (!has_adjoints_) throw NotScalar("tape: backward has not been run");
  return adjoints_.data() + nodes_[id].off;
}

void Tape::replay() {
  for (Node& n : nodes_) compute(n);
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  adjoints_.clear();
  extras_.clear();
  has_adjoints_ = false;
}

}  // namespace srdr
