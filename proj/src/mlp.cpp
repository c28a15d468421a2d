#include "srdr/mlp.hpp"

#include <cmath>
#include <string>

#include "srdr/errors.hpp"

namespace srdr {

std::size_t MlpParams::input_width() const {
  return weights.empty() ? 0 : weights.front().cols();
}

std::size_t MlpParams::output_width() const {
  return weights.empty() ? 0 : weights.back().rows();
}

std::size_t MlpParams::param_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    count += weights[l].rows() * weights[l].cols() + biases[l].size();
  return count;
}

void validate_mlp(const MlpParams& params) {
  if (params.weights.size() != params.biases.size())
    throw DimensionMismatch("mlp: weight/bias layer counts differ");
  if (params.weights.empty()) throw DimensionMismatch("mlp: no layers");
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (params.biases[l].size() != params.weights[l].rows())
      throw DimensionMismatch("mlp: bias length at layer " + std::to_string(l));
    if (l + 1 < params.weights.size() &&
        params.weights[l + 1].cols() != params.weights[l].rows())
      throw DimensionMismatch("mlp: widths do not chain at layer " +
                              std::to_string(l));
    if (!is_finite(params.weights[l]) || !is_finite(params.biases[l]))
      throw DimensionMismatch("mlp: nonfinite parameter at layer " +
                              std::to_string(l));
  }
}

MlpParams init_mlp(std::size_t in, std::size_t hidden_layers,
                   std::size_t hidden_width, std::size_t out, SeededRng& rng) {
  std::vector<std::size_t> widths;
  widths.push_back(in);
  for (std::size_t l = 0; l < hidden_layers; ++l) widths.push_back(hidden_width);
  widths.push_back(out);

  MlpParams params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Matrix w(widths[l + 1], widths[l]);
    const bool final_layer = l + 2 == widths.size();
    if (!final_layer) {
      const double std_dev = 1.0 / std::sqrt(static_cast<double>(widths[l]));
      for (double& e : w.entries()) e = std_dev * rng.gaussian();
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Vector(widths[l + 1], 0.0));
  }
  return params;
}

Vector flatten_mlp(const MlpParams& params) {
  Vector flat;
  flat.reserve(params.param_count());
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& e = params.weights[l].entries();
    flat.insert(flat.end(), e.begin(), e.end());
    flat.insert(flat.end(), params.biases[l].begin(), params.biases[l].end());
  }
  return flat;
}

void unflatten_mlp(const Vector& flat, std::size_t offset, MlpParams* params) {
  std::size_t pos = offset;
  for (std::size_t l = 0; l < params->weights.size(); ++l) {
    auto& e = params->weights[l].entries();
    if (pos + e.size() + params->biases[l].size() > flat.size())
      throw DimensionMismatch("unflatten_mlp: flat vector too short");
    std::copy(flat.begin() + pos, flat.begin() + pos + e.size(), e.begin());
    pos += e.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + params->biases[l].size(),
              params->biases[l].begin());
    pos += params->biases[l].size();
  }
}

Vector mlp_forward(const MlpParams& params, const Vector& input) {
  if (input.size() != params.input_width())
    throw DimensionMismatch("mlp_forward: input length " +
                            std::to_string(input.size()) + ", expected " +
                            std::to_string(params.input_width()));
  Vector h = input;
  Vector a;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Matrix& w = params.weights[l];
    a.resize(w.rows());
    matvec_into(w.data(), w.rows(), w.cols(), h.data(), a.data());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += params.biases[l][i];
    if (l + 1 < params.weights.size())
      for (double& v : a) v = std::tanh(v);
    h = a;
  }
  return h;
}

JvpResult mlp_jvp(const MlpParams& params, const Vector& input,
                  const Vector& direction) {
  if (input.size() != params.input_width())
    throw DimensionMismatch("mlp_jvp: input length");
  if (direction.size() != input.size())
    throw DimensionMismatch("mlp_jvp: direction length " +
                            std::to_string(direction.size()) + ", expected " +
                            std::to_string(input.size()));
  Vector h = input, t = direction;
  Vector a, ta;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Matrix& w = params.weights[l];
    a.resize(w.rows());
    ta.resize(w.rows());
    matvec_into(w.data(), w.rows(), w.cols(), h.data(), a.data());
    matvec_into(w.data(), w.rows(), w.cols(), t.data(), ta.data());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += params.biases[l][i];
    if (l + 1 < params.weights.size()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::tanh(a[i]);
        ta[i] = (1.0 - a[i] * a[i]) * ta[i];
      }
    }
    h = a;
    t = ta;
  }
  return {std::move(h), std::move(t)};
}

MlpTapeNodes bind_mlp_params(Tape& tape, const MlpParams& params) {
  MlpTapeNodes nodes;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    nodes.weights.push_back(tape.param_matrix(params.weights[l]));
    nodes.biases.push_back(tape.param_vector(params.biases[l]));
  }
  return nodes;
}

NodeId mlp_forward_on_tape(Tape& tape, MlpTapeNodes& nodes, NodeId input) {
  nodes.hidden.clear();
  NodeId h = input;
  for (std::size_t l = 0; l < nodes.weights.size(); ++l) {
    NodeId a = tape.add(tape.matvec(nodes.weights[l], h), nodes.biases[l]);
    if (l + 1 < nodes.weights.size()) {
      a = tape.tanh(a);
      nodes.hidden.push_back(a);
    }
    h = a;
  }
  return h;
}

NodeId mlp_tangent_on_tape(Tape& tape, const MlpTapeNodes& nodes,
                           NodeId tangent_seed) {
  NodeId t = tangent_seed;
  for (std::size_t l = 0; l < nodes.weights.size(); ++l) {
    t = tape.matvec(nodes.weights[l], t);
    if (l + 1 < nodes.weights.size())
      t = tape.dtanh_mul(nodes.hidden[l], t);
  }
  return t;
}

Vector gather_mlp_gradient(const Tape& tape, const MlpTapeNodes& nodes) {
  Vector grad;
  for (std::size_t l = 0; l < nodes.weights.size(); ++l) {
    const Vector wg = tape.adjoint(nodes.weights[l]);
    grad.insert(grad.end(), wg.begin(), wg.end());
    const Vector bg = tape.adjoint(nodes.biases[l]);
    grad.insert(grad.end(), bg.begin(), bg.end());
  }
  return grad;
}

}  // namespace srdr
