#pragma once

#include <utility>
#include <vector>

#include "srdr/matrix.hpp"
#include "srdr/rng.hpp"
#include "srdr/tape.hpp"

namespace srdr {

// Hidden-layer nonlinearity. Hyperbolic tangent is smooth and twice
// differentiable, which the trace term of the training objective requires;
// the output layer is always affine.
enum class Activation { tanh };

// Feed-forward network parameters. Layer l maps width[l] to width[l+1] via
// weights[l] (row-major, shape width[l+1] x width[l]) plus biases[l].
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Activation activation = Activation::tanh;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t param_count() const;
};

// Throws DimensionMismatch if layer shapes do not chain or biases disagree
// with their weight matrices, or if any entry is not finite.
void validate_mlp(const MlpParams& params);

// Hidden weights ~ N(0, 1/fan_in) (standard deviation 1/sqrt(fan_in)),
// biases zero. The final layer is zero-initialized so a fresh network's
// output is identically zero. Draw order: layer by layer, weights row-major,
// then bias.
MlpParams init_mlp(std::size_t in, std::size_t hidden_layers,
                   std::size_t hidden_width, std::size_t out, SeededRng& rng);

// Parameter flattening, layer-major, weights before biases, row-major.
Vector flatten_mlp(const MlpParams& params);
void unflatten_mlp(const Vector& flat, std::size_t offset, MlpParams* params);

Vector mlp_forward(const MlpParams& params, const Vector& input);

struct JvpResult {
  Vector value;    // mlp_forward(params, input)
  Vector tangent;  // (∂ output / ∂ input) · direction
};

// Forward-mode dual-number pass; primal and tangent propagate together.
JvpResult mlp_jvp(const MlpParams& params, const Vector& input,
                  const Vector& direction);

// Tape counterparts. Parameter leaves are registered once per tape and the
// node ids reused for every forward and tangent chain recorded on it.
struct MlpTapeNodes {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
  // Post-activation node of each hidden layer from the most recent
  // mlp_forward_on_tape call; consumed by tangent chains.
  std::vector<NodeId> hidden;
};

MlpTapeNodes bind_mlp_params(Tape& tape, const MlpParams& params);
NodeId mlp_forward_on_tape(Tape& tape, MlpTapeNodes& nodes, NodeId input);
// Records the tangent chain reusing the primal's hidden activations; the
// tangent seed may be any node (constant or parameter-dependent).
NodeId mlp_tangent_on_tape(Tape& tape, const MlpTapeNodes& nodes,
                           NodeId tangent_seed);

// Adjoints of the parameter leaves after tape.backward(), flattened in the
// same order as flatten_mlp.
Vector gather_mlp_gradient(const Tape& tape, const MlpTapeNodes& nodes);

}  // namespace srdr
