#pragma once

#include <string>

#include "srdr/ratio_net.hpp"

namespace srdr {

// Versioned line-oriented text document:
//
//   srdr-checkpoint v1
//   dims <n> <m> <r'> <s'> <hidden_layers> <hidden_width>
//   order wx-row-major wy-row-major psi-layer-weights-then-bias
//   params <count>
//   <one value per line, 17 significant digits>
//   end
//
// Values follow the flatten_network order. hidden_width is 0 when psi has
// no hidden layers. Round trips are bit-exact.
void save_checkpoint(const ScoreRatioNetwork& net, const std::string& path);

// Throws MalformedCheckpoint on any structural defect: bad magic or version,
// malformed dims (including r' > n or s' > m), wrong order line, parameter
// count disagreeing with the dimensions, unparsable or non-finite values,
// truncation, or trailing garbage. Throws IoError if the file cannot be
// read.
ScoreRatioNetwork load_checkpoint(const std::string& path);

}  // namespace srdr
