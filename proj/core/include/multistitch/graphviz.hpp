#pragma once

#include "multistitch/graph.hpp"

#include <string>

namespace multistitch {

/// DOT text for the multigraph. Nodes sit at their nominal offsets (y
/// flipped, 1 px = 1 pt); candidates are solid edges labelled with their
/// weight, dummies dashed. With `pruned`, only the winning candidate of each
/// bundle is drawn and dropped bundles vanish; this requires solved weights.
std::string to_dot(const AlignmentMultigraph& graph, bool pruned = false);

}  // namespace multistitch
