#pragma once

#include <string>

#include "sclab/configuration.hpp"
#include "sclab/game.hpp"

namespace sclab {

// Static SVG snapshots of configurations and traces. Every emitted
// coordinate is the exact decimal expansion of an approx(precision_bits)
// interval midpoint, so equal inputs give byte-identical files. Raising the
// precision changes digits, never which incidences the picture shows.
//
// Points draw as dots, lines are clipped to the viewport exactly, circles
// draw as circle elements. Infinite points and non-circular conics are
// left out of the picture.
struct RenderOptions {
  unsigned precision_bits = 24;
};

std::string render_svg(const Configuration& cfg, const RenderOptions& opt = {});

// Same picture as the trace's final configuration, with the starting
// objects drawn muted and the outputs accented.
std::string render_svg(const Trace& t, const RenderOptions& opt = {});

}  // namespace sclab
