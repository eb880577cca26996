#pragma once

#include <string>
#include <vector>

#include "advrecon/bench/curve.hpp"

namespace advrecon::bench {

/// Self-contained gnuplot script: the points go into inline data blocks, one
/// per (method, noise kind) in first-seen order, drawn as lines with error bars
/// (mean +- std). Writes `output` as a PNG when run.
std::string gnuplot_script(const std::string& title, const std::vector<CurvePoint>& points,
                           const std::string& output = "curves.png");

}  // namespace advrecon::bench
