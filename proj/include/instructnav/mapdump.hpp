#pragma once

#include <string>

#include "instructnav/episode.hpp"

namespace instructnav::eval {

/// Writes the five value maps of one decision step as binary PGM images
/// (per-source values scaled over [0,1], the fused map over [0,4]) plus
/// one JSON sidecar carrying the raw values, the trajectory so far, the
/// chosen waypoint and the A* path. Filenames follow
/// "<episode>_step<k>_<source>.pgm" / "<episode>_step<k>.json".
void dump_decision_maps(const DecisionTrace& trace, const std::string& episode_id,
                        const std::string& out_dir);

/// Sidecar round trip used by tests and tooling.
struct SidecarData {
  DecisionTrace trace;
};
SidecarData read_sidecar(const std::string& path);

}  // namespace instructnav::eval
