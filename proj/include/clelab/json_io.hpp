#pragma once

#include <string>

#include "clelab/events.hpp"
#include "clelab/sampler.hpp"

namespace clelab {

// Versioned JSON forms of the persistent objects: lattices (axial
// coordinates plus the defining region), configurations (occupancy as
// base64), chain checkpoints, and the event schema shared by the CLI.

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string region_to_json(const RegionSpec& region);
RegionSpec region_from_json(const std::string& text);

std::string lattice_to_json(const HexLattice& lat);
// Rebuilds from the stored region/spacing and verifies the stored hash and
// axial face list; throws on mismatch.
HexLattice lattice_from_json(const std::string& text);

std::string config_to_json(const LoopConfig& cfg);
void config_from_json(const std::string& text, LoopConfig* cfg);

std::string checkpoint_to_json(const ChainState& st, const MCParams& mc);
// Refuses to resume when the lattice hash differs.
void checkpoint_restore(const std::string& text, const HexLattice& lat,
                        ChainState* st, MCParams* mc);

std::string event_to_json(const EventSpec& e);
EventSpec event_from_json(const std::string& text);

std::string curve_to_json(const ClosedCurve& c);
ClosedCurve curve_from_json(const std::string& text);

}  // namespace clelab
