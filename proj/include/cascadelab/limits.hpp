#pragma once

#include <cstddef>

namespace cascadelab {

// Cell-count cap shared by finest grids and tensor dimensions.
// Default 2^26; override with the CASCADELAB_MAX_CELLS environment variable.
std::size_t cell_limit();

} // namespace cascadelab
