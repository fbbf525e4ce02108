// Cascade field simulation.
//
// A level-n field stores the c^n pre-limit cell masses of one replicate.
// Weight draws are keyed by (seed, replicate, level, cell), so the parallel
// and serial paths produce bit-identical fields at any thread count; the
// serial path is kept as the reference implementation for tests and the
// benchmark target.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cascadelab/generator.hpp"
#include "cascadelab/rng.hpp"

namespace cascadelab {

struct CascadeField {
    int branching = 2;
    int level = 0;
    std::vector<double> masses; // branching^level entries, c-adic cell order
};

// OpenMP-parallel within each level expansion.
CascadeField simulate(Generator const& gen, int level, StreamKey const& key);
// Serial reference; bit-identical to simulate().
CascadeField simulate_reference(Generator const& gen, int level, StreamKey const& key);

// Sums consecutive blocks of c^steps cells; steps = 0 is the identity.
CascadeField coarsen(CascadeField const& field, int steps);

double total_mass(CascadeField const& field);

// A lazily evaluated ensemble: replicate k is a pure function of
// (master_seed, k), independent of evaluation order.
struct Ensemble {
    Generator generator;
    int level = 0;
    int replicates = 1;
    std::uint64_t master_seed = 0;

    Ensemble(Generator gen, int level_in, int replicates_in, std::uint64_t seed);

    CascadeField field(int replicate) const;

    // Applies fn(k, field) for every replicate; OpenMP across replicates.
    // fn must write only to its own replicate's output slots.
    void run(std::function<void(int, CascadeField const&)> const& fn) const;
    // Serial reference sweep; same fields in the same slots.
    void run_serial(std::function<void(int, CascadeField const&)> const& fn) const;
};

} // namespace cascadelab
