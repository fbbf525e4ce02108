#include "cascadelab/cascade.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cascadelab/errors.hpp"
#include "cascadelab/limits.hpp"

namespace cascadelab {

std::size_t cell_limit() {
    static std::size_t const limit = [] {
        if (char const* env = std::getenv("CASCADELAB_MAX_CELLS")) {
            char* end = nullptr;
            unsigned long long const v = std::strtoull(env, &end, 10);
            if (end && *end == '\0' && v > 0)
                return static_cast<std::size_t>(v);
            throw ConfigError("CASCADELAB_MAX_CELLS is not a positive integer");
        }
        return static_cast<std::size_t>(1) << 26;
    }();
    return limit;
}

namespace {

std::size_t checked_cell_count(int branching, int level) {
    if (level < 0)
        throw std::invalid_argument("level must be >= 0");
    std::size_t cells = 1;
    for (int j = 0; j < level; ++j) {
        if (cells > cell_limit() / static_cast<std::size_t>(branching))
            throw CellLimitError("grid of " + std::to_string(branching) + "^" +
                                 std::to_string(level) + " cells exceeds the cell limit");
        cells *= static_cast<std::size_t>(branching);
    }
    if (cells > cell_limit())
        throw CellLimitError("grid exceeds the cell limit");
    return cells;
}

// One level expansion: children of parent cell alpha get parent * w_i, with
// the weight vector drawn from the (seed, replicate, level, alpha) stream.
// Parallelizable over parents because every stream is independent and each
// parent writes a disjoint child block.
template <bool Parallel>
CascadeField simulate_impl(Generator const& gen, int level, StreamKey const& key) {
    int const c = gen.branching();
    checked_cell_count(c, level);

    std::vector<double> parents{1.0};
    std::vector<double> children;
    for (int j = 0; j < level; ++j) {
        auto const parent_count = static_cast<long long>(parents.size());
        children.resize(parents.size() * static_cast<std::size_t>(c));
#pragma omp parallel for schedule(static) if (Parallel && parent_count >= 1024)
        for (long long alpha = 0; alpha < parent_count; ++alpha) {
            RngStream rng = cell_stream(key, static_cast<std::uint32_t>(j),
                                        static_cast<std::uint64_t>(alpha));
            auto const base = static_cast<std::size_t>(alpha) * static_cast<std::size_t>(c);
            gen.sample_weights(rng, std::span<double>(children.data() + base,
                                                      static_cast<std::size_t>(c)));
            double const parent = parents[static_cast<std::size_t>(alpha)];
            for (int i = 0; i < c; ++i)
                children[base + static_cast<std::size_t>(i)] *= parent;
        }
        parents.swap(children);
    }

    CascadeField field;
    field.branching = c;
    field.level = level;
    field.masses = std::move(parents);
    return field;
}

} // namespace

CascadeField simulate(Generator const& gen, int level, StreamKey const& key) {
    return simulate_impl<true>(gen, level, key);
}

CascadeField simulate_reference(Generator const& gen, int level, StreamKey const& key) {
    return simulate_impl<false>(gen, level, key);
}

CascadeField coarsen(CascadeField const& field, int steps) {
    if (steps < 0 || steps > field.level)
        throw std::invalid_argument("coarsen steps must lie in [0, level]");
    if (steps == 0)
        return field;
    std::size_t block = 1;
    for (int j = 0; j < steps; ++j)
        block *= static_cast<std::size_t>(field.branching);

    CascadeField out;
    out.branching = field.branching;
    out.level = field.level - steps;
    out.masses.resize(field.masses.size() / block);
    for (std::size_t b = 0; b < out.masses.size(); ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < block; ++i)
            acc += field.masses[b * block + i];
        out.masses[b] = acc;
    }
    return out;
}

double total_mass(CascadeField const& field) {
    double acc = 0.0;
    for (double m : field.masses)
        acc += m;
    return acc;
}

Ensemble::Ensemble(Generator gen, int level_in, int replicates_in, std::uint64_t seed)
    : generator(std::move(gen)), level(level_in), replicates(replicates_in), master_seed(seed) {
    if (replicates < 1)
        throw std::invalid_argument("ensemble needs at least one replicate");
    checked_cell_count(generator.branching(), level);
}

CascadeField Ensemble::field(int replicate) const {
    if (replicate < 0 || replicate >= replicates)
        throw std::out_of_range("replicate index out of range");
    // Replicate fields are simulated serially: ensemble sweeps parallelize
    // across replicates, and nesting would perturb nothing but scheduling.
    return simulate_reference(generator, level,
                              StreamKey{master_seed, static_cast<std::uint64_t>(replicate)});
}

void Ensemble::run(std::function<void(int, CascadeField const&)> const& fn) const {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < replicates; ++k)
        fn(k, field(k));
}

void Ensemble::run_serial(std::function<void(int, CascadeField const&)> const& fn) const {
    for (int k = 0; k < replicates; ++k)
        fn(k, field(k));
}

} // namespace cascadelab
