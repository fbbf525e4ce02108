// Field simulation: exactness on degenerate laws, c-adic layout, coarsening
// contracts, bitwise parallel/serial agreement, and martingale sanity.
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cascadelab/cascade.hpp"
#include "cascadelab/errors.hpp"
#include "cascadelab/generator.hpp"

using namespace cascadelab;

namespace {

std::vector<Atom> half_atoms() { return {{0.5, 0.5}, {1.5, 0.5}}; }

std::vector<Generator> sim_families() {
    return {
        Generator::deterministic(2),
        Generator::discrete_iid(2, half_atoms()),
        Generator::lognormal(2, 0.3),
        Generator::log_poisson(2, 0.5, 0.8),
        Generator::dirichlet({1.0, 2.0}),
        Generator::one_hot(3),
    };
}

} // namespace

TEST_CASE("level zero is the unit mass") {
    for (Generator const& g : sim_families()) {
        CascadeField const f = simulate(g, 0, {123, 0});
        CHECK(f.level == 0);
        CHECK(f.masses.size() == 1);
        CHECK(f.masses[0] == 1.0);
        CHECK(total_mass(f) == 1.0);
    }
}

TEST_CASE("constant split fills uniform dyadic cells exactly") {
    CascadeField const f = simulate(Generator::deterministic(2), 3, {7, 0});
    CHECK(f.masses.size() == 8);
    for (double m : f.masses) CHECK(m == 0.125);
    CHECK(total_mass(f) == 1.0);

    CascadeField const g = simulate(Generator::deterministic(4), 2, {7, 0});
    CHECK(g.masses.size() == 16);
    for (double m : g.masses) CHECK(m == 0.0625);
    CHECK(total_mass(g) == 1.0);
}

TEST_CASE("non-dyadic constant split stays within rounding of uniform") {
    CascadeField const f = simulate(Generator::deterministic(3), 4, {7, 0});
    CHECK(f.masses.size() == 81);
    for (double m : f.masses) CHECK(m == doctest::Approx(1.0 / 81.0).epsilon(1e-14));
    CHECK(total_mass(f) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("one-hot cascade is a single unit cell") {
    Generator const g = Generator::one_hot(3);
    for (int rep = 0; rep < 5; ++rep) {
        CascadeField const f = simulate(g, 4, {55, static_cast<std::uint64_t>(rep)});
        int units = 0, zeros = 0;
        for (double m : f.masses) {
            if (m == 1.0) ++units;
            if (m == 0.0) ++zeros;
        }
        CHECK(units == 1);
        CHECK(zeros == 80);
    }
}

TEST_CASE("cell layout is the c-adic expansion of the draw tree") {
    Generator const g = Generator::discrete_iid(2, half_atoms());
    StreamKey const key{901, 4};
    CascadeField const f = simulate(g, 2, key);

    RngStream root = cell_stream(key, 0, 0);
    std::vector<double> const w0 = g.sample_weights(root);
    for (int alpha = 0; alpha < 2; ++alpha) {
        RngStream child = cell_stream(key, 1, static_cast<std::uint64_t>(alpha));
        std::vector<double> const w1 = g.sample_weights(child);
        for (int i = 0; i < 2; ++i) {
            CHECK(f.masses[static_cast<std::size_t>(2 * alpha + i)] ==
                  w0[static_cast<std::size_t>(alpha)] * w1[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("coarsening sums consecutive blocks in ascending order") {
    CascadeField f;
    f.branching = 2;
    f.level = 2;
    f.masses = {0.1, 0.3, 0.2, 0.4};

    CascadeField const once = coarsen(f, 1);
    CHECK(once.level == 1);
    CHECK(once.masses.size() == 2);
    CHECK(once.masses[0] == 0.1 + 0.3);
    CHECK(once.masses[1] == 0.2 + 0.4);

    CascadeField const all = coarsen(f, 2);
    CHECK(all.level == 0);
    CHECK(all.masses.size() == 1);
    CHECK(all.masses[0] == ((0.1 + 0.3) + 0.2) + 0.4);

    CascadeField const same = coarsen(f, 0);
    CHECK(same.masses == f.masses);

    CHECK_THROWS_AS(coarsen(f, -1), std::invalid_argument);
    CHECK_THROWS_AS(coarsen(f, 3), std::invalid_argument);
}

TEST_CASE("coarsening one step matches stopping the recursion early") {
    StreamKey const key{31, 2};

    // Dyadic constant and one-hot draws are exact in floating point.
    for (Generator const& g : {Generator::deterministic(2), Generator::one_hot(3)}) {
        CascadeField const deep = simulate(g, 5, key);
        CascadeField const stop = simulate(g, 4, key);
        CHECK(coarsen(deep, 1).masses == stop.masses);
    }

    // Conservative draws agree up to one rounding of the block sum.
    Generator const dir = Generator::dirichlet({1.5, 2.5});
    CascadeField const deep = simulate(dir, 6, key);
    CascadeField const stop = simulate(dir, 5, key);
    CascadeField const coarse = coarsen(deep, 1);
    REQUIRE(coarse.masses.size() == stop.masses.size());
    for (std::size_t i = 0; i < stop.masses.size(); ++i)
        CHECK(coarse.masses[i] == doctest::Approx(stop.masses[i]).epsilon(1e-13));
}

TEST_CASE("coarsening preserves total mass up to rounding") {
    Generator const g = Generator::lognormal(2, 0.4);
    CascadeField const f = simulate(g, 8, {77, 0});
    double const tot = total_mass(f);
    for (int steps : {1, 3, 8}) {
        CHECK(total_mass(coarsen(f, steps)) == doctest::Approx(tot).epsilon(1e-12));
    }
}

TEST_CASE("parallel and serial simulation agree bitwise") {
#ifdef _OPENMP
    int const saved = omp_get_max_threads();
    omp_set_num_threads(4);
#endif
    StreamKey const key{2024, 3};
    for (Generator const& g : sim_families()) {
        CAPTURE(g.describe());
        CascadeField const par = simulate(g, 6, key);
        CascadeField const ser = simulate_reference(g, 6, key);
        CHECK(par.masses == ser.masses);
    }
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
}

TEST_CASE("replicates are pure functions of the key") {
    Generator const g = Generator::lognormal(2, 0.3);
    CascadeField const a = simulate(g, 6, {42, 1});
    CascadeField const b = simulate(g, 6, {42, 1});
    CascadeField const c = simulate(g, 6, {42, 2});
    CascadeField const d = simulate(g, 6, {43, 1});
    CHECK(a.masses == b.masses);
    CHECK(a.masses != c.masses);
    CHECK(a.masses != d.masses);
}

TEST_CASE("ensemble replicas match direct simulation") {
    Generator const g = Generator::discrete_iid(2, half_atoms());
    Ensemble const ens(g, 5, 8, 99);
    CHECK(ens.field(3).masses == simulate_reference(g, 5, {99, 3}).masses);
    CHECK(ens.field(0).masses == simulate_reference(g, 5, {99, 0}).masses);
    CHECK_THROWS_AS(ens.field(-1), std::out_of_range);
    CHECK_THROWS_AS(ens.field(8), std::out_of_range);
}

TEST_CASE("parallel and serial ensemble sweeps fill identical slots") {
    Generator const g = Generator::lognormal(3, 0.2);
    Ensemble const ens(g, 4, 16, 5150);
    std::vector<double> par(16, 0.0), ser(16, 0.0);
    ens.run([&](int k, CascadeField const& f) { par[static_cast<std::size_t>(k)] = total_mass(f); });
    ens.run_serial(
        [&](int k, CascadeField const& f) { ser[static_cast<std::size_t>(k)] = total_mass(f); });
    CHECK(par == ser);
}

TEST_CASE("mean total mass stays near one") {
    for (Generator const& g : sim_families()) {
        CAPTURE(g.describe());
        Ensemble const ens(g, 7, 3000, 8080);
        double sum = 0.0, sumsq = 0.0;
        ens.run_serial([&](int, CascadeField const& f) {
            double const t = total_mass(f);
            sum += t;
            sumsq += t * t;
        });
        double const mean = sum / 3000.0;
        double const se = std::sqrt(std::max(0.0, sumsq / 3000.0 - mean * mean) / 3000.0);
        CHECK(std::abs(mean - 1.0) <= std::max(3.0 * se, 1e-12));
    }
}

TEST_CASE("cell count guards") {
    Generator const g = Generator::deterministic(2);
    CHECK_THROWS_AS(simulate(g, 27, {1, 0}), CellLimitError);
    CHECK_THROWS_AS(simulate(g, -1, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble(g, 27, 2, 1), CellLimitError);
    CHECK_THROWS_AS(Ensemble(g, 4, 0, 1), std::invalid_argument);
}
