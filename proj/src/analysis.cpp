#include "cascadelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cascadelab/errors.hpp"
#include "cascadelab/numbertheory.hpp"

namespace cascadelab {

namespace {

double cell_power(double m, double q) {
    if (q == 0.0)
        return 1.0;
    if (q == 1.0)
        return m;
    if (q == 2.0)
        return m * m;
    return std::pow(m, q);
}

// Non-throwing partition sum for ensemble sweeps: a zero cell at negative q
// propagates +inf into the estimate instead of aborting a parallel region.
double partition_sum(CascadeField const& field, double q) {
    if (q == 0.0)
        return static_cast<double>(field.masses.size());
    double acc = 0.0;
    for (double m : field.masses) {
        if (m == 0.0) {
            if (q < 0.0)
                return std::numeric_limits<double>::infinity();
            continue;
        }
        acc += cell_power(m, q);
    }
    return acc;
}

std::string format_warning(char const* fmt, double value) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, value);
    return buf;
}

double constancy_deviation(std::vector<double> const& v) {
    auto const [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo - 1.0;
}

double square(double x) {
    return x * x;
}

} // namespace

double partition_function(CascadeField const& field, double q) {
    if (q < 0.0) {
        for (double m : field.masses)
            if (m == 0.0)
                throw ZeroCellError(format_warning("zero cell mass under exponent q = %g", q));
    }
    return partition_sum(field, q);
}

TauEstimate estimate_tau(Ensemble const& ensemble, std::vector<double> const& q_grid,
                         int j_min, int j_max) {
    if (q_grid.empty())
        throw std::invalid_argument("q grid is empty");
    if (j_min < 0 || j_max > ensemble.level || j_min >= j_max)
        throw std::invalid_argument("need 0 <= j_min < j_max <= simulated level");
    if (!ensemble.generator.locally_positive())
        for (double q : q_grid)
            if (q < 0.0)
                throw std::invalid_argument(
                    "negative q rejected: zero-mass cells make partition sums diverge");

    double const nan = std::numeric_limits<double>::quiet_NaN();
    int const level_count = j_max - j_min + 1;
    int const q_count = static_cast<int>(q_grid.size());
    int const reps = ensemble.replicates;

    // sums[(k * level_count + ji) * q_count + iq] = S_{j_min + ji}(q_iq) of
    // replicate k; each replicate coarsens its own finest field stepwise.
    std::vector<double> sums(static_cast<std::size_t>(reps) * level_count * q_count);
    ensemble.run([&](int k, CascadeField const& finest) {
        CascadeField cur = coarsen(finest, ensemble.level - j_max);
        for (int j = j_max;; --j) {
            double* slot =
                sums.data() + (static_cast<std::size_t>(k) * level_count + (j - j_min)) * q_count;
            for (int iq = 0; iq < q_count; ++iq)
                slot[iq] = partition_sum(cur, q_grid[iq]);
            if (j == j_min)
                break;
            cur = coarsen(cur, 1);
        }
    });

    // Replicate sums are reduced serially in replicate order, so the result
    // is independent of how the sweep above was scheduled.
    std::vector<double> total(static_cast<std::size_t>(level_count) * q_count, 0.0);
    for (int k = 0; k < reps; ++k)
        for (int ji = 0; ji < level_count; ++ji)
            for (int iq = 0; iq < q_count; ++iq)
                total[static_cast<std::size_t>(ji) * q_count + iq] +=
                    sums[(static_cast<std::size_t>(k) * level_count + ji) * q_count + iq];

    TauEstimate out;
    out.q_grid = q_grid;
    out.j_min = j_min;
    out.j_max = j_max;
    out.tau_hat.assign(q_grid.size(), nan);
    out.std_error.assign(q_grid.size(), nan);
    out.max_residual.assign(q_grid.size(), nan);

    double const log_c = std::log(static_cast<double>(ensemble.generator.branching()));
    double const x_bar = 0.5 * (j_min + j_max);
    double x_var = 0.0;
    for (int ji = 0; ji < level_count; ++ji)
        x_var += square(j_min + ji - x_bar);

    auto tau_from_means = [&](auto&& mean_at, double* residual_out) {
        double y[64];
        double y_bar = 0.0;
        for (int ji = 0; ji < level_count; ++ji) {
            double const s = mean_at(ji);
            if (!(s > 0.0) || !std::isfinite(s))
                return nan;
            y[ji] = std::log(s) / log_c - (j_min + ji);
            y_bar += y[ji];
        }
        y_bar /= level_count;
        double cov = 0.0;
        for (int ji = 0; ji < level_count; ++ji)
            cov += (j_min + ji - x_bar) * (y[ji] - y_bar);
        double const slope = cov / x_var;
        if (residual_out) {
            double worst = 0.0;
            for (int ji = 0; ji < level_count; ++ji)
                worst = std::max(worst,
                                 std::abs(y[ji] - (y_bar + slope * (j_min + ji - x_bar))));
            *residual_out = worst;
        }
        return -slope - 1.0;
    };

    if (level_count > 64)
        throw std::invalid_argument("level range wider than 64 levels");

    int usable = 0;
    for (int iq = 0; iq < q_count; ++iq) {
        auto full_mean = [&](int ji) {
            return total[static_cast<std::size_t>(ji) * q_count + iq] / reps;
        };
        double residual = nan;
        double const tau = tau_from_means(full_mean, &residual);
        out.tau_hat[iq] = tau;
        out.max_residual[iq] = residual;
        if (std::isnan(tau)) {
            out.warnings.push_back(
                format_warning("q = %g: partition sums not positive and finite", q_grid[iq]));
            continue;
        }
        ++usable;

        if (reps >= 2) {
            // Leave-one-replicate-out slopes; the jackknife variance scales
            // the spread back up by (R - 1) / R.
            double jack_sum = 0.0;
            double jack_sumsq = 0.0;
            int jack_ok = 0;
            for (int k = 0; k < reps; ++k) {
                auto loo_mean = [&](int ji) {
                    std::size_t const at = static_cast<std::size_t>(ji) * q_count + iq;
                    return (total[at] -
                            sums[(static_cast<std::size_t>(k) * level_count + ji) * q_count + iq]) /
                           (reps - 1);
                };
                double const t = tau_from_means(loo_mean, nullptr);
                if (std::isnan(t))
                    continue;
                jack_sum += t;
                jack_sumsq += t * t;
                ++jack_ok;
            }
            if (jack_ok == reps) {
                double const mean = jack_sum / reps;
                double const spread = std::max(0.0, jack_sumsq / reps - mean * mean);
                out.std_error[iq] = std::sqrt(spread * (reps - 1));
            } else {
                out.warnings.push_back(format_warning(
                    "q = %g: jackknife skipped (leave-one-out sums not positive)", q_grid[iq]));
            }
        } else {
            out.warnings.push_back(
                format_warning("q = %g: standard error needs at least 2 replicates", q_grid[iq]));
        }
    }
    if (usable == 0)
        throw std::runtime_error("no q in the grid produced usable partition sums");

    try {
        CriticalExponents const crit = ensemble.generator.critical_exponents();
        for (double q : q_grid)
            if (q < crit.q_minus || q > crit.q_plus)
                out.warnings.push_back(format_warning(
                    "q = %g lies outside (q_minus, q_plus); the fitted exponent is unreliable",
                    q));
    } catch (std::exception const& e) {
        out.warnings.push_back(std::string("critical exponents unavailable: ") + e.what());
    }
    return out;
}

double total_mass_second_moment(Generator const& gen) {
    int const c = gen.branching();
    double a = 0.0;
    for (int i = 0; i < c; ++i)
        a += gen.component_moment(i, 2.0);
    if (a >= 1.0 - 1e-12)
        throw DivergentSecondMomentError(
            format_warning("sum of component second moments is %.17g >= 1", a));
    double b = 0.0;
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < c; ++j)
            if (i != j)
                b += gen.pair_moment(i, j);
    return b / (1.0 - a);
}

std::vector<MomentEstimate> empirical_weight_moments(Generator const& gen, double rho,
                                                     int sample_count, RngStream& rng) {
    if (sample_count < 2)
        throw std::invalid_argument("need at least 2 samples");
    if (rho < 0.0)
        throw std::invalid_argument("rho must be >= 0");
    int const c = gen.branching();
    std::vector<double> sum(c, 0.0);
    std::vector<double> sumsq(c, 0.0);
    std::vector<double> w(c);
    for (int s = 0; s < sample_count; ++s) {
        gen.sample_weights(rng, w);
        for (int i = 0; i < c; ++i) {
            double const v = cell_power(w[i], rho);
            sum[i] += v;
            sumsq[i] += v * v;
        }
    }
    std::vector<MomentEstimate> out(c);
    for (int i = 0; i < c; ++i) {
        double const mean = sum[i] / sample_count;
        double const var =
            std::max(0.0, (sumsq[i] - sample_count * mean * mean) / (sample_count - 1));
        out[i] = {mean, std::sqrt(var / sample_count)};
    }
    return out;
}

std::vector<MomentEstimate> adjacent_cell_moments(Ensemble const& ensemble, int level) {
    if (level < 0 || level > ensemble.level)
        throw std::invalid_argument("level must lie in [0, simulated level]");
    std::size_t cells = 1;
    for (int j = 0; j < level; ++j)
        cells *= static_cast<std::size_t>(ensemble.generator.branching());
    if (cells < 2)
        return {};
    std::size_t const pairs = cells - 1;
    std::size_t const reps = static_cast<std::size_t>(ensemble.replicates);
    if (pairs > (static_cast<std::size_t>(1) << 27) / reps)
        throw std::length_error("replicates x adjacent pairs exceeds the accumulation bound");

    std::vector<double> prod(reps * pairs);
    ensemble.run([&](int k, CascadeField const& finest) {
        CascadeField const cur = coarsen(finest, ensemble.level - level);
        double* slot = prod.data() + static_cast<std::size_t>(k) * pairs;
        for (std::size_t p = 0; p < pairs; ++p)
            slot[p] = cur.masses[p] * cur.masses[p + 1];
    });

    std::vector<MomentEstimate> out(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::size_t k = 0; k < reps; ++k) {
            double const v = prod[k * pairs + p];
            sum += v;
            sumsq += v * v;
        }
        double const mean = sum / static_cast<double>(reps);
        double se = std::numeric_limits<double>::quiet_NaN();
        if (reps >= 2) {
            double const var = std::max(
                0.0, (sumsq - static_cast<double>(reps) * mean * mean) / (static_cast<double>(reps) - 1.0));
            se = std::sqrt(var / static_cast<double>(reps));
        }
        out[p] = {mean, se};
    }
    return out;
}

namespace {

// Shared tail of both consistency checks: power-base relation, total-mass
// second moments, positivity flag.
void fill_common(MomentConsistencyReport& rep, Generator const& gen1, Generator const& gen2) {
    rep.locally_positive = gen1.locally_positive() && gen2.locally_positive();
    if (auto const base = numbertheory::common_power_base(
            static_cast<std::uint64_t>(rep.c1), static_cast<std::uint64_t>(rep.c2))) {
        rep.common_base = true;
        rep.base_p = base->p;
        rep.base_k1 = base->k1;
        rep.base_k2 = base->k2;
    }
    try {
        rep.m2_xi = total_mass_second_moment(gen1);
    } catch (DivergentSecondMomentError const&) {
        rep.warnings.push_back("first generator: total-mass second moment diverges");
    }
    try {
        rep.m2_eta = total_mass_second_moment(gen2);
    } catch (DivergentSecondMomentError const&) {
        rep.warnings.push_back("second generator: total-mass second moment diverges");
    }
    if (!gen1.nondegenerate() || !gen2.nondegenerate())
        rep.warnings.push_back(
            "a generator is degenerate: its limit measure vanishes, so shared-measure "
            "identities hold vacuously");
}

double star_growth_rate(Generator const& gen, double rho) {
    return gen.log_star_moment(rho) / std::log(static_cast<double>(gen.branching()));
}

// (E w_0^rho / (E w_0)^rho)^(1/ln c), the component-ratio growth rate; the
// exponent argument lets the caller reproduce the misprinted same-exponent
// variant alongside the corrected one.
double component_ratio_rate(Generator const& gen, double rho, double log_c) {
    double const num = std::log(gen.component_moment(0, rho));
    double const den = rho * std::log(gen.component_mean(0));
    return std::exp((num - den) / log_c);
}

} // namespace

MomentConsistencyReport lemma2_moment_check(Generator const& gen1, Generator const& gen2,
                                            double rho, double tolerance) {
    if (!(rho > 1.0))
        throw std::invalid_argument("rho must exceed 1");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");

    MomentConsistencyReport rep;
    rep.check = "lemma2";
    rep.rho = rho;
    rep.tolerance = tolerance;
    rep.c1 = gen1.branching();
    rep.c2 = gen2.branching();
    for (int a = 0; a < rep.c1; ++a)
        rep.xi_moments.push_back(gen1.component_moment(a, rho));
    for (int b = 0; b < rep.c2; ++b)
        rep.eta_moments.push_back(gen2.component_moment(b, rho));

    auto const com = numbertheory::commutes(rep.xi_moments, rep.eta_moments, tolerance);
    rep.commutation_residual = com.residual;
    rep.commutation_witness = com.witness;
    rep.constancy_residual =
        std::max(constancy_deviation(rep.xi_moments), constancy_deviation(rep.eta_moments));

    rep.eq23_residual = std::abs(star_growth_rate(gen1, rho) - star_growth_rate(gen2, rho));
    double const log_c1 = std::log(static_cast<double>(rep.c1));
    double const log_c2 = std::log(static_cast<double>(rep.c2));
    double const lhs = component_ratio_rate(gen1, rho, log_c1);
    rep.eq19_residual = std::abs(lhs - component_ratio_rate(gen2, rho, log_c2));
    rep.eq19_printed_residual = std::abs(lhs - component_ratio_rate(gen2, rho, log_c1));

    fill_common(rep, gen1, gen2);

    for (Generator const* gen : {&gen1, &gen2}) {
        try {
            CriticalExponents const crit = gen->critical_exponents();
            if (!(rho < crit.q_plus)) {
                rep.rho_within_qplus = false;
                rep.warnings.push_back(
                    format_warning("rho = %g is not below q_plus; the moment identities are "
                                   "outside their validity range",
                                   rho));
            }
        } catch (std::exception const& e) {
            rep.rho_within_qplus = false;
            rep.warnings.push_back(std::string("critical exponents unavailable: ") + e.what());
        }
    }

    // Commutation and matched star-moment rates are necessary whenever the
    // two generators share one measure.  Component constancy and the
    // component-ratio identity additionally require log c1 / log c2 to be
    // irrational, i.e. no common power base.
    bool ok = com.residual <= tolerance && rep.eq23_residual <= tolerance;
    if (!rep.common_base)
        ok = ok && rep.constancy_residual <= tolerance && rep.eq19_residual <= tolerance;
    rep.consistent = ok;
    return rep;
}

MomentConsistencyReport second_moment_xy_check(Generator const& gen1, Generator const& gen2,
                                               double tolerance) {
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    Generator const* first = &gen1;
    Generator const* second = &gen2;
    bool swapped = false;
    if (gen1.branching() > gen2.branching()) {
        std::swap(first, second);
        swapped = true;
    }
    Generator const& xi = *first;  // dim c1 <= c2
    Generator const& eta = *second;

    MomentConsistencyReport rep;
    rep.check = "xy";
    rep.rho = 2.0;
    rep.tolerance = tolerance;
    rep.swapped = swapped;
    rep.c1 = xi.branching();
    rep.c2 = eta.branching();

    double const xi_mean_sq = square(xi.component_mean(0));
    double const eta_mean_sq = square(eta.component_mean(0));
    for (int a = 0; a < rep.c1; ++a)
        rep.xi_moments.push_back(xi.component_moment(a, 2.0));
    for (int b = 0; b < rep.c2; ++b)
        rep.eta_moments.push_back(eta.component_moment(b, 2.0));
    rep.v_a = rep.xi_moments[0] / xi_mean_sq;
    rep.v_b = rep.eta_moments[0] / eta_mean_sq;
    for (int a = 1; a < rep.c1; ++a)
        rep.a_vec.push_back(xi.pair_moment(a - 1, a) / xi_mean_sq);
    for (int b = 1; b < rep.c2; ++b)
        rep.b_vec.push_back(eta.pair_moment(b - 1, b) / eta_mean_sq);

    // Compact assembly: with xi split first, the pair (r-1, r) shares the
    // xi cell unless r is a multiple of c2; with eta split first, it shares
    // the eta cell unless c1 divides r.
    int const dim = rep.c1 * rep.c2;
    for (int r = 1; r < dim; ++r) {
        int const a = r % rep.c1;
        rep.x_vec.push_back(a != 0 ? rep.v_b * rep.a_vec[a - 1] : rep.b_vec[r / rep.c1 - 1]);
        int const b = r % rep.c2;
        rep.y_vec.push_back(b != 0 ? rep.v_a * rep.b_vec[b - 1] : rep.a_vec[r / rep.c2 - 1]);
    }

    // Ground truth: adjacent-cell moments of the one-level joint split,
    // taken from the tensor generators themselves in both orders.
    Generator const xi_first = tensor_product(xi, eta);
    Generator const eta_first = tensor_product(eta, xi);
    double const norm = xi_mean_sq * eta_mean_sq;
    double residual = 0.0;
    for (int r = 1; r < dim; ++r) {
        double const y = xi_first.pair_moment(r - 1, r) / norm;
        double const x = eta_first.pair_moment(r - 1, r) / norm;
        rep.y_direct.push_back(y);
        rep.x_direct.push_back(x);
        residual = std::max(residual, std::abs(x - y));
    }
    rep.xy_residual = residual;

    fill_common(rep, xi, eta);
    rep.consistent = rep.xy_residual <= tolerance;
    return rep;
}

bool lebesgue_test(Generator const& gen) {
    double const v_a = gen.component_moment(0, 2.0) / square(gen.component_mean(0));
    return std::abs(v_a - 1.0) <= 1e-12;
}

} // namespace cascadelab
