// Scaling-exponent estimation and moment-consistency checks.
//
// estimate_tau fits log partition sums against level (ensemble-averaged
// before the log, jackknife standard errors).  The consistency checks
// evaluate, in closed form, the moment identities two generators must
// satisfy to describe one measure: commutation and matching star moments
// for every rho, plus the adjacent-cell second-moment system at the joint
// partition.  Verdicts compare residuals against a caller tolerance.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/generator.hpp"

namespace cascadelab {

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Sum of masses^q; zero cells contribute 0 for q > 0 and every cell counts
// once at q = 0.  Throws ZeroCellError for q < 0 on a field with zero cells.
double partition_function(CascadeField const& field, double q);

struct TauEstimate {
    std::vector<double> q_grid;
    std::vector<double> tau_hat;      // NaN where partition sums are unusable
    std::vector<double> std_error;    // jackknife over replicates
    std::vector<double> max_residual; // worst per-level regression deviation
    int j_min = 0;
    int j_max = 0;
    std::vector<std::string> warnings;
};

// Regresses log_c(c^-j S_j(q)) on j over [j_min, j_max]; tau_hat = -slope - 1.
// S_j comes from coarsening each replicate's finest field, so S_j(1) is the
// conserved total mass and tau_hat(1) vanishes to rounding.
TauEstimate estimate_tau(Ensemble const& ensemble, std::vector<double> const& q_grid,
                         int j_min, int j_max);

// E M^2 = B / (1 - A) with A = sum E w_i^2, B = sum_{i != j} E w_i w_j.
// Throws DivergentSecondMomentError when A >= 1 (no finite fixed point).
double total_mass_second_moment(Generator const& gen);

// Per-component sample means of w_alpha^rho with standard errors.
std::vector<MomentEstimate> empirical_weight_moments(Generator const& gen, double rho,
                                                     int sample_count, RngStream& rng);

// Monte Carlo E[mu(cell r) mu(cell r+1)] at the given level, r = 0..c^j - 2.
std::vector<MomentEstimate> adjacent_cell_moments(Ensemble const& ensemble, int level);

// Residual bundle for the two-generator consistency checks.  A lemma2 report
// fills the moment-vector block; an xy report fills the second-moment block.
// Unfilled scalars stay NaN and unfilled vectors stay empty.
struct MomentConsistencyReport {
    std::string check; // "lemma2" or "xy"
    double rho = std::numeric_limits<double>::quiet_NaN();
    int c1 = 0;
    int c2 = 0;
    bool swapped = false; // xy orders the pair so c1 <= c2

    std::vector<double> xi_moments;  // E xi_alpha^rho
    std::vector<double> eta_moments; // E eta_beta^rho
    double commutation_residual = std::numeric_limits<double>::quiet_NaN();
    long commutation_witness = -1;
    double constancy_residual = std::numeric_limits<double>::quiet_NaN();
    double eq19_residual = std::numeric_limits<double>::quiet_NaN();
    double eq19_printed_residual = std::numeric_limits<double>::quiet_NaN();
    double eq23_residual = std::numeric_limits<double>::quiet_NaN();

    double v_a = std::numeric_limits<double>::quiet_NaN();
    double v_b = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> a_vec; // E xi_{a-1} xi_a over (E xi_0)^2
    std::vector<double> b_vec;
    std::vector<double> x_vec; // compact assembly from v_b, a_vec, b_vec
    std::vector<double> y_vec; // compact assembly from v_a, a_vec, b_vec
    std::vector<double> x_direct; // adjacent-cell moments, eta-first split
    std::vector<double> y_direct; // adjacent-cell moments, xi-first split
    double xy_residual = std::numeric_limits<double>::quiet_NaN();

    double m2_xi = std::numeric_limits<double>::quiet_NaN(); // NaN when divergent
    double m2_eta = std::numeric_limits<double>::quiet_NaN();

    bool common_base = false; // c1 and c2 are powers of one integer
    std::uint64_t base_p = 0;
    std::uint64_t base_k1 = 0;
    std::uint64_t base_k2 = 0;

    bool rho_within_qplus = true;
    bool locally_positive = true;
    bool consistent = false;
    double tolerance = 0.0;
    std::vector<std::string> warnings;
};

// Moment-vector commutation, component constancy, and the matched
// star-moment growth rates at one rho > 1.  Constancy and the
// component-ratio residual enter the verdict only when c1 and c2 share no
// integer power base; with a common base the measure can be shared without
// them (tensor powers of one generator).
MomentConsistencyReport lemma2_moment_check(Generator const& gen1, Generator const& gen2,
                                            double rho, double tolerance = 1e-12);

// Expands E[mu(cell r-1) mu(cell r)] over the joint c1*c2 partition under
// both split orders in closed form; the verdict compares those expansions
// entrywise.  The compact quantities v_a, v_b, a_vec, b_vec, x_vec, y_vec
// are reported with both sides normalized by squared component means.
MomentConsistencyReport second_moment_xy_check(Generator const& gen1, Generator const& gen2,
                                               double tolerance = 1e-12);

// True iff E w_0^2 / (E w_0)^2 = 1 within 1e-12: zero component variance,
// which forces the constant generator.
bool lebesgue_test(Generator const& gen);

} // namespace cascadelab
