// Weight generators for independent random cascades.
//
// A generator is a random vector W = (w_0 .. w_{c-1}) with E sum w_i = 1.
// The normalized component w* picks c*w_i with probability 1/c, so E w* = 1.
// All closed-form moments run through log-space star moments, which keeps
// root finding stable out to |q| = 64.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "cascadelab/rng.hpp"

namespace cascadelab {

enum class Family {
    Deterministic,
    DiscreteIID,
    Lognormal,
    LogPoisson,
    Dirichlet,
    OneHot,
    Product,
};

std::string family_name(Family family);

// One atom of a discrete normalized-component law.
struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

// Tangency points of support lines through the origin to tau_heuristic.
// Outside [q_minus, q_plus] the heuristic exponent stops being the true one.
struct CriticalExponents {
    double q_minus = 0.0; // <= 0, may be -inf
    double q_plus = 1.0;  // >= 1, may be +inf
};

class Generator {
  public:
    static Generator deterministic(int branching);
    static Generator discrete_iid(int branching, std::vector<Atom> atoms);
    static Generator lognormal(int branching, double sigma2);
    static Generator log_poisson(int branching, double lambda, double beta);
    static Generator dirichlet(std::vector<double> concentration);
    static Generator one_hot(int branching);

    Family family() const { return family_; }
    int branching() const { return c_; }
    bool components_iid() const;
    // True when sum w_i == 1 on every sample.
    bool conservative() const;
    // True when P(w_i > 0) = 1 for every component.
    bool locally_positive() const;

    // E w_alpha; exact closed form.
    double component_mean(int alpha) const;
    // E w_alpha^rho for rho >= 0 (0^0 := 1).
    double component_moment(int alpha, double rho) const;
    // E w_i w_j; i == j yields the component second moment.
    double pair_moment(int i, int j) const;

    // E w*^rho for rho >= 0; exactly 1 at rho in {0, 1}.
    double star_moment(double rho) const;
    // ln E w*^q wherever the moment is finite; throws DivergentMomentError
    // outside the domain.  Exactly 0 at q in {0, 1}.
    double log_star_moment(double q) const;
    double log_star_moment_derivative(double q) const;
    // E w* ln w*; the nondegeneracy functional.
    double star_log_moment() const;
    // Infimum of the finite-moment q range (-inf, 0, or -min concentration).
    double moment_domain_min() const;

    // tau^H(q) = q - log_c E w*^q - 1.
    double tau_heuristic(double q) const;
    double tau_heuristic_derivative(double q) const;
    // E w* log_c w* < 1: the cascade has a nontrivial limit measure.
    bool nondegenerate() const;
    // Bracket-and-bisect roots of tau^H(q) - q tau^H'(q); scan doubles out to
    // |q| = 64 and reports +-inf beyond.
    CriticalExponents critical_exponents() const;

    void sample_weights(RngStream& rng, std::span<double> out) const;
    std::vector<double> sample_weights(RngStream& rng) const;

    std::string describe() const;

    friend Generator tensor_product(Generator const& lhs, Generator const& rhs);

  private:
    Generator() = default;

    Family family_ = Family::Deterministic;
    int c_ = 2;
    double sigma2_ = 0.0;                // lognormal
    double lambda_ = 0.0;                // log-poisson
    double beta_ = 0.0;                  // log-poisson
    double amp_ = 0.0;                   // log-poisson e^{-lambda (beta - 1)}
    std::vector<Atom> atoms_;            // discrete, normalized to mean 1
    std::vector<double> atom_cdf_;       // discrete sampling table
    std::vector<double> concentration_;  // dirichlet
    double conc_sum_ = 0.0;              // dirichlet
    std::vector<Generator> factors_;     // product (exactly two)
};

// Composite generator on c1*c2 cells: component c2*alpha + beta carries
// lhs_alpha * rhs_beta with independent rhs copies per alpha.  Component
// moments multiply; the two-factor product generates the same measure as
// running lhs one level then rhs one level.
Generator tensor_product(Generator const& lhs, Generator const& rhs);

} // namespace cascadelab
