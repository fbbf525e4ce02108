#include "cascadelab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "cascadelab/errors.hpp"
#include "cascadelab/limits.hpp"

namespace cascadelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double require_branching(int branching) {
    if (branching < 2)
        throw std::invalid_argument("generator branching must be >= 2");
    return std::log(static_cast<double>(branching));
}

// ln sum_i exp(terms[i]) with the usual max shift.
double log_sum_exp(std::span<double const> terms) {
    double m = -kInf;
    for (double t : terms)
        m = std::max(m, t);
    if (!std::isfinite(m))
        return m;
    double acc = 0.0;
    for (double t : terms)
        acc += std::exp(t - m);
    return m + std::log(acc);
}

} // namespace

std::string family_name(Family family) {
    switch (family) {
        case Family::Deterministic: return "deterministic";
        case Family::DiscreteIID: return "discrete";
        case Family::Lognormal: return "lognormal";
        case Family::LogPoisson: return "logpoisson";
        case Family::Dirichlet: return "dirichlet";
        case Family::OneHot: return "onehot";
        case Family::Product: return "tensor";
    }
    return "unknown";
}

Generator Generator::deterministic(int branching) {
    require_branching(branching);
    Generator g;
    g.family_ = Family::Deterministic;
    g.c_ = branching;
    return g;
}

Generator Generator::discrete_iid(int branching, std::vector<Atom> atoms) {
    require_branching(branching);
    if (atoms.empty())
        throw std::invalid_argument("discrete generator needs at least one atom");
    double prob_sum = 0.0;
    double mean = 0.0;
    for (auto const& a : atoms) {
        if (a.prob < 0.0 || a.value < 0.0)
            throw std::invalid_argument("discrete atoms need prob >= 0 and value >= 0");
        prob_sum += a.prob;
        mean += a.prob * a.value;
    }
    if (std::abs(prob_sum - 1.0) > 1e-9)
        throw std::invalid_argument("discrete atom probabilities must sum to 1");
    mean /= prob_sum;
    if (std::abs(mean - 1.0) > 1e-9)
        throw std::invalid_argument("discrete atom mean must be 1");
    // Exact renormalization: fp dust in the inputs must not leak into E w*.
    for (auto& a : atoms) {
        a.prob /= prob_sum;
        a.value /= mean;
    }
    Generator g;
    g.family_ = Family::DiscreteIID;
    g.c_ = branching;
    g.atoms_ = std::move(atoms);
    g.atom_cdf_.reserve(g.atoms_.size());
    double cum = 0.0;
    for (auto const& a : g.atoms_) {
        cum += a.prob;
        g.atom_cdf_.push_back(cum);
    }
    g.atom_cdf_.back() = 1.0;
    return g;
}

Generator Generator::lognormal(int branching, double sigma2) {
    require_branching(branching);
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("lognormal sigma2 must be > 0");
    Generator g;
    g.family_ = Family::Lognormal;
    g.c_ = branching;
    g.sigma2_ = sigma2;
    return g;
}

Generator Generator::log_poisson(int branching, double lambda, double beta) {
    require_branching(branching);
    if (!(lambda > 0.0) || lambda > 500.0)
        throw std::invalid_argument("logpoisson lambda must be in (0, 500]");
    if (!(beta > 0.0))
        throw std::invalid_argument("logpoisson beta must be > 0");
    Generator g;
    g.family_ = Family::LogPoisson;
    g.c_ = branching;
    g.lambda_ = lambda;
    g.beta_ = beta;
    g.amp_ = std::exp(-lambda * (beta - 1.0));
    return g;
}

Generator Generator::dirichlet(std::vector<double> concentration) {
    if (concentration.size() < 2)
        throw std::invalid_argument("dirichlet needs at least two concentrations");
    double sum = 0.0;
    for (double a : concentration) {
        if (!(a > 0.0))
            throw std::invalid_argument("dirichlet concentrations must be > 0");
        sum += a;
    }
    Generator g;
    g.family_ = Family::Dirichlet;
    g.c_ = static_cast<int>(concentration.size());
    g.concentration_ = std::move(concentration);
    g.conc_sum_ = sum;
    return g;
}

Generator Generator::one_hot(int branching) {
    require_branching(branching);
    Generator g;
    g.family_ = Family::OneHot;
    g.c_ = branching;
    return g;
}

Generator tensor_product(Generator const& lhs, Generator const& rhs) {
    long long const dim = static_cast<long long>(lhs.c_) * rhs.c_;
    if (dim > static_cast<long long>(cell_limit()))
        throw CellLimitError("tensor product dimension exceeds the cell limit");
    if (lhs.family_ == Family::Deterministic && rhs.family_ == Family::Deterministic)
        return Generator::deterministic(static_cast<int>(dim));
    Generator g;
    g.family_ = Family::Product;
    g.c_ = static_cast<int>(dim);
    g.factors_ = {lhs, rhs};
    return g;
}

bool Generator::components_iid() const {
    switch (family_) {
        case Family::Deterministic:
        case Family::DiscreteIID:
        case Family::Lognormal:
        case Family::LogPoisson:
            return true;
        default:
            return false;
    }
}

bool Generator::conservative() const {
    switch (family_) {
        case Family::Deterministic:
        case Family::Dirichlet:
        case Family::OneHot:
            return true;
        case Family::Product:
            return factors_[0].conservative() && factors_[1].conservative();
        default:
            return false;
    }
}

bool Generator::locally_positive() const {
    switch (family_) {
        case Family::OneHot:
            return false;
        case Family::DiscreteIID:
            return std::none_of(atoms_.begin(), atoms_.end(),
                                [](Atom const& a) { return a.value == 0.0; });
        case Family::Product:
            return factors_[0].locally_positive() && factors_[1].locally_positive();
        default:
            return true;
    }
}

double Generator::component_mean(int alpha) const {
    if (alpha < 0 || alpha >= c_)
        throw std::out_of_range("component index out of range");
    switch (family_) {
        case Family::Dirichlet:
            return concentration_[static_cast<std::size_t>(alpha)] / conc_sum_;
        case Family::Product: {
            int const c2 = factors_[1].c_;
            return factors_[0].component_mean(alpha / c2) * factors_[1].component_mean(alpha % c2);
        }
        default:
            return 1.0 / c_;
    }
}

double Generator::component_moment(int alpha, double rho) const {
    if (alpha < 0 || alpha >= c_)
        throw std::out_of_range("component index out of range");
    if (rho < 0.0)
        throw std::invalid_argument("component_moment requires rho >= 0");
    if (rho == 0.0)
        return 1.0;
    if (rho == 1.0)
        return component_mean(alpha);
    switch (family_) {
        case Family::Deterministic:
            return std::pow(1.0 / c_, rho);
        case Family::OneHot:
            return 1.0 / c_;
        case Family::Dirichlet: {
            double const a = concentration_[static_cast<std::size_t>(alpha)];
            double const total = conc_sum_;
            return std::exp(std::lgamma(a + rho) - std::lgamma(a) + std::lgamma(total) -
                            std::lgamma(total + rho));
        }
        case Family::Product: {
            int const c2 = factors_[1].c_;
            return factors_[0].component_moment(alpha / c2, rho) *
                   factors_[1].component_moment(alpha % c2, rho);
        }
        default:
            // iid components: w_alpha = w*/c.
            return std::exp(log_star_moment(rho) - rho * std::log(static_cast<double>(c_)));
    }
}

double Generator::pair_moment(int i, int j) const {
    if (i < 0 || i >= c_ || j < 0 || j >= c_)
        throw std::out_of_range("component index out of range");
    if (i == j)
        return component_moment(i, 2.0);
    switch (family_) {
        case Family::Dirichlet:
            return concentration_[static_cast<std::size_t>(i)] *
                   concentration_[static_cast<std::size_t>(j)] /
                   (conc_sum_ * (conc_sum_ + 1.0));
        case Family::OneHot:
            return 0.0;
        case Family::Product: {
            int const c2 = factors_[1].c_;
            int const a1 = i / c2;
            int const b1 = i % c2;
            int const a2 = j / c2;
            int const b2 = j % c2;
            if (a1 == a2)
                return factors_[0].pair_moment(a1, a1) * factors_[1].pair_moment(b1, b2);
            // Distinct lhs cells see independent rhs copies.
            return factors_[0].pair_moment(a1, a2) * factors_[1].component_mean(b1) *
                   factors_[1].component_mean(b2);
        }
        default:
            return component_mean(i) * component_mean(j);
    }
}

double Generator::moment_domain_min() const {
    switch (family_) {
        case Family::OneHot:
            return 0.0;
        case Family::DiscreteIID:
            return locally_positive() ? -kInf : 0.0;
        case Family::Dirichlet:
            return -*std::min_element(concentration_.begin(), concentration_.end());
        case Family::Product:
            return std::max(factors_[0].moment_domain_min(), factors_[1].moment_domain_min());
        default:
            return -kInf;
    }
}

double Generator::log_star_moment(double q) const {
    // Zeroth moment and the mean-1 normalization are construction invariants;
    // pinning them keeps tau anchors exact.
    if (q == 0.0 || q == 1.0)
        return 0.0;
    if (q < 0.0 && q <= moment_domain_min())
        throw DivergentMomentError("E w*^q diverges at q = " + std::to_string(q) + " for " +
                                   describe());
    double const lc = std::log(static_cast<double>(c_));
    switch (family_) {
        case Family::Deterministic:
            return 0.0;
        case Family::OneHot:
            return (q - 1.0) * lc;
        case Family::Lognormal:
            return 0.5 * sigma2_ * q * (q - 1.0);
        case Family::LogPoisson:
            return lambda_ * (std::pow(beta_, q) - 1.0) - lambda_ * q * (beta_ - 1.0);
        case Family::DiscreteIID: {
            std::vector<double> terms;
            terms.reserve(atoms_.size());
            for (auto const& a : atoms_)
                if (a.value > 0.0 && a.prob > 0.0)
                    terms.push_back(std::log(a.prob) + q * std::log(a.value));
            return log_sum_exp(terms);
        }
        case Family::Dirichlet: {
            std::vector<double> terms;
            terms.reserve(concentration_.size());
            for (double a : concentration_)
                terms.push_back(std::lgamma(a + q) - std::lgamma(a) + std::lgamma(conc_sum_) -
                                std::lgamma(conc_sum_ + q));
            return (q - 1.0) * lc + log_sum_exp(terms);
        }
        case Family::Product:
            return factors_[0].log_star_moment(q) + factors_[1].log_star_moment(q);
    }
    throw std::logic_error("unreachable family");
}

double Generator::log_star_moment_derivative(double q) const {
    if (q < 0.0 && q <= moment_domain_min())
        throw DivergentMomentError("E w*^q diverges at q = " + std::to_string(q) + " for " +
                                   describe());
    double const lc = std::log(static_cast<double>(c_));
    switch (family_) {
        case Family::Deterministic:
            return 0.0;
        case Family::OneHot:
            return lc;
        case Family::Lognormal:
            return sigma2_ * (q - 0.5);
        case Family::LogPoisson:
            return lambda_ * (std::pow(beta_, q) * std::log(beta_) - (beta_ - 1.0));
        case Family::DiscreteIID: {
            // Weighted mean of ln v under weights p v^q, shift-stabilized.
            double shift = -kInf;
            for (auto const& a : atoms_)
                if (a.value > 0.0 && a.prob > 0.0)
                    shift = std::max(shift, std::log(a.prob) + q * std::log(a.value));
            double norm = 0.0;
            double acc = 0.0;
            for (auto const& a : atoms_) {
                if (a.value == 0.0 || a.prob == 0.0)
                    continue;
                double const lv = std::log(a.value);
                double const w = std::exp(std::log(a.prob) + q * lv - shift);
                norm += w;
                acc += w * lv;
            }
            return acc / norm;
        }
        case Family::Dirichlet: {
            double shift = -kInf;
            std::vector<double> terms;
            terms.reserve(concentration_.size());
            for (double a : concentration_) {
                terms.push_back(std::lgamma(a + q) - std::lgamma(a) + std::lgamma(conc_sum_) -
                                std::lgamma(conc_sum_ + q));
                shift = std::max(shift, terms.back());
            }
            double norm = 0.0;
            double acc = 0.0;
            for (std::size_t k = 0; k < concentration_.size(); ++k) {
                double const w = std::exp(terms[k] - shift);
                norm += w;
                acc += w * (boost::math::digamma(concentration_[k] + q) -
                            boost::math::digamma(conc_sum_ + q));
            }
            return lc + acc / norm;
        }
        case Family::Product:
            return factors_[0].log_star_moment_derivative(q) +
                   factors_[1].log_star_moment_derivative(q);
    }
    throw std::logic_error("unreachable family");
}

double Generator::star_log_moment() const {
    return log_star_moment_derivative(1.0);
}

double Generator::star_moment(double rho) const {
    if (rho < 0.0)
        throw std::invalid_argument("star_moment requires rho >= 0");
    if (rho == 0.0 || rho == 1.0)
        return 1.0;
    return std::exp(log_star_moment(rho));
}

double Generator::tau_heuristic(double q) const {
    return q - log_star_moment(q) / std::log(static_cast<double>(c_)) - 1.0;
}

double Generator::tau_heuristic_derivative(double q) const {
    return 1.0 - log_star_moment_derivative(q) / std::log(static_cast<double>(c_));
}

bool Generator::nondegenerate() const {
    return star_log_moment() / std::log(static_cast<double>(c_)) < 1.0;
}

namespace {

// Gap between tau^H and its tangent line through the origin; roots are the
// critical exponents.  +inf stands in for moment blow-up at extreme q.
double tangency_gap(Generator const& gen, double q) {
    double const lc = std::log(static_cast<double>(gen.branching()));
    double const ls = gen.log_star_moment(q);
    double const d = gen.log_star_moment_derivative(q);
    double const g = (q * d - ls) / lc - 1.0;
    return std::isnan(g) ? kInf : g;
}

// Bisection on [a, b] with gap(a) and gap(b) of opposite sign.
double bisect_gap(Generator const& gen, double a, double b, double ga) {
    for (int iter = 0; iter < 200; ++iter) {
        double const mid = 0.5 * (a + b);
        if (std::abs(b - a) < 1e-13 * std::max(1.0, std::abs(mid)))
            return mid;
        double const gm = tangency_gap(gen, mid);
        if ((gm >= 0.0) == (ga >= 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

CriticalExponents Generator::critical_exponents() const {
    double const lc = std::log(static_cast<double>(c_));
    double const drift = star_log_moment() / lc;
    if (drift > 1.0 + 1e-12)
        throw std::domain_error("degenerate generator (E w* log_c w* > 1): " + describe());

    CriticalExponents out;

    // Positive side: gap(1) = drift - 1 <= 0; scan 2, 4, ..., 64.
    if (drift >= 1.0 - 1e-12) {
        out.q_plus = 1.0;
    } else {
        out.q_plus = kInf;
        double prev = 1.0;
        double gprev = drift - 1.0;
        for (double probe = 2.0; probe <= 64.0; probe *= 2.0) {
            double const g = tangency_gap(*this, probe);
            if (g >= 0.0) {
                out.q_plus = bisect_gap(*this, prev, probe, gprev);
                break;
            }
            prev = probe;
            gprev = g;
        }
    }

    // Negative side: gap(0) = -1; respect the finite-moment domain.
    double const domain_min = moment_domain_min();
    if (domain_min >= 0.0) {
        out.q_minus = 0.0;
    } else {
        out.q_minus = -kInf;
        double prev = 0.0;
        double gprev = -1.0;
        if (std::isfinite(domain_min)) {
            // Probes approach the divergence boundary geometrically.
            for (int t = 1; t <= 60; ++t) {
                double const probe = domain_min * (1.0 - std::pow(0.5, t));
                double const g = tangency_gap(*this, probe);
                if (g >= 0.0) {
                    out.q_minus = bisect_gap(*this, probe, prev, g);
                    break;
                }
                prev = probe;
                gprev = g;
            }
            if (!std::isfinite(out.q_minus))
                throw RootFindError("no tangency bracket found in (" +
                                    std::to_string(domain_min) + ", 0); last gap " +
                                    std::to_string(gprev));
        } else {
            for (double probe = -1.0; probe >= -64.0; probe *= 2.0) {
                double const g = tangency_gap(*this, probe);
                if (g >= 0.0) {
                    out.q_minus = bisect_gap(*this, probe, prev, g);
                    break;
                }
                prev = probe;
                gprev = g;
            }
        }
    }
    return out;
}

void Generator::sample_weights(RngStream& rng, std::span<double> out) const {
    if (out.size() != static_cast<std::size_t>(c_))
        throw std::invalid_argument("weight buffer size must equal branching");
    switch (family_) {
        case Family::Deterministic: {
            double const w = 1.0 / c_;
            std::fill(out.begin(), out.end(), w);
            return;
        }
        case Family::DiscreteIID: {
            for (int i = 0; i < c_; ++i) {
                double const u = rng.uniform01();
                std::size_t k = 0;
                while (k + 1 < atom_cdf_.size() && u >= atom_cdf_[k])
                    ++k;
                out[static_cast<std::size_t>(i)] = atoms_[k].value / c_;
            }
            return;
        }
        case Family::Lognormal: {
            double const sigma = std::sqrt(sigma2_);
            for (int i = 0; i < c_; ++i)
                out[static_cast<std::size_t>(i)] =
                    std::exp(-0.5 * sigma2_ + sigma * sample_normal(rng)) / c_;
            return;
        }
        case Family::LogPoisson: {
            for (int i = 0; i < c_; ++i) {
                unsigned const n = sample_poisson(rng, lambda_);
                out[static_cast<std::size_t>(i)] =
                    amp_ * std::pow(beta_, static_cast<double>(n)) / c_;
            }
            return;
        }
        case Family::Dirichlet: {
            double gamma_sum = 0.0;
            for (int i = 0; i < c_; ++i) {
                out[static_cast<std::size_t>(i)] =
                    sample_gamma(rng, concentration_[static_cast<std::size_t>(i)]);
                gamma_sum += out[static_cast<std::size_t>(i)];
            }
            // Last component closes the sum to exactly 1.0.
            double partial = 0.0;
            for (int i = 0; i + 1 < c_; ++i) {
                out[static_cast<std::size_t>(i)] /= gamma_sum;
                partial += out[static_cast<std::size_t>(i)];
            }
            double last = 1.0 - partial;
            if (last < 0.0)
                last = 0.0;
            out[static_cast<std::size_t>(c_ - 1)] = last;
            return;
        }
        case Family::OneHot: {
            std::fill(out.begin(), out.end(), 0.0);
            int idx = static_cast<int>(rng.uniform01() * c_);
            idx = std::min(idx, c_ - 1);
            out[static_cast<std::size_t>(idx)] = 1.0;
            return;
        }
        case Family::Product: {
            int const c1 = factors_[0].c_;
            int const c2 = factors_[1].c_;
            std::vector<double> lhs(static_cast<std::size_t>(c1));
            std::vector<double> rhs(static_cast<std::size_t>(c2));
            factors_[0].sample_weights(rng, lhs);
            for (int alpha = 0; alpha < c1; ++alpha) {
                factors_[1].sample_weights(rng, rhs);
                for (int beta = 0; beta < c2; ++beta)
                    out[static_cast<std::size_t>(alpha * c2 + beta)] =
                        lhs[static_cast<std::size_t>(alpha)] * rhs[static_cast<std::size_t>(beta)];
            }
            return;
        }
    }
    throw std::logic_error("unreachable family");
}

std::vector<double> Generator::sample_weights(RngStream& rng) const {
    std::vector<double> out(static_cast<std::size_t>(c_));
    sample_weights(rng, out);
    return out;
}

std::string Generator::describe() const {
    std::ostringstream os;
    switch (family_) {
        case Family::Deterministic:
            os << "deterministic(c=" << c_ << ")";
            break;
        case Family::DiscreteIID: {
            os << "discrete(c=" << c_ << ", atoms=";
            for (std::size_t k = 0; k < atoms_.size(); ++k)
                os << (k ? " " : "") << atoms_[k].value << ":" << atoms_[k].prob;
            os << ")";
            break;
        }
        case Family::Lognormal:
            os << "lognormal(c=" << c_ << ", sigma2=" << sigma2_ << ")";
            break;
        case Family::LogPoisson:
            os << "logpoisson(c=" << c_ << ", lambda=" << lambda_ << ", beta=" << beta_ << ")";
            break;
        case Family::Dirichlet: {
            os << "dirichlet(";
            for (std::size_t k = 0; k < concentration_.size(); ++k)
                os << (k ? "," : "") << concentration_[k];
            os << ")";
            break;
        }
        case Family::OneHot:
            os << "onehot(c=" << c_ << ")";
            break;
        case Family::Product:
            os << "tensor(" << factors_[0].describe() << ", " << factors_[1].describe() << ")";
            break;
    }
    return os.str();
}

} // namespace cascadelab
