#include "cascadelab/numbertheory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cascadelab::numbertheory {

namespace {

using BigInt = boost::multiprecision::cpp_int;

void require_positive(std::span<double const> v, char const* name) {
    if (v.size() < 2)
        throw std::invalid_argument(std::string(name) + ": dimension must be >= 2");
    for (double e : v)
        if (!(e > 0.0) || !std::isfinite(e))
            throw std::invalid_argument(std::string(name) + ": entries must be positive finite");
}

void require_positive(std::vector<Rational> const& v, char const* name) {
    if (v.size() < 2)
        throw std::invalid_argument(std::string(name) + ": dimension must be >= 2");
    for (auto const& e : v)
        if (e <= 0)
            throw std::invalid_argument(std::string(name) + ": entries must be positive");
}

double rel_dev(double a, double b) {
    return std::abs(a - b) / std::max(a, b);
}

double rel_dev(Rational const& a, Rational const& b) {
    Rational const diff = a > b ? a - b : b - a;
    Rational const scale = std::max(a, b);
    return (diff / scale).convert_to<double>();
}

// max/min - 1 over the first dim entries.
template <typename T>
double constancy_dev(std::vector<T> const& v, std::size_t dim) {
    T lo = v[0];
    T hi = v[0];
    for (std::size_t i = 1; i < dim; ++i) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    if constexpr (std::is_same_v<T, double>)
        return hi / lo - 1.0;
    else
        return (hi / lo - 1).template convert_to<double>();
}

// Commutation residual of the two prefixes (dim a, dim b) of one vector;
// this is the normalized-stage form of the entrywise product condition.
template <typename T>
CommuteResult prefix_commute(std::vector<T> const& v, std::size_t a, std::size_t b, double tol) {
    CommuteResult out;
    out.commutes = true;
    for (std::size_t q = 0; q < a * b; ++q) {
        T const lhs = v[q / b] * v[q % b];
        T const rhs = v[q / a] * v[q % a];
        double const d = rel_dev(lhs, rhs);
        if (d > out.residual) {
            out.residual = d;
            out.witness = static_cast<long>(q);
        }
    }
    if constexpr (std::is_same_v<T, double>) {
        out.commutes = out.residual <= tol;
    } else {
        out.commutes = out.residual == 0.0;
        (void)tol;
    }
    if (out.commutes)
        out.witness = -1;
    return out;
}

template <typename T>
CommuteResult commute_impl(std::span<T const> x, std::span<T const> y, double tol) {
    std::size_t const c1 = x.size();
    std::size_t const c2 = y.size();
    CommuteResult out;
    out.commutes = true;
    for (std::size_t q = 0; q < c1 * c2; ++q) {
        T const lhs = x[q / c2] * y[q % c2];
        T const rhs = y[q / c1] * x[q % c1];
        double const d = rel_dev(lhs, rhs);
        if (d > out.residual) {
            out.residual = d;
            out.witness = static_cast<long>(q);
        }
    }
    if constexpr (std::is_same_v<T, double>)
        out.commutes = out.residual <= tol;
    else
        out.commutes = out.residual == 0.0;
    if (out.commutes)
        out.witness = -1;
    return out;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        acc *= base;
        if (acc > ~static_cast<std::uint64_t>(0))
            throw std::overflow_error("power exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

// The Euclid-on-exponents reduction shared by both certifier modes.  The
// normalized state is one vector whose (dim_small, dim_big) prefixes form the
// current pair; Equal(a, b) and Constant(v, dim) come from the caller.
template <typename T, typename StageCheck, typename ConstCheck>
CommutationCertificate reduce_pair(std::vector<T> v, int dim_small, int dim_big,
                                   std::uint64_t orig_small, std::uint64_t orig_big, bool swapped,
                                   StageCheck&& stage_commutes, ConstCheck&& stage_constant,
                                   CommutationCertificate cert) {
    int a = dim_small;
    int b = dim_big;
    cert.trace.emplace_back(a, b);
    // Each step maps (a, b) -> sorted(a, b / a); bounded by log2 of the grid.
    int const max_steps = 2 * (64 - __builtin_clzll(static_cast<unsigned long long>(dim_big))) + 4;
    for (int step = 0; step < max_steps; ++step) {
        if (a == 1 || b == 1) {
            auto const base = common_power_base(orig_small, orig_big);
            if (!base)
                throw std::logic_error("reduction terminated without a common power base");
            cert.verdict = CommutationVerdict::CommonBase;
            cert.p = base->p;
            cert.k1 = swapped ? base->k2 : base->k1;
            cert.k2 = swapped ? base->k1 : base->k2;
            return cert;
        }
        std::uint64_t const d =
            std::gcd(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b));
        if (d < static_cast<std::uint64_t>(a)) {
            // Commuting pairs on non-mutually-divisible dims must be constant,
            // contradicting the non-constancy established at entry.  Exact
            // inputs cannot get here at all.
            if constexpr (std::is_same_v<T, Rational>)
                throw std::logic_error("exact reduction reached non-divisible dims with "
                                       "non-constant entries");
            double const sdev = constancy_dev(v, static_cast<std::size_t>(b));
            if (stage_constant(v, static_cast<std::size_t>(b))) {
                cert.verdict = CommutationVerdict::AllConstant;
                cert.ambiguous = true;
                cert.note = "stage vectors became constant on non-divisible dims (" +
                            std::to_string(a) + "," + std::to_string(b) + ")";
                return cert;
            }
            cert.verdict = CommutationVerdict::NotCommuting;
            cert.residual = sdev;
            cert.witness = -1;
            cert.ambiguous = true;
            cert.note = "non-divisible dims (" + std::to_string(a) + "," + std::to_string(b) +
                        ") with non-constant entries: no exact commutation is possible";
            return cert;
        }
        int const k2 = b / a;
        int const na = std::min(a, k2 == 0 ? 1 : k2);
        int const nb = std::max(a, k2 == 0 ? 1 : k2);
        v.resize(static_cast<std::size_t>(nb));
        a = na;
        b = nb;
        cert.trace.emplace_back(a, b);
        if (a >= 2) {
            CommuteResult const rc = stage_commutes(v, static_cast<std::size_t>(a),
                                                    static_cast<std::size_t>(b));
            if (!rc.commutes) {
                cert.verdict = CommutationVerdict::NotCommuting;
                cert.residual = rc.residual;
                cert.witness = rc.witness;
                cert.ambiguous = true;
                cert.note = "commutation lost at reduced dims (" + std::to_string(a) + "," +
                            std::to_string(b) + ")";
                return cert;
            }
        }
    }
    throw std::logic_error("reduction failed to terminate");
}

} // namespace

PositiveVector::PositiveVector(std::vector<double> values) : entries(std::move(values)) {
    require_positive(entries, "PositiveVector");
}

Rational parse_rational(std::string const& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            s.push_back(ch);
    if (s.empty())
        throw std::invalid_argument("empty rational literal");
    try {
        auto const slash = s.find('/');
        if (slash != std::string::npos) {
            BigInt const num(s.substr(0, slash));
            BigInt const den(s.substr(slash + 1));
            if (den == 0)
                throw std::invalid_argument("zero denominator");
            return Rational(num, den);
        }
        auto const dot = s.find('.');
        if (dot == std::string::npos)
            return Rational(BigInt(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t const frac_len = s.size() - dot - 1;
        BigInt den = 1;
        for (std::size_t i = 0; i < frac_len; ++i)
            den *= 10;
        return Rational(BigInt(digits), den);
    } catch (std::exception const&) {
        throw std::invalid_argument("bad rational literal: " + text);
    }
}

CommuteResult commutes(std::span<double const> x, std::span<double const> y, double tol) {
    require_positive(x, "x");
    require_positive(y, "y");
    if (!(tol >= 0.0))
        throw std::invalid_argument("tolerance must be >= 0");
    return commute_impl<double>(x, y, tol);
}

CommuteResult commutes_exact(std::vector<Rational> const& x, std::vector<Rational> const& y) {
    require_positive(x, "x");
    require_positive(y, "y");
    return commute_impl<Rational>(std::span<Rational const>(x), std::span<Rational const>(y), 0.0);
}

std::string verdict_name(CommutationVerdict verdict) {
    switch (verdict) {
        case CommutationVerdict::NotCommuting: return "not_commuting";
        case CommutationVerdict::AllConstant: return "all_constant";
        case CommutationVerdict::CommonBase: return "common_base";
    }
    return "unknown";
}

CommutationCertificate certify_commuting_pair(std::vector<Rational> x, std::vector<Rational> y) {
    require_positive(x, "x");
    require_positive(y, "y");
    bool const swapped = x.size() > y.size();
    if (swapped)
        std::swap(x, y);

    CommutationCertificate cert;
    cert.exact = true;
    CommuteResult const cr = commutes_exact(x, y);
    if (!cr.commutes) {
        cert.verdict = CommutationVerdict::NotCommuting;
        cert.residual = cr.residual;
        cert.witness = cr.witness;
        return cert;
    }
    bool const x_const = std::all_of(x.begin(), x.end(), [&](Rational const& e) { return e == x[0]; });
    bool const y_const = std::all_of(y.begin(), y.end(), [&](Rational const& e) { return e == y[0]; });
    if (x_const && y_const) {
        cert.verdict = CommutationVerdict::AllConstant;
        return cert;
    }

    // Normalize so both stage vectors are prefixes of one vector: scale y by
    // x0/y0; commutation already forces x_alpha = y_alpha * x0/y0.
    Rational const scale = x[0] / y[0];
    std::vector<Rational> v = std::move(y);
    for (auto& e : v)
        e *= scale;

    auto stage_commutes = [](std::vector<Rational> const& vec, std::size_t a, std::size_t b) {
        return prefix_commute<Rational>(vec, a, b, 0.0);
    };
    auto stage_constant = [](std::vector<Rational> const& vec, std::size_t dim) {
        for (std::size_t i = 1; i < dim; ++i)
            if (vec[i] != vec[0])
                return false;
        return true;
    };
    int const dim_small = static_cast<int>(x.size());
    int const dim_big = static_cast<int>(v.size());
    return reduce_pair(std::move(v), dim_small, dim_big, static_cast<std::uint64_t>(dim_small),
                       static_cast<std::uint64_t>(dim_big), swapped, stage_commutes,
                       stage_constant, std::move(cert));
}

CommutationCertificate certify_commuting_pair(std::span<double const> x,
                                              std::span<double const> y, double tol) {
    require_positive(x, "x");
    require_positive(y, "y");
    if (!(tol > 0.0))
        throw std::invalid_argument("float certification needs a positive tolerance");
    std::vector<double> xs(x.begin(), x.end());
    std::vector<double> ys(y.begin(), y.end());
    bool const swapped = xs.size() > ys.size();
    if (swapped)
        std::swap(xs, ys);

    CommutationCertificate cert;
    cert.exact = false;
    CommuteResult const cr = commute_impl<double>(std::span<double const>(xs),
                                                  std::span<double const>(ys), tol);
    if (!cr.commutes) {
        cert.verdict = CommutationVerdict::NotCommuting;
        cert.residual = cr.residual;
        cert.witness = cr.witness;
        cert.ambiguous = cr.residual <= 10.0 * tol;
        return cert;
    }
    if (cr.residual >= 0.1 * tol)
        cert.ambiguous = true;

    // Constancy cut fixed at 1e-9 entry-ratio spread.
    double constexpr kConstTol = 1e-9;
    double const xdev = constancy_dev(xs, xs.size());
    double const ydev = constancy_dev(ys, ys.size());
    if (xdev <= kConstTol && ydev <= kConstTol) {
        cert.verdict = CommutationVerdict::AllConstant;
        cert.ambiguous |= xdev >= 0.1 * kConstTol || ydev >= 0.1 * kConstTol;
        return cert;
    }
    cert.ambiguous |= (xdev > kConstTol && xdev <= 10.0 * kConstTol) ||
                      (ydev > kConstTol && ydev <= 10.0 * kConstTol);

    double const scale = xs[0] / ys[0];
    std::vector<double> v = std::move(ys);
    for (auto& e : v)
        e *= scale;

    bool stage_margin = false;
    auto stage_commutes = [&stage_margin, tol](std::vector<double> const& vec, std::size_t a,
                                               std::size_t b) {
        CommuteResult const rc = prefix_commute<double>(vec, a, b, tol);
        if (rc.commutes && rc.residual >= 0.1 * tol)
            stage_margin = true;
        return rc;
    };
    auto stage_constant = [](std::vector<double> const& vec, std::size_t dim) {
        return constancy_dev(vec, dim) <= kConstTol;
    };
    int const dim_small = static_cast<int>(xs.size());
    int const dim_big = static_cast<int>(v.size());
    CommutationCertificate out =
        reduce_pair(std::move(v), dim_small, dim_big, static_cast<std::uint64_t>(dim_small),
                    static_cast<std::uint64_t>(dim_big), swapped, stage_commutes, stage_constant,
                    std::move(cert));
    out.ambiguous |= stage_margin;
    return out;
}

std::optional<std::pair<int, int>> remainder_cycle(int n1, int n2) {
    if (n1 < 2 || n2 < 2)
        throw std::invalid_argument("remainder_cycle requires n1, n2 >= 2");
    for (int alpha = 1; alpha < n1; ++alpha) {
        long long t = alpha;
        for (int k = 1; k <= n1; ++k) {
            t = (static_cast<long long>(n2) * t) % n1;
            if (t == alpha)
                return std::make_pair(alpha, k);
        }
    }
    return std::nullopt;
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
    return std::gcd(a, b);
}

Multiplicity multiplicity(std::uint64_t c1, std::uint64_t c2) {
    if (c1 < 2)
        throw std::invalid_argument("multiplicity requires c1 >= 2");
    if (c2 < 1)
        throw std::invalid_argument("multiplicity requires c2 >= 1");
    Multiplicity out;
    out.c2_prime = c2;
    while (out.c2_prime % c1 == 0) {
        out.c2_prime /= c1;
        ++out.r1;
    }
    return out;
}

std::uint64_t minimal_base(std::uint64_t c) {
    if (c < 2)
        throw std::invalid_argument("minimal_base requires c >= 2");
    // Largest k with c = r^k gives the smallest (non-perfect-power) root.
    for (int k = 63; k >= 2; --k) {
        double const guess = std::pow(static_cast<double>(c), 1.0 / k);
        auto const r0 = static_cast<std::uint64_t>(std::llround(guess));
        for (std::uint64_t r = r0 > 1 ? r0 - 1 : 2; r <= r0 + 1; ++r) {
            if (r < 2)
                continue;
            try {
                if (checked_pow(r, static_cast<std::uint64_t>(k)) == c)
                    return r;
            } catch (std::overflow_error const&) {
            }
        }
    }
    return c;
}

std::optional<CommonBase> common_power_base(std::uint64_t c1, std::uint64_t c2) {
    if (c1 < 2 || c2 < 2)
        throw std::invalid_argument("common_power_base requires c1, c2 >= 2");
    std::uint64_t const p = minimal_base(c1);
    if (minimal_base(c2) != p)
        return std::nullopt;
    CommonBase out;
    out.p = p;
    for (std::uint64_t v = c1; v > 1; v /= p)
        ++out.k1;
    for (std::uint64_t v = c2; v > 1; v /= p)
        ++out.k2;
    return out;
}

} // namespace cascadelab::numbertheory
