// Tensor-commutation tests and branching-parameter arithmetic.
//
// Two positive vectors x (dim c1) and y (dim c2) commute when the tensor
// products taken in either order agree entrywise under the index convention
// (x (x) y)_q = x_{q div c2} * y_{q mod c2}.  Non-constant commuting pairs
// can exist only when c1 and c2 are powers of a common base; the certifier
// reproduces that dichotomy constructively.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cascadelab::numbertheory {

using Rational = boost::multiprecision::cpp_rational;

// Validated strictly-positive vector, dimension >= 2.
struct PositiveVector {
    explicit PositiveVector(std::vector<double> values);
    std::vector<double> entries;
};

// Parses "7", "3/4", or "0.5" into an exact rational.
Rational parse_rational(std::string const& text);

struct CommuteResult {
    bool commutes = false;
    double residual = 0.0; // max relative entry deviation
    long witness = -1;     // index attaining the max; -1 when all entries agree
};

// Relative-tolerance commutation test on the c1*c2 product grid.
CommuteResult commutes(std::span<double const> x, std::span<double const> y, double tol);

// Exact commutation test; residual is reported as a double for diagnostics.
CommuteResult commutes_exact(std::vector<Rational> const& x, std::vector<Rational> const& y);

enum class CommutationVerdict {
    NotCommuting,
    AllConstant,
    CommonBase,
};

std::string verdict_name(CommutationVerdict verdict);

struct CommutationCertificate {
    CommutationVerdict verdict = CommutationVerdict::NotCommuting;
    double residual = 0.0; // NotCommuting: offending relative deviation
    long witness = -1;     // NotCommuting: grid index; -1 means structural
    std::uint64_t p = 0;   // CommonBase: c1 = p^k1, c2 = p^k2, p minimal
    std::uint64_t k1 = 0;
    std::uint64_t k2 = 0;
    std::vector<std::pair<int, int>> trace; // dimension pairs visited
    bool ambiguous = false; // some decision fell within 10x of the tolerance
    bool exact = false;
    std::string note;
};

// Exact-arithmetic certification (default mode for certifiable inputs).
CommutationCertificate certify_commuting_pair(std::vector<Rational> x, std::vector<Rational> y);

// Floating certification with a relative tolerance; decisions within 10x of
// the tolerance set the ambiguous flag instead of being silently resolved.
CommutationCertificate certify_commuting_pair(std::span<double const> x,
                                              std::span<double const> y, double tol);

// First (alpha, k) with alpha in (0, n1), k in (0, n1], such that k steps of
// alpha -> (n2 * alpha) mod n1 return to alpha; nullopt when only 0 is
// periodic (e.g. n1 = 4, n2 = 6).
std::optional<std::pair<int, int>> remainder_cycle(int n1, int n2);

std::uint64_t gcd(std::uint64_t a, std::uint64_t b);

// Largest r1 with c1^r1 dividing c2, and the cofactor c2 / c1^r1.
struct Multiplicity {
    std::uint64_t r1 = 0;
    std::uint64_t c2_prime = 1;
};
Multiplicity multiplicity(std::uint64_t c1, std::uint64_t c2);

struct CommonBase {
    std::uint64_t p = 0;
    std::uint64_t k1 = 0;
    std::uint64_t k2 = 0;
};
// Minimal p >= 2 with c1 = p^k1 and c2 = p^k2, if any.
std::optional<CommonBase> common_power_base(std::uint64_t c1, std::uint64_t c2);

// Smallest p >= 2 with c = p^k for some k >= 1; c itself when c is not a
// perfect power.
std::uint64_t minimal_base(std::uint64_t c);

} // namespace cascadelab::numbertheory
