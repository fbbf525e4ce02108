// Commutation and base-arithmetic tests.  Expected values come from small
// independent oracles (direct tensor expansion, orbit iteration, checked
// integer powers) computed here rather than from the code under test.
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cascadelab/numbertheory.hpp"

using namespace cascadelab::numbertheory;

namespace {

struct Deviation {
    double residual = 0.0;
    long witness = -1;
};

// Expands both product orders on the full c1*c2 grid and keeps the worst
// relative entry deviation, first index winning ties.
Deviation tensor_deviation(std::vector<double> const& x, std::vector<double> const& y) {
    auto const c1 = static_cast<long>(x.size());
    auto const c2 = static_cast<long>(y.size());
    Deviation dev;
    for (long q = 0; q < c1 * c2; ++q) {
        double const xy = x[static_cast<std::size_t>(q / c2)] * y[static_cast<std::size_t>(q % c2)];
        double const yx = y[static_cast<std::size_t>(q / c1)] * x[static_cast<std::size_t>(q % c1)];
        double const rel = std::abs(xy - yx) / std::max(std::abs(xy), std::abs(yx));
        if (rel > dev.residual) {
            dev.residual = rel;
            dev.witness = q;
        }
    }
    return dev;
}

std::vector<Rational> rat(std::vector<long> const& v) {
    std::vector<Rational> out;
    for (long e : v) out.emplace_back(e);
    return out;
}

std::vector<Rational> kron(std::vector<Rational> const& x, std::vector<Rational> const& y) {
    std::vector<Rational> out;
    for (auto const& a : x)
        for (auto const& b : y) out.push_back(a * b);
    return out;
}

// Steps of alpha -> n2 * alpha (mod n1) until return; 0 when not periodic.
int orbit_period(int n1, int n2, int alpha) {
    long long a = alpha;
    for (int k = 1; k <= n1; ++k) {
        a = static_cast<long long>(n2) * a % n1;
        if (a == alpha) return k;
    }
    return 0;
}

std::uint64_t ipow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace

TEST_CASE("commutation residual matches direct tensor expansion") {
    std::vector<double> const x{1.0, 2.0};
    std::vector<double> const y{1.0, 2.0, 4.0};
    Deviation const expect = tensor_deviation(x, y);
    CHECK(expect.residual == 0.5);
    CHECK(expect.witness == 2);

    CommuteResult const got = commutes(x, y, 1e-9);
    CHECK_FALSE(got.commutes);
    CHECK(got.residual == doctest::Approx(expect.residual).epsilon(1e-15));
    CHECK(got.witness == expect.witness);

    CommuteResult const exact = commutes_exact(rat({1, 2}), rat({1, 2, 4}));
    CHECK_FALSE(exact.commutes);
    CHECK(exact.residual == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(exact.witness == 2);
}

TEST_CASE("constant vectors always commute") {
    std::vector<double> const x{3.0, 3.0};
    std::vector<double> const y{0.7, 0.7, 0.7};
    CommuteResult const got = commutes(x, y, 1e-12);
    CHECK(got.commutes);
    CHECK(got.residual == 0.0);
    CHECK(got.witness == -1);
}

TEST_CASE("a vector commutes with its own tensor square") {
    std::vector<double> const x{1.0, 2.0};
    std::vector<double> const y{1.0, 2.0, 2.0, 4.0};
    CHECK(tensor_deviation(x, y).residual == 0.0);
    CommuteResult const got = commutes(x, y, 1e-12);
    CHECK(got.commutes);
    CHECK(got.residual == 0.0);
}

TEST_CASE("commutation is symmetric and scale invariant") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unif(0.1, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(3), y(4);
        for (double& v : x) v = unif(rng);
        for (double& v : y) v = unif(rng);
        CommuteResult const ab = commutes(x, y, 1e-9);
        CommuteResult const ba = commutes(y, x, 1e-9);
        CHECK(ab.commutes == ba.commutes);
        CHECK(ab.residual == doctest::Approx(ba.residual).epsilon(1e-12));

        std::vector<double> xs = x, ys = y;
        for (double& v : xs) v *= 0.25;
        for (double& v : ys) v *= 3.7;
        CommuteResult const scaled = commutes(xs, ys, 1e-9);
        CHECK(scaled.commutes == ab.commutes);
        CHECK(scaled.residual == doctest::Approx(ab.residual).epsilon(1e-12));
    }
}

TEST_CASE("certificates for constant pairs") {
    CommutationCertificate const cert = certify_commuting_pair(rat({5, 5}), rat({3, 3, 3}));
    CHECK(cert.verdict == CommutationVerdict::AllConstant);
    CHECK(cert.exact);
}

TEST_CASE("certificates name the common power base in input order") {
    CommutationCertificate const cert = certify_commuting_pair(rat({1, 2}), rat({1, 2, 2, 4}));
    CHECK(cert.verdict == CommutationVerdict::CommonBase);
    CHECK(cert.p == 2);
    CHECK(cert.k1 == 1);
    CHECK(cert.k2 == 2);
    CHECK(ipow(cert.p, cert.k1) == 2);
    CHECK(ipow(cert.p, cert.k2) == 4);
    CHECK_FALSE(cert.trace.empty());

    CommutationCertificate const swapped = certify_commuting_pair(rat({1, 2, 2, 4}), rat({1, 2}));
    CHECK(swapped.verdict == CommutationVerdict::CommonBase);
    CHECK(swapped.p == 2);
    CHECK(swapped.k1 == 2);
    CHECK(swapped.k2 == 1);
}

TEST_CASE("certificates reject non-commuting pairs with a witness") {
    CommutationCertificate const cert = certify_commuting_pair(rat({1, 2}), rat({1, 2, 4}));
    CHECK(cert.verdict == CommutationVerdict::NotCommuting);
    CHECK(cert.residual == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cert.witness == 2);

    CommutationCertificate const generic =
        certify_commuting_pair(rat({1, 2, 3, 4}), rat({1, 2, 3, 4, 5, 6, 7, 8}));
    CHECK(generic.verdict == CommutationVerdict::NotCommuting);
}

TEST_CASE("tensor powers of one vector certify constructively") {
    std::vector<Rational> const x{Rational(1), Rational(3), Rational(7)};
    CommutationCertificate const sq = certify_commuting_pair(x, kron(x, x));
    CHECK(sq.verdict == CommutationVerdict::CommonBase);
    CHECK(sq.p == 3);
    CHECK(sq.k1 == 1);
    CHECK(sq.k2 == 2);

    std::vector<Rational> const z{Rational(2), Rational(5)};
    CommutationCertificate const cube = certify_commuting_pair(z, kron(kron(z, z), z));
    CHECK(cube.verdict == CommutationVerdict::CommonBase);
    CHECK(cube.p == 2);
    CHECK(cube.k1 == 1);
    CHECK(cube.k2 == 3);
}

TEST_CASE("exhaustive small grid: commuting implies constant off power bases") {
    // Dimensions 2 and 3 share no integer power base, so the only exactly
    // commuting pairs must be constant in both coordinates.
    std::vector<std::vector<Rational>> xs, ys;
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) xs.push_back(rat({a, b}));
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b)
            for (int c = 1; c <= 3; ++c) ys.push_back(rat({a, b, c}));

    int commuting = 0;
    for (auto const& x : xs) {
        bool const x_const = x[0] == x[1];
        for (auto const& y : ys) {
            CommuteResult const r = commutes_exact(x, y);
            if (!r.commutes) continue;
            ++commuting;
            bool const y_const = y[0] == y[1] && y[1] == y[2];
            CHECK(x_const);
            CHECK(y_const);
            CommutationCertificate const cert = certify_commuting_pair(x, y);
            CHECK(cert.verdict == CommutationVerdict::AllConstant);
        }
    }
    CHECK(commuting == 9);
}

TEST_CASE("float certification flags near-tolerance decisions") {
    std::vector<double> const x{1.0, 2.0};
    std::vector<double> const nudged{1.0, 2.0 + 1e-10, 2.0, 4.0};

    CommutationCertificate const tight = certify_commuting_pair(x, nudged, 1e-12);
    CHECK(tight.verdict == CommutationVerdict::NotCommuting);

    CommutationCertificate const loose = certify_commuting_pair(x, nudged, 1e-6);
    CHECK(loose.verdict == CommutationVerdict::CommonBase);
    CHECK_FALSE(loose.exact);

    // The nudge sits at relative 5e-11: a pass at tol 1e-10, but inside the
    // ten-fold margin band around the decision.
    CommutationCertificate const borderline = certify_commuting_pair(x, nudged, 1e-10);
    CHECK(borderline.ambiguous);
}

TEST_CASE("remainder cycles match orbit iteration") {
    auto const cyc53 = remainder_cycle(5, 3);
    REQUIRE(cyc53.has_value());
    CHECK(cyc53->first == 1);
    CHECK(cyc53->second == 4);
    CHECK(orbit_period(5, 3, 1) == 4);

    auto const cyc32 = remainder_cycle(3, 2);
    REQUIRE(cyc32.has_value());
    CHECK(cyc32->first == 1);
    CHECK(cyc32->second == 2);

    CHECK_FALSE(remainder_cycle(4, 6).has_value());

    // gcd(6, 4) = 2: alpha = 1 is transient but alpha = 2 is fixed.
    auto const cyc64 = remainder_cycle(6, 4);
    REQUIRE(cyc64.has_value());
    CHECK(cyc64->first == 2);
    CHECK(cyc64->second == 1);
    CHECK(orbit_period(6, 4, 2) == 1);
}

TEST_CASE("coprime multipliers always have a cycle") {
    for (int n1 = 2; n1 <= 50; ++n1) {
        for (int n2 = 2; n2 <= 50; ++n2) {
            if (gcd(static_cast<std::uint64_t>(n1), static_cast<std::uint64_t>(n2)) != 1) continue;
            auto const cyc = remainder_cycle(n1, n2);
            REQUIRE(cyc.has_value());
            auto const [alpha, k] = *cyc;
            CHECK(alpha > 0);
            CHECK(alpha < n1);
            CHECK(k > 0);
            CHECK(k <= n1);
            CHECK(orbit_period(n1, n2, alpha) == k);
        }
    }
}

TEST_CASE("multiplicity splits off the largest dividing power") {
    Multiplicity const m = multiplicity(2, 24);
    CHECK(m.r1 == 3);
    CHECK(m.c2_prime == 3);

    CHECK(multiplicity(2, 5).r1 == 0);
    CHECK(multiplicity(2, 5).c2_prime == 5);
    CHECK(multiplicity(3, 18).r1 == 2);
    CHECK(multiplicity(3, 18).c2_prime == 2);
    CHECK(multiplicity(6, 36).r1 == 2);
    CHECK(multiplicity(6, 36).c2_prime == 1);

    for (std::uint64_t c1 : {2ull, 3ull, 5ull, 6ull, 10ull}) {
        for (std::uint64_t c2 : {4ull, 9ull, 12ull, 30ull, 100ull, 360ull}) {
            Multiplicity const got = multiplicity(c1, c2);
            CHECK(ipow(c1, got.r1) * got.c2_prime == c2);
            CHECK(got.c2_prime % c1 != 0);
        }
    }
}

TEST_CASE("common power base detection") {
    auto const b = common_power_base(8, 32);
    REQUIRE(b.has_value());
    CHECK(b->p == 2);
    CHECK(b->k1 == 3);
    CHECK(b->k2 == 5);

    CHECK_FALSE(common_power_base(2, 3).has_value());
    CHECK_FALSE(common_power_base(4, 6).has_value());
    CHECK_FALSE(common_power_base(12, 24).has_value());

    auto const rev = common_power_base(16, 8);
    REQUIRE(rev.has_value());
    CHECK(rev->p == 2);
    CHECK(rev->k1 == 4);
    CHECK(rev->k2 == 3);

    auto const six = common_power_base(6, 36);
    REQUIRE(six.has_value());
    CHECK(six->p == 6);
    CHECK(six->k1 == 1);
    CHECK(six->k2 == 2);

    auto const twelve = common_power_base(12, 144);
    REQUIRE(twelve.has_value());
    CHECK(twelve->p == 12);
    CHECK(twelve->k1 == 1);
    CHECK(twelve->k2 == 2);

    for (std::uint64_t c1 : {2ull, 4ull, 9ull, 10ull, 36ull}) {
        for (std::uint64_t c2 : {8ull, 16ull, 27ull, 100ull, 216ull}) {
            auto const got = common_power_base(c1, c2);
            if (!got) continue;
            CHECK(ipow(got->p, got->k1) == c1);
            CHECK(ipow(got->p, got->k2) == c2);
        }
    }
}

TEST_CASE("minimal base of perfect powers") {
    CHECK(minimal_base(12) == 12);
    CHECK(minimal_base(64) == 2);
    CHECK(minimal_base(81) == 3);
    CHECK(minimal_base(6) == 6);
    CHECK(minimal_base(343) == 7);
    CHECK(minimal_base(1024) == 2);
    CHECK(minimal_base(1000000) == 10);
    CHECK(minimal_base(1ull << 40) == 2);
}

TEST_CASE("gcd basics") {
    CHECK(gcd(12, 18) == 6);
    CHECK(gcd(7, 5) == 1);
    CHECK(gcd(0, 5) == 5);
    CHECK(gcd(5, 0) == 5);
}

TEST_CASE("rational parsing") {
    CHECK(parse_rational("7") == Rational(7));
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("0.5") == Rational(1, 2));
    CHECK(parse_rational("2.25") == Rational(9, 4));
    CHECK_THROWS(parse_rational("abc"));
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational(""));
}

TEST_CASE("positive vector validation") {
    CHECK_THROWS(PositiveVector({1.0}));
    CHECK_THROWS(PositiveVector({1.0, 0.0}));
    CHECK_THROWS(PositiveVector({1.0, -2.0}));
    CHECK_THROWS(PositiveVector({1.0, std::nan("")}));
    CHECK(PositiveVector({1.0, 2.0}).entries.size() == 2);
}
