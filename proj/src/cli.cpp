#include "cascadelab/cli.hpp"

#include <cctype>
#include <cinttypes>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cascadelab/analysis.hpp"
#include "cascadelab/cascade.hpp"
#include "cascadelab/errors.hpp"
#include "cascadelab/generator.hpp"
#include "cascadelab/numbertheory.hpp"

namespace cascadelab::cli {

namespace {

namespace fs = std::filesystem;
namespace nt = cascadelab::numbertheory;
using nlohmann::json;

std::string trim(std::string const& text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1])))
        --e;
    return text.substr(b, e - b);
}

std::string lower(std::string text) {
    for (char& ch : text)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return text;
}

std::vector<std::string> split(std::string const& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        std::size_t const pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(trim(text.substr(start)));
            return parts;
        }
        parts.push_back(trim(text.substr(start, pos - start)));
        start = pos + 1;
    }
}

std::string g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// key = value sections; [name] opens a section, '#' starts a comment.
struct Config {
    std::string path;
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(std::string const& section, std::string const& key) const {
        auto const sec = sections.find(section);
        return sec != sections.end() && sec->second.count(key) > 0;
    }

    std::string const& get(std::string const& section, std::string const& key) const {
        auto const sec = sections.find(section);
        if (sec == sections.end() || sec->second.count(key) == 0)
            throw ConfigError(path + ": missing key '" + key + "' in section [" + section + "]");
        return sec->second.at(key);
    }
};

Config parse_config_file(std::string const& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open config file");
    Config cfg;
    cfg.path = path;
    std::string section;
    std::string line;
    int lineno = 0;
    auto fail = [&](std::string const& what) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (std::size_t const hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                fail("empty section name");
            continue;
        }
        std::size_t const eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected key = value");
        std::string const key = trim(line.substr(0, eq));
        std::string const value = trim(line.substr(eq + 1));
        if (key.empty())
            fail("empty key");
        if (value.empty())
            fail("empty value for key '" + key + "'");
        if (!cfg.sections[section].emplace(key, value).second)
            fail("duplicate key '" + key + "'");
    }
    return cfg;
}

double parse_double(std::string const& text, std::string const& where) {
    char* end = nullptr;
    double const v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError(where + ": not a finite number: '" + text + "'");
    return v;
}

long long parse_int(std::string const& text, std::string const& where) {
    char* end = nullptr;
    long long const v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0')
        throw ConfigError(where + ": not an integer: '" + text + "'");
    return v;
}

std::uint64_t parse_uint64(std::string const& text, std::string const& where) {
    char* end = nullptr;
    unsigned long long const v = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || text.front() == '-')
        throw ConfigError(where + ": not an unsigned integer: '" + text + "'");
    return v;
}

double cfg_double(Config const& cfg, std::string const& section, std::string const& key) {
    return parse_double(cfg.get(section, key), cfg.path + ": [" + section + "] " + key);
}

int cfg_int(Config const& cfg, std::string const& section, std::string const& key) {
    long long const v =
        parse_int(cfg.get(section, key), cfg.path + ": [" + section + "] " + key);
    if (v < INT_MIN || v > INT_MAX)
        throw ConfigError(cfg.path + ": [" + section + "] " + key + ": out of range");
    return static_cast<int>(v);
}

std::vector<double> cfg_double_list(Config const& cfg, std::string const& section,
                                    std::string const& key) {
    std::vector<double> out;
    for (std::string const& part : split(cfg.get(section, key), ','))
        out.push_back(parse_double(part, cfg.path + ": [" + section + "] " + key));
    return out;
}

Generator generator_from(Config const& cfg, std::string const& section, int depth = 0) {
    if (depth > 8)
        throw ConfigError(cfg.path + ": tensor factors nest deeper than 8 levels");
    if (cfg.sections.count(section) == 0)
        throw ConfigError(cfg.path + ": missing [" + section + "] section");
    std::string const family = lower(cfg.get(section, "family"));
    if (family == "deterministic" || family == "lebesgue")
        return Generator::deterministic(cfg_int(cfg, section, "c"));
    if (family == "discrete" || family == "discrete_iid") {
        std::vector<Atom> atoms;
        for (std::string const& part : split(cfg.get(section, "atoms"), ',')) {
            std::size_t const colon = part.find(':');
            if (colon == std::string::npos)
                throw ConfigError(cfg.path + ": [" + section +
                                  "] atoms: expected value:probability, got '" + part + "'");
            std::string const where = cfg.path + ": [" + section + "] atoms";
            atoms.push_back({parse_double(trim(part.substr(0, colon)), where),
                             parse_double(trim(part.substr(colon + 1)), where)});
        }
        return Generator::discrete_iid(cfg_int(cfg, section, "c"), std::move(atoms));
    }
    if (family == "lognormal")
        return Generator::lognormal(cfg_int(cfg, section, "c"), cfg_double(cfg, section, "sigma2"));
    if (family == "logpoisson" || family == "log_poisson")
        return Generator::log_poisson(cfg_int(cfg, section, "c"),
                                      cfg_double(cfg, section, "lambda"),
                                      cfg_double(cfg, section, "beta"));
    if (family == "dirichlet") {
        std::vector<double> conc = cfg_double_list(cfg, section, "concentration");
        if (cfg.has(section, "c") &&
            cfg_int(cfg, section, "c") != static_cast<int>(conc.size()))
            throw ConfigError(cfg.path + ": [" + section +
                              "] c disagrees with the concentration length");
        return Generator::dirichlet(std::move(conc));
    }
    if (family == "onehot" || family == "one_hot")
        return Generator::one_hot(cfg_int(cfg, section, "c"));
    if (family == "tensor" || family == "product") {
        std::vector<std::string> const factors = split(cfg.get(section, "factors"), ',');
        if (factors.size() != 2)
            throw ConfigError(cfg.path + ": [" + section +
                              "] factors must name exactly two sections");
        return tensor_product(generator_from(cfg, factors[0], depth + 1),
                              generator_from(cfg, factors[1], depth + 1));
    }
    throw ConfigError(cfg.path + ": [" + section + "] unknown family '" + family + "'");
}

std::vector<double> q_grid_from(Config const& cfg) {
    double const start = cfg.has("", "q_start") ? cfg_double(cfg, "", "q_start") : 0.0;
    double const stop = cfg.has("", "q_stop") ? cfg_double(cfg, "", "q_stop") : 3.0;
    double const step = cfg.has("", "q_step") ? cfg_double(cfg, "", "q_step") : 0.5;
    if (!(step > 0.0) || stop < start)
        throw ConfigError(cfg.path + ": need q_step > 0 and q_stop >= q_start");
    auto const count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000)
        throw ConfigError(cfg.path + ": q grid has more than 100000 points");
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = start + static_cast<double>(i) * step;
    return grid;
}

std::uint64_t seed_from(Config const& cfg) {
    if (!cfg.has("", "seed"))
        throw ConfigError(cfg.path + ": seed is required (there is no wall-clock default)");
    return parse_uint64(cfg.get("", "seed"), cfg.path + ": seed");
}

void write_file(fs::path const& path, std::string const& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out)
        throw std::runtime_error("failed writing " + path.string());
}

fs::path prepare_out_dir(std::string const& out_dir) {
    fs::path const dir(out_dir);
    fs::create_directories(dir);
    return dir;
}

std::string format_exponents(Generator const& gen) {
    try {
        CriticalExponents const crit = gen.critical_exponents();
        char buf[96];
        std::snprintf(buf, sizeof buf, "q_minus: %g\nq_plus: %g\n", crit.q_minus, crit.q_plus);
        return buf;
    } catch (std::exception const& e) {
        return std::string("q_minus: unavailable (") + e.what() + ")\nq_plus: unavailable\n";
    }
}

int cmd_gen_info(Config const& cfg) {
    Generator const gen = generator_from(cfg, "generator");
    std::string out;
    out += "generator: " + gen.describe() + "\n";
    out += "branching: " + std::to_string(gen.branching()) + "\n";
    out += std::string("components_iid: ") + (gen.components_iid() ? "yes" : "no") + "\n";
    out += std::string("conservative: ") + (gen.conservative() ? "yes" : "no") + "\n";
    out += std::string("locally_positive: ") + (gen.locally_positive() ? "yes" : "no") + "\n";
    out += std::string("nondegenerate: ") + (gen.nondegenerate() ? "yes" : "no") + "\n";
    out += format_exponents(gen);
    try {
        out += "m2: " + g17(total_mass_second_moment(gen)) + "\n";
    } catch (DivergentSecondMomentError const&) {
        out += "m2: divergent\n";
    }
    double const mean0 = gen.component_mean(0);
    out += "v_a: " + g17(gen.component_moment(0, 2.0) / (mean0 * mean0)) + "\n";
    out += std::string("lebesgue_test: ") + (lebesgue_test(gen) ? "yes" : "no") + "\n";
    out += "tau_heuristic:\n";
    for (double const q : q_grid_from(cfg)) {
        char buf[80];
        try {
            std::snprintf(buf, sizeof buf, "  %10.4f  %.12g\n", q, gen.tau_heuristic(q));
        } catch (DivergentMomentError const&) {
            std::snprintf(buf, sizeof buf, "  %10.4f  divergent\n", q);
        }
        out += buf;
    }
    std::fputs(out.c_str(), stdout);
    return 0;
}

int cmd_simulate(Config const& cfg, std::string const& out_dir) {
    Generator const gen = generator_from(cfg, "generator");
    int const level = cfg_int(cfg, "", "level");
    int const replicates = cfg.has("", "replicates") ? cfg_int(cfg, "", "replicates") : 1;
    std::uint64_t const seed = seed_from(cfg);
    if (replicates < 1)
        throw ConfigError(cfg.path + ": replicates must be >= 1");

    std::string out = "replicate,level,cell_index,mass\n";
    for (int k = 0; k < replicates; ++k) {
        CascadeField const field =
            simulate(gen, level, StreamKey{seed, static_cast<std::uint64_t>(k)});
        char buf[96];
        for (std::size_t cell = 0; cell < field.masses.size(); ++cell) {
            std::snprintf(buf, sizeof buf, "%d,%d,%zu,%.17g\n", k, level, cell,
                          field.masses[cell]);
            out += buf;
        }
    }
    write_file(prepare_out_dir(out_dir) / "cells.csv", out);
    return 0;
}

int cmd_tau(Config const& cfg, std::string const& out_dir) {
    Generator const gen = generator_from(cfg, "generator");
    int const level = cfg_int(cfg, "", "level");
    int const replicates = cfg_int(cfg, "", "replicates");
    if (replicates < 2)
        throw ConfigError(cfg.path + ": tau needs replicates >= 2 for standard errors");
    std::uint64_t const seed = seed_from(cfg);
    std::vector<double> const grid = q_grid_from(cfg);
    int const j_min = cfg.has("", "j_min") ? cfg_int(cfg, "", "j_min") : level - level / 2;
    int const j_max = cfg.has("", "j_max") ? cfg_int(cfg, "", "j_max") : level;

    Ensemble const ensemble(gen, level, replicates, seed);
    TauEstimate const est = estimate_tau(ensemble, grid, j_min, j_max);
    for (std::string const& w : est.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());

    std::string out = "q,tau_hat,tau_heuristic,stderr,j_min,j_max\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double heuristic;
        try {
            heuristic = gen.tau_heuristic(grid[i]);
        } catch (DivergentMomentError const&) {
            std::fprintf(stderr, "warning: q = %g skipped (heuristic moment diverges)\n",
                         grid[i]);
            continue;
        }
        if (!std::isfinite(est.tau_hat[i]) || !std::isfinite(est.std_error[i])) {
            std::fprintf(stderr, "warning: q = %g skipped (estimate unusable)\n", grid[i]);
            continue;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d,%d\n", grid[i],
                      est.tau_hat[i], heuristic, est.std_error[i], est.j_min, est.j_max);
        out += buf;
    }
    write_file(prepare_out_dir(out_dir) / "tau.csv", out);
    return 0;
}

int cmd_moments(Config const& cfg, std::string const& out_dir) {
    Generator const gen = generator_from(cfg, "generator");
    std::uint64_t const seed = seed_from(cfg);
    int const samples = cfg.has("", "samples") ? cfg_int(cfg, "", "samples") : 100000;
    std::vector<double> const rhos =
        cfg.has("", "rho") ? cfg_double_list(cfg, "", "rho") : std::vector<double>{0.5, 1.0, 2.0};

    std::string out = "kind,alpha,rho,empirical,stderr,closed_form\n";
    RngStream rng(seed);
    char buf[200];
    for (double const rho : rhos) {
        auto const est = empirical_weight_moments(gen, rho, samples, rng);
        for (int a = 0; a < gen.branching(); ++a) {
            std::snprintf(buf, sizeof buf, "weight,%d,%.17g,%.17g,%.17g,%.17g\n", a, rho,
                          est[a].mean, est[a].std_error, gen.component_moment(a, rho));
            out += buf;
        }
    }

    if (cfg.has("", "level") && cfg.has("", "replicates")) {
        int const level = cfg_int(cfg, "", "level");
        int const replicates = cfg_int(cfg, "", "replicates");
        Ensemble const ensemble(gen, level, replicates, seed);
        std::vector<double> totals(static_cast<std::size_t>(replicates));
        ensemble.run([&](int k, CascadeField const& field) { totals[k] = total_mass(field); });
        auto mass_row = [&](double rho, double closed) {
            double sum = 0.0;
            double sumsq = 0.0;
            for (double const m : totals) {
                double const v = rho == 1.0 ? m : m * m;
                sum += v;
                sumsq += v * v;
            }
            double const mean = sum / replicates;
            double const var =
                std::max(0.0, (sumsq - replicates * mean * mean) / (replicates - 1.0));
            std::snprintf(buf, sizeof buf, "mass,-1,%.17g,%.17g,%.17g,%.17g\n", rho, mean,
                          std::sqrt(var / replicates), closed);
            out += buf;
        };
        if (replicates < 2)
            throw ConfigError(cfg.path + ": mass moments need replicates >= 2");
        mass_row(1.0, 1.0);
        try {
            mass_row(2.0, total_mass_second_moment(gen));
        } catch (DivergentSecondMomentError const&) {
            std::fprintf(stderr, "warning: mass second-moment row skipped (divergent)\n");
        }
    }
    write_file(prepare_out_dir(out_dir) / "moments.csv", out);
    return 0;
}

json certificate_json(nt::CommutationCertificate const& cert) {
    json trace = json::array();
    for (auto const& [a, b] : cert.trace)
        trace.push_back({a, b});
    return json{{"verdict", nt::verdict_name(cert.verdict)},
                {"residual", cert.residual},
                {"witness", cert.witness},
                {"p", cert.p},
                {"k1", cert.k1},
                {"k2", cert.k2},
                {"trace", std::move(trace)},
                {"ambiguous", cert.ambiguous},
                {"exact", cert.exact},
                {"note", cert.note}};
}

int cmd_commute(std::string const& config_path, std::string const& x_literal,
                std::string const& y_literal, double rho, double tol,
                std::string const& out_dir) {
    json doc;
    nt::CommutationCertificate cert;
    if (!x_literal.empty() || !y_literal.empty()) {
        if (x_literal.empty() || y_literal.empty())
            throw ConfigError("--x and --y must be given together");
        std::vector<nt::Rational> x;
        std::vector<nt::Rational> y;
        json xs = json::array();
        json ys = json::array();
        for (std::string const& part : split(x_literal, ',')) {
            x.push_back(nt::parse_rational(part));
            xs.push_back(part);
        }
        for (std::string const& part : split(y_literal, ',')) {
            y.push_back(nt::parse_rational(part));
            ys.push_back(part);
        }
        auto const direct = nt::commutes_exact(x, y);
        cert = nt::certify_commuting_pair(std::move(x), std::move(y));
        doc["mode"] = "exact";
        doc["x"] = std::move(xs);
        doc["y"] = std::move(ys);
        doc["commutes"] = direct.commutes;
        doc["commute_residual"] = direct.residual;
        doc["commute_witness"] = direct.witness;
    } else {
        if (config_path.empty())
            throw ConfigError("commute needs either --x/--y literals or --config");
        Config const cfg = parse_config_file(config_path);
        Generator const gen1 = generator_from(cfg, "generator");
        Generator const gen2 = generator_from(cfg, "generator2");
        std::vector<double> x;
        std::vector<double> y;
        for (int a = 0; a < gen1.branching(); ++a)
            x.push_back(gen1.component_moment(a, rho));
        for (int b = 0; b < gen2.branching(); ++b)
            y.push_back(gen2.component_moment(b, rho));
        auto const direct = nt::commutes(x, y, tol);
        cert = nt::certify_commuting_pair(x, y, tol);
        doc["mode"] = "float";
        doc["generator1"] = gen1.describe();
        doc["generator2"] = gen2.describe();
        doc["rho"] = rho;
        doc["tolerance"] = tol;
        doc["x"] = x;
        doc["y"] = y;
        doc["commutes"] = direct.commutes;
        doc["commute_residual"] = direct.residual;
        doc["commute_witness"] = direct.witness;
    }
    doc.update(certificate_json(cert));
    write_file(prepare_out_dir(out_dir) / "certificate.json", doc.dump(2) + "\n");
    std::printf("verdict: %s\n", nt::verdict_name(cert.verdict).c_str());
    if (cert.ambiguous)
        std::fprintf(stderr, "warning: verdict is tolerance-ambiguous: %s\n", cert.note.c_str());
    return cert.verdict == nt::CommutationVerdict::NotCommuting ? 1 : 0;
}

json report_json(MomentConsistencyReport const& rep, Generator const& gen1,
                 Generator const& gen2) {
    return json{{"check", rep.check},
                {"generator1", gen1.describe()},
                {"generator2", gen2.describe()},
                {"rho", rep.rho},
                {"c1", rep.c1},
                {"c2", rep.c2},
                {"swapped", rep.swapped},
                {"xi_moments", rep.xi_moments},
                {"eta_moments", rep.eta_moments},
                {"commutation_residual", rep.commutation_residual},
                {"commutation_witness", rep.commutation_witness},
                {"constancy_residual", rep.constancy_residual},
                {"eq19_residual", rep.eq19_residual},
                {"eq19_printed_residual", rep.eq19_printed_residual},
                {"eq23_residual", rep.eq23_residual},
                {"v_a", rep.v_a},
                {"v_b", rep.v_b},
                {"a", rep.a_vec},
                {"b", rep.b_vec},
                {"x", rep.x_vec},
                {"y", rep.y_vec},
                {"x_direct", rep.x_direct},
                {"y_direct", rep.y_direct},
                {"xy_residual", rep.xy_residual},
                {"m2_xi", rep.m2_xi},
                {"m2_eta", rep.m2_eta},
                {"common_base", rep.common_base},
                {"base_p", rep.base_p},
                {"base_k1", rep.base_k1},
                {"base_k2", rep.base_k2},
                {"rho_within_qplus", rep.rho_within_qplus},
                {"locally_positive", rep.locally_positive},
                {"verdict", rep.consistent ? "consistent" : "inconsistent"},
                {"consistent", rep.consistent},
                {"tolerance", rep.tolerance},
                {"warnings", rep.warnings}};
}

int cmd_consistency(Config const& cfg, std::string const& out_dir, bool lemma2) {
    Generator const gen1 = generator_from(cfg, "generator");
    Generator const gen2 = generator_from(cfg, "generator2");
    double const tol = cfg.has("", "tolerance") ? cfg_double(cfg, "", "tolerance") : 1e-12;
    MomentConsistencyReport rep;
    if (lemma2) {
        std::vector<double> const rhos =
            cfg.has("", "rho") ? cfg_double_list(cfg, "", "rho") : std::vector<double>{2.0};
        if (rhos.size() != 1)
            throw ConfigError(cfg.path + ": this check takes a single rho");
        rep = lemma2_moment_check(gen1, gen2, rhos[0], tol);
    } else {
        rep = second_moment_xy_check(gen1, gen2, tol);
    }
    for (std::string const& w : rep.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    write_file(prepare_out_dir(out_dir) / "consistency.json",
               report_json(rep, gen1, gen2).dump(2) + "\n");
    std::printf("verdict: %s\n", rep.consistent ? "consistent" : "inconsistent");
    return rep.consistent ? 0 : 1;
}

std::uint64_t exponent_of(std::uint64_t c, std::uint64_t p) {
    std::uint64_t k = 0;
    std::uint64_t v = 1;
    while (v < c) {
        v *= p;
        ++k;
    }
    return k;
}

int cmd_identify_base(std::uint64_t c1, std::uint64_t c2) {
    if (c1 < 2 || (c2 != 0 && c2 < 2))
        throw ConfigError("branching parameters must be >= 2");
    std::uint64_t const p1 = nt::minimal_base(c1);
    std::printf("minimal_base(%" PRIu64 ") = %" PRIu64 "  (%" PRIu64 " = %" PRIu64 "^%" PRIu64
                ")\n",
                c1, p1, c1, p1, exponent_of(c1, p1));
    if (c2 == 0)
        return 0;
    std::uint64_t const p2 = nt::minimal_base(c2);
    std::printf("minimal_base(%" PRIu64 ") = %" PRIu64 "  (%" PRIu64 " = %" PRIu64 "^%" PRIu64
                ")\n",
                c2, p2, c2, p2, exponent_of(c2, p2));
    if (auto const base = nt::common_power_base(c1, c2))
        std::printf("common_power_base(%" PRIu64 ", %" PRIu64 ") = %" PRIu64 "  (%" PRIu64
                    " = %" PRIu64 "^%" PRIu64 ", %" PRIu64 " = %" PRIu64 "^%" PRIu64 ")\n",
                    c1, c2, base->p, c1, base->p, base->k1, c2, base->p, base->k2);
    else
        std::printf("common_power_base(%" PRIu64 ", %" PRIu64 ") = none\n", c1, c2);
    return 0;
}

} // namespace

int run(std::vector<std::string> const& args) {
    CLI::App app{"random cascade simulation and branching-parameter consistency checks"};
    app.name("cascadelab");
    app.require_subcommand(1);

    struct {
        std::string config;
        std::string out = ".";
        std::string x;
        std::string y;
        double rho = 1.0;
        double tol = 1e-9;
        std::uint64_t c1 = 0;
        std::uint64_t c2 = 0;
    } opt;

    auto add_config = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--config", opt.config, "run configuration file");
        if (required)
            o->required();
    };
    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", opt.out, "output directory (default .)");
    };

    CLI::App* gen_info = app.add_subcommand("gen-info", "print generator diagnostics");
    add_config(gen_info, true);

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "write cell masses to cells.csv");
    add_config(simulate_cmd, true);
    add_out(simulate_cmd);

    CLI::App* tau_cmd = app.add_subcommand("tau", "fit scaling exponents into tau.csv");
    add_config(tau_cmd, true);
    add_out(tau_cmd);

    CLI::App* moments_cmd =
        app.add_subcommand("moments", "empirical vs closed-form moments into moments.csv");
    add_config(moments_cmd, true);
    add_out(moments_cmd);

    CLI::App* commute_cmd =
        app.add_subcommand("commute", "tensor-commutation certificate into certificate.json");
    add_config(commute_cmd, false);
    add_out(commute_cmd);
    commute_cmd->add_option("--x", opt.x, "first vector, comma-separated rationals");
    commute_cmd->add_option("--y", opt.y, "second vector, comma-separated rationals");
    commute_cmd->add_option("--rho", opt.rho,
                            "moment order for generator vectors (default 1 = means)");
    commute_cmd->add_option("--tol", opt.tol, "relative tolerance in float mode");

    CLI::App* xy_cmd =
        app.add_subcommand("xy-check", "adjacent-cell second-moment system into consistency.json");
    add_config(xy_cmd, true);
    add_out(xy_cmd);

    CLI::App* lemma2_cmd =
        app.add_subcommand("lemma2", "moment-vector consistency into consistency.json");
    add_config(lemma2_cmd, true);
    add_out(lemma2_cmd);

    CLI::App* base_cmd = app.add_subcommand("identify-base", "minimal and common power bases");
    base_cmd->add_option("--c1", opt.c1, "first branching parameter")->required();
    base_cmd->add_option("--c2", opt.c2, "second branching parameter");

    std::vector<std::string> argv_store = args;
    std::vector<char*> argv;
    static char prog_name[] = "cascadelab";
    argv.push_back(prog_name);
    for (std::string& s : argv_store)
        argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen_info)
            return cmd_gen_info(parse_config_file(opt.config));
        if (*simulate_cmd)
            return cmd_simulate(parse_config_file(opt.config), opt.out);
        if (*tau_cmd)
            return cmd_tau(parse_config_file(opt.config), opt.out);
        if (*moments_cmd)
            return cmd_moments(parse_config_file(opt.config), opt.out);
        if (*commute_cmd)
            return cmd_commute(opt.config, opt.x, opt.y, opt.rho, opt.tol, opt.out);
        if (*xy_cmd)
            return cmd_consistency(parse_config_file(opt.config), opt.out, false);
        if (*lemma2_cmd)
            return cmd_consistency(parse_config_file(opt.config), opt.out, true);
        if (*base_cmd)
            return cmd_identify_base(opt.c1, opt.c2);
    } catch (std::exception const& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

} // namespace cascadelab::cli
