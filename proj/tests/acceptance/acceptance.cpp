// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "foliage/cli.hpp"
#include "foliage/hopf_ledger.hpp"
#include "foliage/linear_index.hpp"
#include "foliage/nerve_cech.hpp"
#include "foliage/witten_spectral.hpp"

using namespace foliage;

namespace {

// Pinned tolerances.
constexpr double kSupertraceTol = 0.05;
constexpr double kMarginMin = 0.25;
constexpr double kMorseEulerTol = 0.05;
constexpr double kLocalizationDrop = 10.0;
constexpr double kReconstructionTol = 1e-10;
constexpr double kCriterion1Seconds = 5.0;
constexpr double kCriterion6Seconds = 30.0;

const std::string data_dir = FOLIAGE_DATA_DIR;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

cli::RunResult run(const std::string& command, const std::string& file, std::optional<std::size_t> cokernel = {})
{
    cli::RunConfig cfg;
    cfg.command = command;
    cfg.input_path = data_dir + "/" + file;
    cfg.cokernel = cokernel;
    return cli::run(cfg);
}

// Index and Hopf report of a critical-record file, checked against expected indices.
Outcome end_to_end(const std::string& file, const std::vector<int>& indices)
{
    Outcome o;
    cli::RunResult idx = run("index", file), hopf = run("hopf", file);
    if (idx.exit_code != 0 || hopf.exit_code != 0)
        return {false, "exit codes " + std::to_string(idx.exit_code) + "/" + std::to_string(hopf.exit_code) + " " +
                           idx.error + hopf.error};
    const auto& leaves = idx.data.at("leaf_closures");
    o.pass = leaves.size() == indices.size();
    for (std::size_t k = 0; o.pass && k < indices.size(); ++k)
        o.pass = leaves[k].at("index") == indices[k] && leaves[k].at("index_matches_minus_one_parity") == true &&
                 leaves[k].at("path_index_constant") == true;
    o.pass = o.pass && hopf.data.at("hopf_sum") == 2 && hopf.data.at("chi_direct") == 2 &&
             hopf.data.at("verdict") == "match";
    o.detail = "hopf_sum=" + hopf.data.at("hopf_sum").dump() + " verdict=" + hopf.data.at("verdict").dump();
    return o;
}

// ---- criterion 9 generators ----------------------------------------------

// Clique complex of a random graph, every intersection connected.
CoverNerve random_nerve(std::mt19937& rng)
{
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 7)(rng);
    std::bernoulli_distribution edge(0.55);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            adj[i][j] = adj[j][i] = edge(rng);
    CoverNerve cover;
    cover.name = "random";
    for (std::size_t i = 0; i < n; ++i)
        cover.sets.push_back("U" + std::to_string(i));
    for (unsigned mask = 1; mask < (1u << n); ++mask)
    {
        IndexTuple t;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                t.push_back(i);
        if (t.size() < 2 || t.size() > 4)
            continue;
        bool clique = true;
        for (std::size_t a = 0; clique && a < t.size(); ++a)
            for (std::size_t b = a + 1; clique && b < t.size(); ++b)
                clique = adj[t[a]][t[b]];
        if (clique)
            cover.intersections.push_back(Intersection{t, 1, {}});
    }
    return cover;
}

Eigen::MatrixXd random_orthogonal(std::mt19937& rng, Eigen::Index n)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return g(rng); });
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

// Singular values in [0.5, 2]; odd entries carry m planted eigenvalues -1 in Θ.
std::pair<Eigen::MatrixXd, int> random_linearization(std::mt19937& rng, std::size_t k)
{
    const Eigen::Index n = std::uniform_int_distribution<int>(1, 5)(rng);
    std::uniform_real_distribution<double> sv(0.5, 2.0);
    Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(n, [&]() { return sv(rng); });
    if (k % 2 == 0)
        return {random_orthogonal(rng, n) * s.asDiagonal() * random_orthogonal(rng, n).transpose(), -1};
    const int m = std::uniform_int_distribution<int>(0, static_cast<int>(n))(rng);
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    d.head(m).setConstant(-1.0);
    Eigen::MatrixXd r = random_orthogonal(rng, n), w = random_orthogonal(rng, n);
    return {w * s.asDiagonal() * w.transpose() * r * d.asDiagonal() * r.transpose(), m};
}

}   // namespace

int main()
{
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

    criteria.emplace_back("sphere with three closed-leaf components: indices 1,1,-1, Hopf sum 2 = chi", [] {
        const auto start = Clock::now();
        Outcome o = end_to_end("example1.json", {1, 1, -1});
        const double elapsed = seconds_since(start);
        o.pass = o.pass && elapsed < kCriterion1Seconds;
        o.detail += " time=" + std::to_string(elapsed) + "s";
        return o;
    });

    criteria.emplace_back("torus with two closed leaves: indices 1,-1, Hopf sum 2 = chi", [] {
        Outcome o = end_to_end("example2.json", {1, -1});
        cli::RunResult idx = run("index", "example2.json");
        const auto& leaves = idx.data.at("leaf_closures");
        o.pass = o.pass && leaves[0].at("minus_one_dim") == 0 && leaves[1].at("minus_one_dim") == 1;
        return o;
    });

    criteria.emplace_back("three-set cover: cokernel of the degree-0 coboundary has dimension 1", [] {
        cli::RunResult r = run("cech", "mv_counterexample.json", 0);
        const bool pass = r.exit_code == 0 && r.data.at("cokernel").at("dim") == 1 &&
                          r.data.at("dims") == io::json::array({3, 3});
        return Outcome{pass, "cokernel=" + (r.exit_code == 0 ? r.data.at("cokernel").dump() : r.error)};
    });

    criteria.emplace_back("irrational torus cover: first Cech group vanishes, hypothesis flagged unverified", [] {
        cli::RunResult r = run("cech", "torus_irrational.json");
        const bool pass = r.exit_code == 0 && r.data.at("betti") == io::json::array({1}) &&
                          r.data.at("good_cover_hypothesis_verified") == false;
        return Outcome{pass, "betti=" + (r.exit_code == 0 ? r.data.at("betti").dump() : r.error)};
    });

    criteria.emplace_back("heat supertrace equals the basic Euler characteristic on both presets", [] {
        Outcome o;
        double worst = 0.0;
        for (const auto& p : {example1_profile(64), example2_profile(64)})
        {
            BasicComplexMatrices m = assemble(p);
            const auto b = betti_numeric(m);
            const double euler = double(b[0]) - double(b[1]) + double(b[2]);
            o.pass = o.pass && std::abs(euler - 2.0) < 1e-12;
            for (double t : {0.1, 0.25, 0.5, 1.0})
                worst = std::max(worst, std::abs(heat_supertrace(m, t) - euler));
        }
        o.pass = o.pass && worst <= kSupertraceTol;
        o.detail = "max deviation=" + std::to_string(worst);
        return o;
    });

    criteria.emplace_back("Witten supertrace is the integer 2 for s in {0,1,5,20}", [] {
        const auto start = Clock::now();
        Outcome o;
        double margin = 1.0;
        for (const auto& p : {example1_profile(64), example2_profile(64)})
        {
            WittenSweep sw = witten_sweep(assemble(p), {0.0, 1.0, 5.0, 20.0}, 0.5, kMarginMin);
            o.pass = o.pass && sw.indices() == std::vector<long long>{2, 2, 2, 2} && sw.constant;
            for (const auto& pt : sw.points)
                margin = std::min(margin, pt.margin);
        }
        const double elapsed = seconds_since(start);
        o.pass = o.pass && margin >= kMarginMin && elapsed < kCriterion6Seconds;
        o.detail = "min margin=" + std::to_string(margin) + " time=" + std::to_string(elapsed) + "s";
        return o;
    });

    criteria.emplace_back("Morse inequalities hold and the alternating Morse count is 2", [] {
        Outcome o;
        double worst = 0.0;
        for (const auto& p : {example1_profile(64), example2_profile(64)})
        {
            BasicComplexMatrices m = assemble(p);
            for (double s : {0.0, 5.0})
                for (double t : {0.25, 0.5})
                {
                    MorseReport r = morse_check(m, s, t);
                    o.pass = o.pass && r.all_hold;
                    worst = std::max(worst, std::abs(r.euler_mu - 2.0));
                }
        }
        o.pass = o.pass && worst <= kMorseEulerTol;
        o.detail = "max |sum(-1)^j mu_j - 2|=" + std::to_string(worst);
        return o;
    });

    criteria.emplace_back("heat mass concentrates near the zeros of V as s grows", [] {
        BasicComplexMatrices m = assemble(example2_profile(64));
        LocalizationReport r = localization_profile(m, {1.0, 20.0}, 0.5, {0.0, M_PI}, 0.25);
        const double drop = r.points[0].outside_ratio / r.points[1].outside_ratio;
        return Outcome{r.min_norm_v2_outside > 0.0 && drop >= kLocalizationDrop,
                       "outside mass " + std::to_string(r.points[0].outside_ratio) + " -> " +
                           std::to_string(r.points[1].outside_ratio)};
    });

    criteria.emplace_back("property suites: coboundary squares, polar corpus, mode doubling", [] {
        Outcome o;
        std::mt19937 rng(2024);
        std::size_t nerves = 0, matrices = 0;
        for (int k = 0; k < 100; ++k)
        {
            CechComplex c = build_complex(random_nerve(rng));
            bool ok = true;
            for (std::size_t p = 0; p + 1 < c.deltas.size(); ++p)
                ok = ok && (c.deltas[p + 1] * c.deltas[p]).is_zero();
            CohomologySummary s = betti(c);
            ok = ok && s.euler == s.euler_from_dims;
            nerves += ok;
        }
        for (std::size_t k = 0; k < 100; ++k)
        {
            auto [v, planted] = random_linearization(rng, k);
            Linearization lin{v, "corpus"};
            PolarParts parts = polar_decompose(lin);
            const int index = index_of(lin);
            const double err = (parts.P * parts.Theta - v).norm() / v.norm();
            bool ok = err <= kReconstructionTol && index == (parts.minus_one_dim % 2 == 0 ? 1 : -1) &&
                      path_index_constancy(lin, 100);
            if (planted >= 0)
                ok = ok && parts.minus_one_dim == static_cast<std::size_t>(planted);
            matrices += ok;
        }
        bool stable = true;
        for (auto preset : {example1_profile, example2_profile})
            stable = stable && betti_numeric(assemble(preset(64))) == betti_numeric(assemble(preset(128)));
        o.pass = nerves == 100 && matrices == 100 && stable;
        o.detail = "nerves " + std::to_string(nerves) + "/100, matrices " + std::to_string(matrices) +
                   "/100, betti stable under N->2N: " + (stable ? "yes" : "no");
        return o;
    });

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k)
    {
        Outcome o;
        try
        {
            o = criteria[k].second();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
