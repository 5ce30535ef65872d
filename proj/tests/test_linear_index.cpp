#include <cmath>
#include <random>
#include <vector>

#include <catch_amalgamated.hpp>
#include <Eigen/Dense>

#include "foliage/linear_index.hpp"

using namespace foliage;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows)
{
    Eigen::MatrixXd m(rows.size(), rows.begin()->size());
    Eigen::Index i = 0;
    for (const auto& r : rows)
    {
        Eigen::Index j = 0;
        for (double v : r)
            m(i, j++) = v;
        ++i;
    }
    return m;
}

Eigen::MatrixXd rotation(double angle)
{
    return mat({{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}});
}

// Oracle: determinant by cofactor expansion along the first row.
double cofactor_det(const Eigen::MatrixXd& a)
{
    const Eigen::Index n = a.rows();
    if (n == 1)
        return a(0, 0);
    double det = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
    {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r)
            for (Eigen::Index c = 0, k = 0; c < n; ++c)
                if (c != j)
                    minor(r - 1, k++) = a(r, c);
        det += (j % 2 == 0 ? 1.0 : -1.0) * a(0, j) * cofactor_det(minor);
    }
    return det;
}

// Oracle: P = (V Vᵀ)^{1/2} from a symmetric eigensolve, Θ = P⁻¹ V.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> oracle_polar(const Eigen::MatrixXd& v)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v * v.transpose());
    Eigen::MatrixXd p = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return {p, p.inverse() * v};
}

Eigen::MatrixXd random_orthogonal(std::mt19937& rng, Eigen::Index n)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

struct CorpusEntry
{
    Eigen::MatrixXd matrix;
    int planted_minus_one = -1;     // known multiplicity of -1 in Θ, if planted
};

// Well-conditioned matrices: singular values in [0.5, 2]. Half are built as
// P·Θ with Θ carrying a planted number of -1 eigenvalues.
std::vector<CorpusEntry> corpus(std::size_t count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dim(1, 5);
    std::uniform_real_distribution<double> sv(0.5, 2.0), angle(0.3, 2.8);
    std::vector<CorpusEntry> out;
    for (std::size_t k = 0; k < count; ++k)
    {
        const Eigen::Index n = dim(rng);
        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i)
            s(i) = sv(rng);
        if (k % 2 == 0)
        {
            out.push_back({random_orthogonal(rng, n) * s.asDiagonal() * random_orthogonal(rng, n).transpose(), -1});
            continue;
        }
        // Θ = R · blockdiag(-1 ×m, rotations, +1 ...) · Rᵀ
        Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n);
        const int m = std::uniform_int_distribution<int>(0, static_cast<int>(n))(rng);
        Eigen::Index i = 0;
        for (; i < m; ++i)
            d(i, i) = -1.0;
        while (i + 1 < n && std::bernoulli_distribution(0.5)(rng))
        {
            d.block(i, i, 2, 2) = rotation(angle(rng));
            i += 2;
        }
        Eigen::MatrixXd r = random_orthogonal(rng, n);
        Eigen::MatrixXd w = random_orthogonal(rng, n);
        Eigen::MatrixXd p = w * s.asDiagonal() * w.transpose();
        out.push_back({p * r * d * r.transpose(), m});
    }
    return out;
}

}   // namespace

TEST_CASE("index_of on worked matrices")
{
    CHECK(index_of({mat({{1, -1}, {1, 1}}), "north"}) == 1);
    CHECK(index_of({mat({{-1, 1}, {-1, -1}}), "south"}) == 1);
    CHECK(index_of({mat({{-1}}), "equator"}) == -1);
    for (int q = 1; q <= 6; ++q)
        CHECK(index_of({Eigen::MatrixXd::Identity(q, q), "id"}) == 1);
    CHECK(index_of({mat({{2, 0}, {0, -3}}), "saddle"}) == -1);
}

TEST_CASE("degenerate and malformed linearizations")
{
    CHECK_THROWS_AS(index_of({mat({{1, 1}, {1, 1}}), "rank one"}), DegenerateLinearization);
    CHECK_THROWS_AS(index_of({mat({{0}}), "zero"}), DegenerateLinearization);
    CHECK_THROWS_AS(index_of({mat({{1, 0}, {0, 1e-12}}), "tiny"}), DegenerateLinearization);
    CHECK_THROWS_AS(polar_decompose({mat({{1, 2}, {2, 4}}), "singular"}), DegenerateLinearization);
    CHECK_THROWS_AS(index_of({Eigen::MatrixXd(0, 0), "empty"}), DimensionMismatch);
    CHECK_THROWS_AS(index_of({Eigen::MatrixXd::Ones(2, 3), "rect"}), DimensionMismatch);
    // Tolerance is relative: uniform scaling does not make a matrix degenerate.
    CHECK(index_of({1e-8 * Eigen::MatrixXd::Identity(3, 3), "small"}) == 1);
}

TEST_CASE("polar_decompose on worked matrices")
{
    PolarParts a = polar_decompose({mat({{1, -1}, {1, 1}}), "north"});
    CHECK((a.P - std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
    CHECK((a.Theta - rotation(M_PI / 4)).norm() < 1e-12);
    CHECK(a.minus_one_dim == 0);

    PolarParts b = polar_decompose({mat({{-1}}), "theta2 = pi"});
    CHECK_THAT(b.P(0, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(b.Theta(0, 0), WithinAbs(-1.0, 1e-15));
    CHECK(b.minus_one_dim == 1);

    PolarParts c = polar_decompose({Eigen::MatrixXd::Identity(3, 3), "id"});
    CHECK((c.P - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
    CHECK((c.Theta - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
    CHECK(c.minus_one_dim == 0);

    // Non-normal: left and right polar factors differ; P must be √(VVᵀ).
    Eigen::MatrixXd v = mat({{2, 1}, {0, 1}});
    PolarParts d = polar_decompose({v, "shear"});
    CHECK((d.P * d.P - v * v.transpose()).norm() < 1e-12);
    CHECK((d.P * d.Theta - v).norm() < 1e-12);
}

TEST_CASE("corpus: reconstruction, oracle agreement, index parity")
{
    for (const auto& e : corpus(100, 11))
    {
        Linearization lin{e.matrix, "corpus"};
        PolarParts parts = polar_decompose(lin);
        const Eigen::Index n = e.matrix.rows();
        CHECK((parts.P * parts.Theta - e.matrix).norm() <= 1e-10 * e.matrix.norm());
        CHECK((parts.P - parts.P.transpose()).norm() == 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(parts.P).eigenvalues().minCoeff() > 0.0);
        CHECK((parts.Theta.transpose() * parts.Theta - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-12);

        auto [p_oracle, theta_oracle] = oracle_polar(e.matrix);
        CHECK((parts.P - p_oracle).norm() < 1e-10);
        CHECK((parts.Theta - theta_oracle).norm() < 1e-10);

        const int index = index_of(lin);
        CHECK(index == (cofactor_det(e.matrix) > 0 ? 1 : -1));
        CHECK(index == (parts.minus_one_dim % 2 == 0 ? 1 : -1));
        if (e.planted_minus_one >= 0)
            CHECK(parts.minus_one_dim == static_cast<std::size_t>(e.planted_minus_one));

        for (double c : {1e-3, 0.5, 7.0, 1e4})
            CHECK(index_of({c * e.matrix, "scaled"}) == index);
    }
}

TEST_CASE("corpus: deformation path keeps the index")
{
    for (const auto& e : corpus(100, 29))
    {
        Linearization lin{e.matrix, "corpus"};
        CHECK(path_index_constancy(lin, 100));

        CHECK(deformation_path(lin, 0.0) == e.matrix);
        Eigen::MatrixXd end = deformation_path(lin, 1.0);
        const Eigen::Index n = e.matrix.rows();
        CHECK((end.transpose() * end - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-9);
        // Similar to diag(±1): symmetric orthogonal, so an involution.
        CHECK((end * end - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-9);
        CHECK(detail::count_minus_one(end, 1e-8) == polar_decompose(lin).minus_one_dim);

        // Halfway the positive factor is gone.
        CHECK((deformation_path(lin, 0.5) - polar_decompose(lin).Theta).norm() < 1e-9);

        // No jumps: consecutive samples on a fine grid stay close.
        double worst = 0.0;
        Eigen::MatrixXd prev = e.matrix;
        for (int k = 1; k <= 400; ++k)
        {
            Eigen::MatrixXd cur = deformation_path(lin, k / 400.0);
            worst = std::max(worst, (cur - prev).norm());
            prev = cur;
        }
        CHECK(worst < 0.1);
    }
}

TEST_CASE("deformation path on worked matrices")
{
    Linearization north{mat({{1, -1}, {1, 1}}), "north"};
    CHECK((deformation_path(north, 1.0) - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
    // Stage 1: (√2)^(1-2t) times the π/4 rotation.
    CHECK((deformation_path(north, 0.25) - std::pow(2.0, 0.25) * rotation(M_PI / 4)).norm() < 1e-12);
    // Stage 2: the angle unwinds linearly.
    CHECK((deformation_path(north, 0.75) - rotation(M_PI / 8)).norm() < 1e-12);
    CHECK(path_index_constancy(north, 100));

    Linearization flip{mat({{-1}}), "flip"};
    for (int k = 0; k <= 100; ++k)
        CHECK_THAT(deformation_path(flip, k / 100.0)(0, 0), WithinAbs(-1.0, 1e-15));
    CHECK(path_index_constancy(flip, 100));

    Linearization saddle{mat({{2, 0}, {0, -3}}), "saddle"};
    CHECK(path_index_constancy(saddle, 100));
    for (int k = 0; k <= 100; ++k)
    {
        const double t = k / 100.0;
        // Oracle: the path stays diagonal with entries 2^(1-2t), -3^(1-2t), then ±1.
        const double e = std::max(0.0, 1.0 - 2.0 * t);
        CHECK_THAT(deformation_path(saddle, t).determinant(), WithinAbs(-std::pow(6.0, e), 1e-10));
    }

    // A -I block (rotation by π) stays fixed in stage 2.
    Linearization half_turn{-3.0 * Eigen::MatrixXd::Identity(2, 2), "half turn"};
    CHECK((deformation_path(half_turn, 1.0) + Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
    CHECK(polar_decompose(half_turn).minus_one_dim == 2);
    CHECK(index_of(half_turn) == 1);

    CHECK_THROWS_AS(deformation_path(north, -0.1), ParameterOutOfRange);
    CHECK_THROWS_AS(deformation_path(north, 1.5), ParameterOutOfRange);
    CHECK_THROWS_AS(deformation_path(north, std::nan("")), ParameterOutOfRange);
    CHECK_THROWS_AS(path_index_constancy(north, 1), ParameterOutOfRange);
    CHECK_THROWS_AS(deformation_path({mat({{1, 1}, {1, 1}}), "deg"}, 0.5), DegenerateLinearization);
}

TEST_CASE("holonomy commutation")
{
    Linearization north{mat({{1, -1}, {1, 1}}), "north"};
    CHECK(holonomy_commutes(north, {{rotation(M_PI * std::sqrt(2.0)), rotation(0.3)}}).commutes);
    CHECK(holonomy_commutes({mat({{-1}}), "pi"}, {{mat({{-1}})}}).commutes);
    CHECK(holonomy_commutes(north, {}).commutes);

    // Oracle: g·V - V·g computed by hand is [[0,-2],[-2,0]] ≠ 0.
    Linearization split{mat({{1, 0}, {0, -1}}), "split"};
    CommutationReport r = holonomy_commutes(split, {{rotation(M_PI / 2)}});
    CHECK_FALSE(r.commutes);
    CHECK_FALSE(r.with_linearization);
    CHECK_FALSE(r.with_Theta);
    CHECK(r.with_P);      // P = I commutes with everything
    CHECK_THAT(r.max_residual, WithinAbs(std::sqrt(8.0) / std::sqrt(2.0), 1e-12));

    CHECK_THROWS_AS(holonomy_commutes(north, {{mat({{1}})}}), DimensionMismatch);
    CHECK_THROWS_AS(holonomy_commutes(north, {{mat({{1, 0.1}, {0, 1}})}}), NonOrthogonalHolonomy);
}
