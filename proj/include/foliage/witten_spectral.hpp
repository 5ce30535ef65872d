/**
 * One-variable reductions of basic complexes and their Witten deformation.
 *
 * The transverse geometry is two-dimensional with an orthonormal frame
 * (e_x, e_y), where x is the transverse coordinate the basic data depend
 * on and y runs along leaf closures. The length of ∂_y is the weight w(x),
 * so the reduced L² inner product is ∫ u v w dx. A basic form is stored as
 * coefficient functions of x:
 *
 *     degree 0:  f                 degree 1:  u_x e^x + u_y e^y
 *     degree 2:  c e^x ∧ e^y
 *
 * with exterior derivative d f = f' e^x and d(u_x e^x + u_y e^y) =
 * (1/w)(w u_y)' e^x∧e^y. Boundary behaviour is encoded by parity under the
 * reflection x -> -x: each component lives in a cosine (even) or sine (odd)
 * family truncated at `modes`. Components may be switched off.
 *
 * Every component basis is orthonormalized in the weighted inner product
 * (Cholesky of its Gram matrix), so adjoints are transposes and all
 * Laplacians are symmetric matrices.
 *
 * The Witten deformation adds H = i(V) + V♭∧ for the transverse field
 * V = V_x e_x + V_y e_y, and D_s = d + δ + sH.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/legendre.hpp>

#include "foliage/errors.hpp"

namespace foliage {

enum class Parity { even, odd, none };
enum class Interval { half, full };     // [0, π] or the circle [0, 2π)

inline const char* to_string(Parity p)
{
    return p == Parity::even ? "even" : p == Parity::odd ? "odd" : "none";
}

inline const char* to_string(Interval i) { return i == Interval::half ? "half" : "full"; }

/** A real function of the transverse coordinate, with a printable origin. */
struct TransverseFunction
{
    std::string description;
    std::function<double(double)> eval;

    double operator()(double x) const { return eval(x); }
};

/** Components of the graded space, in storage order. */
enum Component : std::size_t { deg0 = 0, deg1x = 1, deg1y = 2, deg2 = 3 };
inline constexpr std::array<int, 4> component_degree{0, 1, 1, 2};

struct SpectralProfile
{
    std::string name;
    std::size_t modes = 64;
    Interval interval = Interval::half;
    std::array<Parity, 4> parity{Parity::even, Parity::odd, Parity::odd, Parity::even};
    TransverseFunction weight;
    TransverseFunction field_x;
    TransverseFunction field_y;
    std::vector<double> s_values;
    std::vector<double> t_values;
    std::vector<double> critical_points;    // transverse coordinates of critical leaf closures
    double rho = 0.25;                      // localization radius
};

struct BasicComplexMatrices
{
    Interval interval = Interval::half;
    std::array<std::size_t, 4> block_size{};
    std::array<std::size_t, 4> block_offset{};

    Eigen::MatrixXd d;          // raises degree by one
    Eigen::MatrixXd delta;      // weighted adjoint of d
    Eigen::MatrixXd H;          // i(V) + V♭∧
    Eigen::MatrixXd norm_v2;    // multiplication by ‖V‖²

    // Quadrature data: nodes x_q, weights (quadrature × w(x_q)), and the
    // orthonormal basis of each component sampled at the nodes.
    Eigen::VectorXd nodes;
    Eigen::VectorXd measure;
    std::array<Eigen::MatrixXd, 4> values;
    std::array<Eigen::MatrixXd, 4> derivatives;
    // φ = (raw cos/sin family) · change_of_basis, upper triangular.
    std::array<Eigen::MatrixXd, 4> change_of_basis;
    Eigen::VectorXd field_x;
    Eigen::VectorXd field_y;

    std::size_t dimension() const { return static_cast<std::size_t>(d.rows()); }

    /** Degree (0, 1, 2) of each coordinate of the graded space. */
    std::vector<int> degrees() const
    {
        std::vector<int> out;
        for (std::size_t c = 0; c < 4; ++c)
            out.insert(out.end(), block_size[c], component_degree[c]);
        return out;
    }

    /** Indices of the coordinates of one degree. */
    std::vector<Eigen::Index> degree_indices(int degree) const
    {
        std::vector<Eigen::Index> out;
        auto deg = degrees();
        for (std::size_t i = 0; i < deg.size(); ++i)
            if (deg[i] == degree)
                out.push_back(static_cast<Eigen::Index>(i));
        return out;
    }

    /** The map d^p : Ω^p -> Ω^{p+1} as a rectangular matrix. */
    Eigen::MatrixXd d_block(int p) const
    {
        auto rows = degree_indices(p + 1), cols = degree_indices(p);
        Eigen::MatrixXd out(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j)
                out(i, j) = d(rows[i], cols[j]);
        return out;
    }

    Eigen::MatrixXd dirac() const { return d + delta; }
    Eigen::MatrixXd laplacian() const { return d * delta + delta * d; }
    Eigen::MatrixXd witten_dirac(double s) const { return d + delta + s * H; }
};

// --------------------------------------------------------------------------
// Transverse functions and presets
// --------------------------------------------------------------------------

inline TransverseFunction constant_function(double value, std::string description)
{
    return {std::move(description), [value](double) { return value; }};
}

/**
 * Piecewise-linear interpolant of samples on the uniform grid of the
 * interval: x_k = kπ/(M-1) on [0, π], or x_k = 2πk/M on the circle.
 */
inline TransverseFunction sampled_function(std::vector<double> samples, Interval interval, std::string description)
{
    if (samples.size() < 2)
        throw InvalidProfile(description + ": need at least two samples");
    const double two_pi = 2.0 * M_PI;
    return {std::move(description), [samples = std::move(samples), interval, two_pi](double x) {
        const std::size_t m = samples.size();
        if (interval == Interval::half)
        {
            double pos = std::clamp(x, 0.0, M_PI) / M_PI * static_cast<double>(m - 1);
            std::size_t k = std::min(static_cast<std::size_t>(pos), m - 2);
            double frac = pos - static_cast<double>(k);
            return (1.0 - frac) * samples[k] + frac * samples[k + 1];
        }
        double wrapped = std::fmod(x, two_pi);
        if (wrapped < 0.0)
            wrapped += two_pi;
        double pos = wrapped / two_pi * static_cast<double>(m);
        std::size_t k = static_cast<std::size_t>(pos) % m;
        double frac = pos - std::floor(pos);
        return (1.0 - frac) * samples[k] + frac * samples[(k + 1) % m];
    }};
}

/**
 * Sphere reduction: x = polar angle φ ∈ [0, π], y = longitude θ with
 * |∂_θ| = sin φ. The field (cos φ)∂_θ + (sin φ cos φ)∂_φ has frame
 * components V_x = V_y = sin φ cos φ.
 */
inline SpectralProfile example1_profile(std::size_t modes = 64)
{
    SpectralProfile p;
    p.name = "example1";
    p.modes = modes;
    p.interval = Interval::half;
    p.parity = {Parity::even, Parity::odd, Parity::odd, Parity::even};
    p.weight = {"sin", [](double x) { return std::sin(x); }};
    p.field_x = {"example1", [](double x) { return std::sin(x) * std::cos(x); }};
    p.field_y = {"example1", [](double x) { return std::sin(x) * std::cos(x); }};
    p.s_values = {0.0, 1.0, 5.0, 20.0};
    p.t_values = {0.1, 0.25, 0.5, 1.0};
    p.critical_points = {0.0, M_PI / 2.0, M_PI};
    return p;
}

/**
 * Torus suspension reduction: x = θ₂ on the circle, y = θ₁, flat weight.
 * Invariance under (θ₁, θ₂) -> (-θ₁, -θ₂) makes functions and 2-form
 * coefficients even and both 1-form coefficients odd. Field W = sin θ₂ ∂_θ₂.
 */
inline SpectralProfile example2_profile(std::size_t modes = 64)
{
    SpectralProfile p;
    p.name = "example2";
    p.modes = modes;
    p.interval = Interval::full;
    p.parity = {Parity::even, Parity::odd, Parity::odd, Parity::even};
    p.weight = constant_function(1.0, "one");
    p.field_x = {"example2", [](double x) { return std::sin(x); }};
    p.field_y = constant_function(0.0, "zero");
    p.s_values = {0.0, 1.0, 5.0, 20.0};
    p.t_values = {0.1, 0.25, 0.5, 1.0};
    p.critical_points = {0.0, M_PI};
    return p;
}

// --------------------------------------------------------------------------
// Assembly
// --------------------------------------------------------------------------

namespace detail {

inline Parity parity_product(Parity a, Parity b)
{
    return a == b ? Parity::even : Parity::odd;
}

struct Quadrature
{
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/** Gauss–Legendre on [0, π] or the trapezoid rule on the circle. */
inline Quadrature make_quadrature(Interval interval, std::size_t modes)
{
    Quadrature q;
    if (interval == Interval::full)
    {
        const std::size_t n = 4 * modes + 32;
        q.nodes.resize(n);
        q.weights.setConstant(n, 2.0 * M_PI / static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k)
            q.nodes(k) = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        return q;
    }
    const int n = static_cast<int>(3 * modes + 32);
    std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);   // non-negative half
    std::vector<double> xs, ws;
    for (double z : zeros)
    {
        double dp = boost::math::legendre_p_prime(n, z);
        double w = 2.0 / ((1.0 - z * z) * dp * dp);
        xs.push_back(z);
        ws.push_back(w);
        if (z != 0.0)
        {
            xs.push_back(-z);
            ws.push_back(w);
        }
    }
    q.nodes.resize(xs.size());
    q.weights.resize(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k)
    {
        q.nodes(k) = 0.5 * M_PI * (xs[k] + 1.0);
        q.weights(k) = 0.5 * M_PI * ws[k];
    }
    return q;
}

/** Raw cosine/sine family and its derivative sampled at the nodes. */
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> trig_family(Parity parity, std::size_t modes, const Eigen::VectorXd& x)
{
    if (parity == Parity::none)
        return {Eigen::MatrixXd(x.size(), 0), Eigen::MatrixXd(x.size(), 0)};
    const std::size_t first = parity == Parity::even ? 0 : 1;
    const std::size_t n = modes - first;
    Eigen::MatrixXd v(x.size(), n), dv(x.size(), n);
    for (std::size_t j = 0; j < n; ++j)
    {
        const double k = static_cast<double>(first + j);
        for (Eigen::Index q = 0; q < x.size(); ++q)
        {
            if (parity == Parity::even)
            {
                v(q, j) = std::cos(k * x(q));
                dv(q, j) = -k * std::sin(k * x(q));
            }
            else
            {
                v(q, j) = std::sin(k * x(q));
                dv(q, j) = k * std::cos(k * x(q));
            }
        }
    }
    return {v, dv};
}

/**
 * Check that a function has the given parity about x = 0 (and hence about
 * π for the families used here).
 */
inline void require_parity(const TransverseFunction& f, Parity parity, Interval interval, const std::string& what)
{
    if (parity == Parity::none)
        return;
    double scale = 0.0;
    for (int k = 0; k <= 64; ++k)
        scale = std::max(scale, std::abs(f(M_PI * k / 64.0)));
    const double tol = 1e-9 * std::max(1.0, scale);
    if (interval == Interval::half)
    {
        // Only the endpoint values are visible on [0, π].
        if (parity == Parity::odd && (std::abs(f(0.0)) > tol || std::abs(f(M_PI)) > tol))
            throw BadParity(what + " (" + f.description + ") must vanish at 0 and π to be odd");
        return;
    }
    const double sign = parity == Parity::even ? 1.0 : -1.0;
    for (int k = 1; k < 64; ++k)
    {
        const double x = 2.0 * M_PI * k / 64.0;
        if (std::abs(f(2.0 * M_PI - x) - sign * f(x)) > tol)
            throw BadParity(what + " (" + f.description + ") is not " + to_string(parity) + " under x -> 2π - x");
    }
}

/** Parity a multiplication operator must have to map `from` into `to`. */
inline std::optional<Parity> coupling_parity(Parity from, Parity to)
{
    if (from == Parity::none || to == Parity::none)
        return std::nullopt;
    return parity_product(from, to);
}

inline void validate(const SpectralProfile& p)
{
    if (p.modes < 8)
        throw InvalidProfile("modes = " + std::to_string(p.modes) + " but at least 8 are required");
    if (!p.weight.eval || !p.field_x.eval || !p.field_y.eval)
        throw InvalidProfile("profile '" + p.name + "' is missing a weight or field component");
    if (!(p.rho > 0.0))
        throw InvalidProfile("localization radius must be positive");

    const auto& par = p.parity;
    if (par[deg0] != Parity::none && par[deg1x] != Parity::none && par[deg0] == par[deg1x])
        throw BadParity("d f = f' e^x flips parity, but degree 0 and the e^x component are both "
                        + std::string(to_string(par[deg0])));
    if (par[deg1y] != Parity::none && par[deg2] != Parity::none && par[deg1y] == par[deg2])
        throw BadParity("d(u e^y) flips parity, but the e^y component and degree 2 are both "
                        + std::string(to_string(par[deg2])));

    // Weight: non-negative with positive integral; even on the circle.
    const std::size_t probes = 257;
    double integral = 0.0;
    const double span = p.interval == Interval::half ? M_PI : 2.0 * M_PI;
    for (std::size_t k = 0; k < probes; ++k)
    {
        const double x = span * static_cast<double>(k) / static_cast<double>(probes - 1);
        const double w = p.weight(x);
        if (w < -1e-14)
            throw NegativeWeight(p.weight.description + " is " + std::to_string(w) + " at x = " + std::to_string(x));
        integral += w;
    }
    if (!(integral > 0.0))
        throw NegativeWeight(p.weight.description + " has zero integral");
    if (p.interval == Interval::full)
        require_parity(p.weight, Parity::even, p.interval, "weight");

    // Each field component must couple the components it connects.
    auto required = [&](Component a, Component b, Component c, Component e) {
        auto first = coupling_parity(par[a], par[b]);
        auto second = coupling_parity(par[c], par[e]);
        if (first && second && *first != *second)
            throw BadParity("parities of profile '" + p.name + "' force contradictory field parities");
        return first ? first : second;
    };
    if (auto px = required(deg0, deg1x, deg1y, deg2))
        require_parity(p.field_x, *px, p.interval, "field V_x");
    if (auto py = required(deg0, deg1y, deg1x, deg2))
        require_parity(p.field_y, *py, p.interval, "field V_y");
}

}   // namespace detail

/** Build d, its adjoint, H and ‖V‖² for a profile. */
inline BasicComplexMatrices assemble(const SpectralProfile& profile)
{
    detail::validate(profile);

    BasicComplexMatrices m;
    m.interval = profile.interval;
    detail::Quadrature quad = detail::make_quadrature(profile.interval, profile.modes);
    const Eigen::Index nq = quad.nodes.size();
    m.nodes = quad.nodes;
    m.measure.resize(nq);
    m.field_x.resize(nq);
    m.field_y.resize(nq);
    for (Eigen::Index q = 0; q < nq; ++q)
    {
        const double x = quad.nodes(q);
        m.measure(q) = quad.weights(q) * std::max(0.0, profile.weight(x));
        m.field_x(q) = profile.field_x(x);
        m.field_y(q) = profile.field_y(x);
    }

    std::size_t offset = 0;
    for (std::size_t c = 0; c < 4; ++c)
    {
        auto [raw, draw] = detail::trig_family(profile.parity[c], profile.modes, quad.nodes);
        m.block_offset[c] = offset;
        m.block_size[c] = static_cast<std::size_t>(raw.cols());
        offset += m.block_size[c];
        if (raw.cols() == 0)
        {
            m.values[c] = raw;
            m.derivatives[c] = draw;
            m.change_of_basis[c] = Eigen::MatrixXd(0, 0);
            continue;
        }
        Eigen::MatrixXd gram = raw.transpose() * m.measure.asDiagonal() * raw;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success)
            throw InvalidProfile("Gram matrix of the " + std::string(to_string(profile.parity[c]))
                                 + " family is not positive definite under " + profile.weight.description);
        // Φ = B L^{-T}
        Eigen::MatrixXd lower = llt.matrixL();
        Eigen::MatrixXd inv_lower = lower.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(lower.rows(), lower.cols()));
        m.change_of_basis[c] = inv_lower.transpose();
        m.values[c] = raw * m.change_of_basis[c];
        m.derivatives[c] = draw * m.change_of_basis[c];
    }

    const Eigen::Index n = static_cast<Eigen::Index>(offset);
    m.d = Eigen::MatrixXd::Zero(n, n);
    m.H = Eigen::MatrixXd::Zero(n, n);
    m.norm_v2 = Eigen::MatrixXd::Zero(n, n);

    auto block = [&](Eigen::MatrixXd& target, Component row, Component col) {
        return target.block(m.block_offset[row], m.block_offset[col], m.block_size[row], m.block_size[col]);
    };
    auto inner = [&](const Eigen::MatrixXd& left, const Eigen::VectorXd& mult, const Eigen::MatrixXd& right) {
        return Eigen::MatrixXd(left.transpose() * (m.measure.cwiseProduct(mult)).asDiagonal() * right);
    };
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nq);

    // d f = f' e^x: ⟨φ^x_i, (φ^0_j)'⟩_w.
    block(m.d, deg1x, deg0) = inner(m.values[deg1x], ones, m.derivatives[deg0]);
    // d(u e^y) = (1/w)(w u)' e^x∧e^y, weakly ⟨c, (1/w)(w u)'⟩_w = -⟨c', u⟩_w.
    // The boundary term c·w·u vanishes: c and u have opposite parity.
    block(m.d, deg2, deg1y) = -inner(m.derivatives[deg2], ones, m.values[deg1y]);
    m.delta = m.d.transpose();

    // H on f:            V♭∧f = (V_x f, V_y f)
    // H on (u_x, u_y):   i(V)u = V_x u_x + V_y u_y,   V♭∧u = V_x u_y - V_y u_x
    // H on c:            i(V)(c e^x∧e^y) = (-V_y c, V_x c)
    const Eigen::VectorXd& vx = m.field_x;
    const Eigen::VectorXd& vy = m.field_y;
    block(m.H, deg1x, deg0) = inner(m.values[deg1x], vx, m.values[deg0]);
    block(m.H, deg1y, deg0) = inner(m.values[deg1y], vy, m.values[deg0]);
    block(m.H, deg2, deg1y) = inner(m.values[deg2], vx, m.values[deg1y]);
    block(m.H, deg2, deg1x) = -inner(m.values[deg2], vy, m.values[deg1x]);
    Eigen::MatrixXd lower_h = m.H;
    m.H = lower_h + lower_h.transpose();

    const Eigen::VectorXd v2 = vx.cwiseProduct(vx) + vy.cwiseProduct(vy);
    for (std::size_t c = 0; c < 4; ++c)
        block(m.norm_v2, static_cast<Component>(c), static_cast<Component>(c)) = inner(m.values[c], v2, m.values[c]);
    return m;
}

// --------------------------------------------------------------------------
// Spectral quantities
// --------------------------------------------------------------------------

namespace detail {

inline Eigen::MatrixXd principal_block(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& idx)
{
    Eigen::MatrixXd out(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out(i, j) = a(idx[i], idx[j]);
    return out;
}

inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& a)
{
    if (a.rows() == 0)
        return Eigen::VectorXd(0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/** e^{-tA} for symmetric A. */
inline Eigen::MatrixXd heat_operator(const Eigen::MatrixXd& a, double t)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    Eigen::VectorXd decay = (-t * es.eigenvalues().array().max(0.0)).exp();
    return es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose();
}

inline double grading(int degree) { return degree % 2 == 0 ? 1.0 : -1.0; }

}   // namespace detail

/** Highest degree present in the complex (0, 1 or 2). */
inline int top_degree(const BasicComplexMatrices& m)
{
    int top = 0;
    for (std::size_t c = 0; c < 4; ++c)
        if (m.block_size[c] > 0)
            top = std::max(top, component_degree[c]);
    return top;
}

/**
 * Dimension of the numerical kernel of Δ^j = dδ + δd in each degree.
 *
 * Eigenvalues <= tol form the kernel; the first eigenvalue above the
 * kernel must be at least 100·tol.
 */
inline std::vector<std::size_t> betti_numeric(const BasicComplexMatrices& m, double tol = 1e-8)
{
    if (!(tol > 0.0))
        throw ParameterOutOfRange("kernel tolerance must be positive");
    const Eigen::MatrixXd lap = m.laplacian();
    std::vector<std::size_t> betti;
    for (int j = 0; j <= top_degree(m); ++j)
    {
        Eigen::VectorXd ev = detail::sym_eigenvalues(detail::principal_block(lap, m.degree_indices(j)));
        std::size_t kernel = 0;
        for (Eigen::Index k = 0; k < ev.size(); ++k)
        {
            if (ev(k) <= tol)
                ++kernel;
            else if (ev(k) < 100.0 * tol)
                throw SpectralGapTooSmall("degree " + std::to_string(j) + " eigenvalue " + std::to_string(ev(k))
                                          + " lies between tol and 100·tol");
        }
        betti.push_back(kernel);
    }
    return betti;
}

/** Σ_j (-1)^j tr e^{-tΔ^j}. */
inline double heat_supertrace(const BasicComplexMatrices& m, double t)
{
    if (!(t > 0.0))
        throw ParameterOutOfRange("heat time must be positive");
    const Eigen::MatrixXd lap = m.laplacian();
    double str = 0.0;
    for (int j = 0; j <= top_degree(m); ++j)
    {
        Eigen::VectorXd ev = detail::sym_eigenvalues(detail::principal_block(lap, m.degree_indices(j)));
        str += detail::grading(j) * (-t * ev.array().max(0.0)).exp().sum();
    }
    return str;
}

/** Supertrace of e^{-t D_s²} over the whole graded space. */
inline double witten_supertrace(const BasicComplexMatrices& m, double s, double t)
{
    if (!(t > 0.0))
        throw ParameterOutOfRange("heat time must be positive");
    const Eigen::MatrixXd ds = m.witten_dirac(s);
    const Eigen::MatrixXd heat = detail::heat_operator(ds * ds, t);
    const auto deg = m.degrees();
    double str = 0.0;
    for (std::size_t i = 0; i < deg.size(); ++i)
        str += detail::grading(deg[i]) * heat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    return str;
}

struct WittenPoint
{
    double s = 0.0;
    double supertrace = 0.0;
    long long index = 0;
    double margin = 0.0;        // distance of the supertrace from the nearest half-integer
};

struct WittenSweep
{
    std::vector<WittenPoint> points;
    bool constant = true;

    std::vector<long long> indices() const
    {
        std::vector<long long> out;
        for (const auto& p : points)
            out.push_back(p.index);
        return out;
    }
};

/**
 * Index of D_s for each s, read off the supertrace of e^{-t D_s²}.
 *
 * The s values are evaluated concurrently; results keep input order.
 * Throws NonIntegerSupertrace when a supertrace is within 0.25 of a
 * half-integer.
 */
inline WittenSweep witten_sweep(const BasicComplexMatrices& m, const std::vector<double>& s_values, double t,
                                double min_margin = 0.25)
{
    std::vector<std::future<double>> jobs;
    for (double s : s_values)
        jobs.push_back(std::async(std::launch::async, [&m, s, t] { return witten_supertrace(m, s, t); }));

    WittenSweep sweep;
    for (std::size_t k = 0; k < s_values.size(); ++k)
    {
        WittenPoint p;
        p.s = s_values[k];
        p.supertrace = jobs[k].get();
        p.index = std::llround(p.supertrace);
        p.margin = 0.5 - std::abs(p.supertrace - static_cast<double>(p.index));
        if (p.margin < min_margin)
            throw NonIntegerSupertrace("supertrace " + std::to_string(p.supertrace) + " at s = " + std::to_string(p.s)
                                       + " has rounding margin " + std::to_string(p.margin));
        sweep.points.push_back(p);
    }
    for (const auto& p : sweep.points)
        sweep.constant = sweep.constant && p.index == sweep.points.front().index;
    return sweep;
}

struct MorseInequality
{
    int degree = 0;
    double betti_side = 0.0;    // Σ_{j<=k} (-1)^{k-j} β_j
    double mu_side = 0.0;       // Σ_{j<=k} (-1)^{k-j} μ_j
    bool holds = false;
};

struct MorseReport
{
    std::vector<std::size_t> betti;
    std::vector<double> mu;
    std::vector<MorseInequality> inequalities;
    double euler_betti = 0.0;
    double euler_mu = 0.0;
    bool all_hold = false;
};

/**
 * Morse inequalities with μ_j = trace of the degree-j block of
 * e^{-t D_s²} (which is e^{-tΔ^j} at s = 0).
 */
inline MorseReport morse_check(const BasicComplexMatrices& m, double s, double t, double kernel_tol = 1e-8,
                               double equality_tol = 0.05)
{
    if (!(t > 0.0))
        throw ParameterOutOfRange("heat time must be positive");
    MorseReport r;
    r.betti = betti_numeric(m, kernel_tol);
    const Eigen::MatrixXd ds = m.witten_dirac(s);
    const Eigen::MatrixXd heat = detail::heat_operator(ds * ds, t);
    for (int j = 0; j <= top_degree(m); ++j)
    {
        double mu = 0.0;
        for (Eigen::Index i : m.degree_indices(j))
            mu += heat(i, i);
        r.mu.push_back(mu);
    }

    // Slack for round-off in the equality case (β_0 = μ_0 when Δ^0 = 0).
    const double slack = 1e-9 * static_cast<double>(m.dimension());
    r.all_hold = true;
    for (std::size_t k = 0; k < r.mu.size(); ++k)
    {
        MorseInequality q;
        q.degree = static_cast<int>(k);
        for (std::size_t j = 0; j <= k; ++j)
        {
            const double sign = (k - j) % 2 == 0 ? 1.0 : -1.0;
            q.betti_side += sign * static_cast<double>(r.betti[j]);
            q.mu_side += sign * r.mu[j];
        }
        q.holds = q.betti_side <= q.mu_side + slack;
        r.all_hold = r.all_hold && q.holds;
        r.inequalities.push_back(q);
    }
    for (std::size_t j = 0; j < r.mu.size(); ++j)
    {
        r.euler_betti += detail::grading(static_cast<int>(j)) * static_cast<double>(r.betti[j]);
        r.euler_mu += detail::grading(static_cast<int>(j)) * r.mu[j];
    }
    r.all_hold = r.all_hold && std::abs(r.euler_mu - r.euler_betti) <= equality_tol;
    return r;
}

struct LocalizationPoint
{
    double s = 0.0;
    double outside_ratio = 0.0;     // heat-diagonal mass outside the 2ρ-neighbourhoods / total
};

struct LocalizationReport
{
    double min_norm_v2_outside = 0.0;   // C² on the complement of the ρ-neighbourhoods
    std::vector<LocalizationPoint> points;
    bool decreasing = true;
};

namespace detail {

inline double transverse_distance(double x, double c, Interval interval)
{
    double dist = std::abs(x - c);
    if (interval == Interval::full)
        dist = std::min(dist, 2.0 * M_PI - dist);
    return dist;
}

inline double distance_to_set(double x, const std::vector<double>& centers, Interval interval)
{
    double best = std::numeric_limits<double>::infinity();
    for (double c : centers)
        best = std::min(best, transverse_distance(x, c, interval));
    return best;
}

}   // namespace detail

/**
 * Fraction of ∫ tr K_s(t, x, x) w dx carried outside the 2ρ-neighbourhoods
 * of the critical points, for each s, where K_s is the kernel of e^{-tD_s²}.
 *
 * Throws InvalidProfile when ‖V‖² vanishes somewhere outside the
 * ρ-neighbourhoods (the critical set was not fully listed).
 */
inline LocalizationReport localization_profile(const BasicComplexMatrices& m, const std::vector<double>& s_values,
                                               double t, const std::vector<double>& critical_points, double rho)
{
    if (!(t > 0.0) || !(rho > 0.0))
        throw ParameterOutOfRange("heat time and radius must be positive");
    LocalizationReport report;
    report.min_norm_v2_outside = std::numeric_limits<double>::infinity();
    std::vector<bool> outside(m.nodes.size());
    double peak = 0.0;
    for (Eigen::Index q = 0; q < m.nodes.size(); ++q)
    {
        peak = std::max(peak, m.field_x(q) * m.field_x(q) + m.field_y(q) * m.field_y(q));
        const double dist = detail::distance_to_set(m.nodes(q), critical_points, m.interval);
        outside[q] = dist > 2.0 * rho;
        if (dist > rho)
        {
            const double v2 = m.field_x(q) * m.field_x(q) + m.field_y(q) * m.field_y(q);
            report.min_norm_v2_outside = std::min(report.min_norm_v2_outside, v2);
        }
    }
    // Zero up to rounding counts as a zero of V.
    if (!(report.min_norm_v2_outside > 1e-12 * peak))
        throw InvalidProfile("‖V‖² vanishes outside the ρ-neighbourhoods of the listed critical points");

    for (double s : s_values)
    {
        const Eigen::MatrixXd ds = m.witten_dirac(s);
        const Eigen::MatrixXd heat = detail::heat_operator(ds * ds, t);
        double total = 0.0, away = 0.0;
        for (std::size_t c = 0; c < 4; ++c)
        {
            if (m.block_size[c] == 0)
                continue;
            const Eigen::Index off = static_cast<Eigen::Index>(m.block_offset[c]);
            const Eigen::Index n = static_cast<Eigen::Index>(m.block_size[c]);
            const Eigen::MatrixXd& phi = m.values[c];
            // diag(Φ E Φᵀ) at every node
            Eigen::VectorXd density = (phi * heat.block(off, off, n, n)).cwiseProduct(phi).rowwise().sum();
            for (Eigen::Index q = 0; q < m.nodes.size(); ++q)
            {
                const double mass = m.measure(q) * density(q);
                total += mass;
                if (outside[q])
                    away += mass;
            }
        }
        report.points.push_back({s, total > 0.0 ? away / total : 0.0});
    }
    for (std::size_t k = 1; k < report.points.size(); ++k)
        report.decreasing = report.decreasing && report.points[k].outside_ratio <= report.points[k - 1].outside_ratio;
    return report;
}

/**
 * True when HD + DH has no blocks between even and odd degrees.
 */
inline bool parity_of_anticommutator(const BasicComplexMatrices& m, double tol = 1e-10)
{
    const Eigen::MatrixXd dirac = m.dirac();
    const Eigen::MatrixXd anti = m.H * dirac + dirac * m.H;
    const auto deg = m.degrees();
    const double scale = std::max(1.0, anti.norm());
    double worst = 0.0;
    for (std::size_t i = 0; i < deg.size(); ++i)
        for (std::size_t j = 0; j < deg.size(); ++j)
            if ((deg[i] + deg[j]) % 2 == 1)
                worst = std::max(worst, std::abs(anti(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    return worst <= tol * scale;
}

}   // namespace foliage
