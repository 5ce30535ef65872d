/**
 * Linear part of a basic vector field at a critical leaf closure.
 *
 * The linearization V_L acts on the normal space N_xL. Its index is the
 * sign of det V_L; its polar decomposition V_L = P Θ (P symmetric positive
 * definite, Θ orthogonal) gives the rank of the orientation line bundle as
 * the multiplicity of the eigenvalue -1 of Θ. The deformation path takes
 * V_L to an orthogonal matrix similar to diag(±1) without ever changing
 * the sign of the determinant.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "foliage/errors.hpp"

namespace foliage {

struct LinearTolerances
{
    double degeneracy = 1e-10;      // |det| <= degeneracy * sigma_max^q is degenerate
    double minus_one = 1e-8;        // |lambda + 1| below this counts as eigenvalue -1
    double orthogonality = 1e-9;    // ||g^T g - I||_F
    double commutation = 1e-9;      // ||gA - Ag||_F relative to ||A||_F
};

struct Linearization
{
    Eigen::MatrixXd matrix;
    std::string label;

    std::size_t codim() const { return static_cast<std::size_t>(matrix.rows()); }
};

struct PolarParts
{
    Eigen::MatrixXd P;
    Eigen::MatrixXd Theta;
    std::size_t minus_one_dim = 0;
};

struct HolonomyGenerators
{
    std::vector<Eigen::MatrixXd> generators;
};

struct CommutationReport
{
    bool commutes = true;               // all three checks below
    bool with_linearization = true;
    bool with_P = true;
    bool with_Theta = true;
    double max_residual = 0.0;          // largest relative commutator norm seen
};

namespace detail {

inline void require_square(const Linearization& lin)
{
    if (lin.matrix.rows() == 0 || lin.matrix.rows() != lin.matrix.cols())
        throw DimensionMismatch("linearization '" + lin.label + "' must be a non-empty square matrix, got "
                                + std::to_string(lin.matrix.rows()) + "x" + std::to_string(lin.matrix.cols()));
}

inline double sigma_max(const Eigen::MatrixXd& a)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

/** det of a, throwing when it is below the relative degeneracy threshold. */
inline double checked_determinant(const Eigen::MatrixXd& a, const std::string& label, double tol)
{
    const double scale = sigma_max(a);
    const double det = a.determinant();
    const double floor = tol * std::pow(scale, static_cast<double>(a.rows()));
    if (!(scale > 0.0) || !(std::abs(det) > floor))
        throw DegenerateLinearization("'" + label + "': |det| = " + std::to_string(std::abs(det))
                                      + " is not above " + std::to_string(floor));
    return det;
}

inline std::size_t count_minus_one(const Eigen::MatrixXd& theta, double tol)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(theta, false);
    std::size_t m = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) + std::complex<double>(1.0, 0.0)) < tol)
            ++m;
    return m;
}

}   // namespace detail

/** Index of the field at the leaf closure: +1 or -1. */
inline int index_of(const Linearization& lin, const LinearTolerances& tol = {})
{
    detail::require_square(lin);
    return detail::checked_determinant(lin.matrix, lin.label, tol.degeneracy) > 0.0 ? 1 : -1;
}

/**
 * Left polar decomposition V = P Θ with P = sqrt(V Vᵀ), from the SVD
 * V = U Σ Wᵀ: P = U Σ Uᵀ and Θ = U Wᵀ.
 */
inline PolarParts polar_decompose(const Linearization& lin, const LinearTolerances& tol = {})
{
    detail::require_square(lin);
    detail::checked_determinant(lin.matrix, lin.label, tol.degeneracy);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(lin.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd& u = svd.matrixU();
    PolarParts parts;
    parts.P = u * svd.singularValues().asDiagonal() * u.transpose();
    parts.P = (0.5 * (parts.P + parts.P.transpose())).eval();
    parts.Theta = u * svd.matrixV().transpose();
    parts.minus_one_dim = detail::count_minus_one(parts.Theta, tol.minus_one);
    return parts;
}

/**
 * Check that every holonomy generator commutes with V_L and with both
 * polar factors. Generators must be orthogonal.
 */
inline CommutationReport holonomy_commutes(const Linearization& lin, const HolonomyGenerators& gens,
                                           const LinearTolerances& tol = {})
{
    detail::require_square(lin);
    const Eigen::Index q = lin.matrix.rows();
    for (const auto& g : gens.generators)
    {
        if (g.rows() != q || g.cols() != q)
            throw DimensionMismatch("holonomy generator is " + std::to_string(g.rows()) + "x" + std::to_string(g.cols())
                                    + " but '" + lin.label + "' has codimension " + std::to_string(q));
        double drift = (g.transpose() * g - Eigen::MatrixXd::Identity(q, q)).norm();
        if (drift > tol.orthogonality)
            throw NonOrthogonalHolonomy("generator for '" + lin.label + "' has ||g^T g - I|| = " + std::to_string(drift));
    }

    const PolarParts polar = polar_decompose(lin, tol);
    CommutationReport report;
    auto residual = [](const Eigen::MatrixXd& g, const Eigen::MatrixXd& a) {
        return (g * a - a * g).norm() / std::max(1.0, a.norm());
    };
    for (const auto& g : gens.generators)
    {
        double rv = residual(g, lin.matrix), rp = residual(g, polar.P), rt = residual(g, polar.Theta);
        report.max_residual = std::max({report.max_residual, rv, rp, rt});
        report.with_linearization = report.with_linearization && rv <= tol.commutation;
        report.with_P = report.with_P && rp <= tol.commutation;
        report.with_Theta = report.with_Theta && rt <= tol.commutation;
    }
    report.commutes = report.with_linearization && report.with_P && report.with_Theta;
    return report;
}

/**
 * Constant-index path from V_L (t = 0) to a standard orthogonal form (t = 1).
 *
 * On [0, 1/2] the eigenvalues λ of P move geometrically, λ^(1-2t), so
 * P_t Θ reaches Θ at t = 1/2 while P_t stays positive definite. On
 * [1/2, 1] every rotation block of Θ (real Schur form) with angle θ ∉ {0, π}
 * is turned by (1-τ)θ, τ = 2t-1, leaving the ±1 eigenvalues fixed.
 */
inline Eigen::MatrixXd deformation_path(const Linearization& lin, double t, const LinearTolerances& tol = {})
{
    if (!(t >= 0.0 && t <= 1.0))
        throw ParameterOutOfRange("deformation parameter t = " + std::to_string(t) + " outside [0, 1]");
    const PolarParts polar = polar_decompose(lin, tol);
    if (t == 0.0)
        return lin.matrix;

    const Eigen::Index q = lin.matrix.rows();
    if (t <= 0.5)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(polar.P);
        Eigen::VectorXd lambda_t = es.eigenvalues().array().pow(1.0 - 2.0 * t);
        Eigen::MatrixXd p_t = es.eigenvectors() * lambda_t.asDiagonal() * es.eigenvectors().transpose();
        return p_t * polar.Theta;
    }

    const double tau = 2.0 * t - 1.0;
    Eigen::RealSchur<Eigen::MatrixXd> schur(polar.Theta);
    const Eigen::MatrixXd& qm = schur.matrixU();
    const Eigen::MatrixXd& tm = schur.matrixT();
    Eigen::MatrixXd unwound = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index i = 0; i < q;)
    {
        const bool block = i + 1 < q && tm(i + 1, i) != 0.0;
        if (!block)
        {
            unwound(i, i) = tm(i, i) < 0.0 ? -1.0 : 1.0;
            ++i;
            continue;
        }
        const double c = 0.5 * (tm(i, i) + tm(i + 1, i + 1));
        const double s = 0.5 * (tm(i + 1, i) - tm(i, i + 1));
        double theta = std::atan2(s, c);
        if (std::abs(std::abs(theta) - M_PI) < tol.minus_one)
            theta = M_PI;                       // a -I block stays put
        else
            theta *= 1.0 - tau;
        unwound(i, i) = std::cos(theta);
        unwound(i, i + 1) = -std::sin(theta);
        unwound(i + 1, i) = std::sin(theta);
        unwound(i + 1, i + 1) = std::cos(theta);
        i += 2;
    }
    return qm * unwound * qm.transpose();
}

/**
 * True when det(path(t)) keeps the sign of det V_L, and stays above the
 * degeneracy floor, at `samples` equally spaced t in [0, 1].
 */
inline bool path_index_constancy(const Linearization& lin, std::size_t samples, const LinearTolerances& tol = {})
{
    if (samples < 2)
        throw ParameterOutOfRange("path_index_constancy needs at least 2 samples");
    const int index = index_of(lin, tol);
    for (std::size_t k = 0; k < samples; ++k)
    {
        const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
        Eigen::MatrixXd y = deformation_path(lin, t, tol);
        const double det = y.determinant();
        const double floor = tol.degeneracy * std::pow(detail::sigma_max(y), static_cast<double>(y.rows()));
        if (!(std::abs(det) > floor) || (det > 0.0 ? 1 : -1) != index)
            return false;
    }
    return true;
}

}   // namespace foliage
