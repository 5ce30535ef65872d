/**
 * Basic Čech cochain complex of a finite basic open cover.
 *
 * A cover is presented combinatorially by its nerve: the non-empty
 * intersections U_T (T an increasing index tuple) together with the number
 * of connected components of the leaf space of each U_T. A basic Čech
 * p-cochain assigns a constant to every component of every (p+1)-fold
 * intersection, and the coboundary is the alternating restriction sum
 *
 *     (δω)_{α0..α(k+1)} = Σ_i (-1)^i ω_{α0..^αi..α(k+1)}.
 *
 * When a facet U_{T\i} has several components, the restriction of a
 * locally constant function from U_{T\i} to a component c of U_T reads the
 * value on the facet component containing c; that incidence is the
 * face map and is part of the input.
 *
 * All ranks are computed exactly over Q.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/exact.hpp"

namespace foliage {

using IndexTuple = std::vector<std::size_t>;

/** One non-empty intersection U_T of the cover. */
struct Intersection
{
    IndexTuple indices;             // strictly increasing positions into CoverNerve::sets
    std::size_t components = 1;     // components of the leaf space of U_T

    // face_map[i][c] = component of the facet T \ indices[i] that contains
    // component c of U_T. May be omitted for facets with one component.
    std::map<std::size_t, std::vector<std::size_t>> face_map;
};

struct CoverNerve
{
    std::string name;
    std::vector<std::string> sets;
    std::vector<Intersection> intersections;
};

/** Basis element of C^p: one component of one (p+1)-fold intersection. */
struct CochainCell
{
    IndexTuple tuple;
    std::size_t component = 0;

    bool operator==(const CochainCell&) const = default;
};

struct CechComplex
{
    // cells[p] is an ordered basis of C^p.
    std::vector<std::vector<CochainCell>> cells;

    // deltas[p] : C^p -> C^{p+1}; the last one maps into the zero space.
    std::vector<RationalMatrix> deltas;

    std::vector<std::size_t> dims() const
    {
        std::vector<std::size_t> d;
        for (const auto& c : cells)
            d.push_back(c.size());
        return d;
    }

    std::size_t top_degree() const { return cells.empty() ? 0 : cells.size() - 1; }
};

struct CohomologySummary
{
    std::vector<std::size_t> dims;
    std::vector<std::size_t> ranks;     // rank of δ^p
    std::vector<std::size_t> betti;
    long long euler = 0;                // Σ(-1)^p betti[p]
    long long euler_from_dims = 0;      // Σ(-1)^p dims[p]

    // The nerve computes H_B only for a basic good cover of a Riemannian
    // foliation with closed leaves; nothing here checks that.
    bool good_cover_hypothesis_verified = false;
};

/**
 * Sort a tuple of set indices, returning the permutation sign.
 *
 * Under the extended-index convention a cochain value on an unsorted tuple
 * is sign * (value on the sorted tuple); a repeated index gives sign 0.
 */
inline std::pair<IndexTuple, int> canonical_order(IndexTuple tuple)
{
    int sign = 1;
    // insertion sort, counting transpositions
    for (std::size_t i = 1; i < tuple.size(); ++i)
        for (std::size_t j = i; j > 0 && tuple[j - 1] > tuple[j]; --j)
        {
            std::swap(tuple[j - 1], tuple[j]);
            sign = -sign;
        }
    for (std::size_t i = 1; i < tuple.size(); ++i)
        if (tuple[i] == tuple[i - 1])
            return {tuple, 0};
    return {tuple, sign};
}

namespace detail {

inline std::string tuple_string(const IndexTuple& t)
{
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i)
        s += (i ? "," : "") + std::to_string(t[i]);
    return s + ")";
}

inline IndexTuple drop(const IndexTuple& t, std::size_t pos)
{
    IndexTuple f;
    f.reserve(t.size() - 1);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (i != pos)
            f.push_back(t[i]);
    return f;
}

/** Validated nerve: every tuple with its component count and full face maps. */
struct NormalizedNerve
{
    std::vector<IndexTuple> order;                          // appearance order
    std::map<IndexTuple, std::size_t> components;
    std::map<IndexTuple, std::vector<std::vector<std::size_t>>> faces;   // faces[T][i][c]
};

inline NormalizedNerve normalize(const CoverNerve& cover)
{
    NormalizedNerve out;
    const std::size_t nsets = cover.sets.size();
    if (nsets == 0)
        throw InvalidCover("cover '" + cover.name + "' has no sets");
    {
        std::set<std::string> labels(cover.sets.begin(), cover.sets.end());
        if (labels.size() != nsets)
            throw InvalidCover("duplicate set labels in cover '" + cover.name + "'");
    }

    std::map<IndexTuple, const Intersection*> given;
    for (const auto& x : cover.intersections)
    {
        const auto& t = x.indices;
        if (t.empty())
            throw InvalidCover("empty index tuple");
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            if (t[i] >= nsets)
                throw InvalidCover("index " + std::to_string(t[i]) + " in " + tuple_string(t) + " is not a set");
            if (i > 0 && t[i] <= t[i - 1])
                throw InvalidCover("tuple " + tuple_string(t) + " is not strictly increasing");
        }
        if (x.components == 0)
            throw InvalidCover("tuple " + tuple_string(t) + " lists zero components; omit empty intersections");
        if (!given.emplace(t, &x).second)
            throw InvalidCover("tuple " + tuple_string(t) + " listed twice");
    }

    // Singletons first, in set order; omitted singletons have one component.
    for (std::size_t a = 0; a < nsets; ++a)
    {
        IndexTuple t{a};
        auto it = given.find(t);
        out.order.push_back(t);
        out.components[t] = it == given.end() ? 1 : it->second->components;
        if (it != given.end() && !it->second->face_map.empty())
            throw BadComponentMap("singleton " + tuple_string(t) + " has no facets");
    }
    for (const auto& x : cover.intersections)
        if (x.indices.size() > 1)
        {
            out.order.push_back(x.indices);
            out.components[x.indices] = x.components;
        }

    for (const auto& x : cover.intersections)
    {
        const auto& t = x.indices;
        if (t.size() < 2)
            continue;
        std::vector<std::vector<std::size_t>> maps(t.size());
        for (const auto& [pos, m] : x.face_map)
            if (pos >= t.size())
                throw BadComponentMap("face position " + std::to_string(pos) + " out of range for " + tuple_string(t));
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            IndexTuple f = drop(t, i);
            auto fc = out.components.find(f);
            if (fc == out.components.end())
                throw MissingFace("facet " + tuple_string(f) + " of " + tuple_string(t) + " is not in the nerve");
            auto fm = x.face_map.find(i);
            if (fm == x.face_map.end())
            {
                if (fc->second != 1)
                    throw BadComponentMap("facet " + tuple_string(f) + " of " + tuple_string(t)
                                          + " has " + std::to_string(fc->second) + " components but no face map was given");
                maps[i].assign(x.components, 0);
                continue;
            }
            if (fm->second.size() != x.components)
                throw BadComponentMap("face map " + std::to_string(i) + " of " + tuple_string(t) + " has "
                                      + std::to_string(fm->second.size()) + " entries, expected " + std::to_string(x.components));
            for (std::size_t c : fm->second)
                if (c >= fc->second)
                    throw BadComponentMap("face map " + std::to_string(i) + " of " + tuple_string(t)
                                          + " names component " + std::to_string(c) + " of " + tuple_string(f)
                                          + ", which has " + std::to_string(fc->second));
            maps[i] = fm->second;
        }
        out.faces[t] = std::move(maps);
    }

    // Dropping positions i < j in either order must land in the same
    // component of the codimension-2 face; otherwise δ² ≠ 0.
    for (const auto& [t, maps] : out.faces)
    {
        if (t.size() < 3)
            continue;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i + 1; j < t.size(); ++j)
            {
                const auto& via_j = out.faces.at(drop(t, j));   // then drop position i
                const auto& via_i = out.faces.at(drop(t, i));   // then drop position j-1
                for (std::size_t c = 0; c < out.components.at(t); ++c)
                    if (via_j[i][maps[j][c]] != via_i[j - 1][maps[i][c]])
                        throw BadComponentMap("face maps of " + tuple_string(t) + " do not commute at positions "
                                              + std::to_string(i) + ", " + std::to_string(j));
            }
    }
    return out;
}

}   // namespace detail

/**
 * Assemble the basic Čech complex of a cover.
 *
 * Cells of each degree are ordered by first appearance in the input
 * (singletons in set order), so the matrices follow the author's listing.
 */
inline CechComplex build_complex(const CoverNerve& cover)
{
    detail::NormalizedNerve nerve = detail::normalize(cover);

    CechComplex complex;
    std::map<std::pair<IndexTuple, std::size_t>, std::size_t> column_of;
    for (const auto& t : nerve.order)
    {
        const std::size_t p = t.size() - 1;
        if (complex.cells.size() <= p)
            complex.cells.resize(p + 1);
        for (std::size_t c = 0; c < nerve.components.at(t); ++c)
        {
            column_of[{t, c}] = complex.cells[p].size();
            complex.cells[p].push_back({t, c});
        }
    }
    // A degree with no cells cannot sit below a non-empty one (nerve closure).
    for (std::size_t p = 0; p < complex.cells.size(); ++p)
        if (complex.cells[p].empty())
            throw MissingFace("no intersections of length " + std::to_string(p + 1));

    const std::size_t top = complex.cells.size();
    for (std::size_t p = 0; p < top; ++p)
    {
        const std::size_t nrows = p + 1 < top ? complex.cells[p + 1].size() : 0;
        RationalMatrix delta(nrows, complex.cells[p].size());
        for (std::size_t r = 0; r < nrows; ++r)
        {
            const auto& cell = complex.cells[p + 1][r];
            const auto& maps = nerve.faces.at(cell.tuple);
            for (std::size_t i = 0; i < cell.tuple.size(); ++i)
            {
                IndexTuple facet = detail::drop(cell.tuple, i);
                std::size_t col = column_of.at({facet, maps[i][cell.component]});
                delta.add(r, col, Rational(i % 2 == 0 ? 1 : -1));
            }
        }
        complex.deltas.push_back(std::move(delta));
    }
    return complex;
}

/** Betti numbers of the Čech complex, by exact rank. */
inline CohomologySummary betti(const CechComplex& complex)
{
    CohomologySummary out;
    out.dims = complex.dims();
    for (const auto& d : complex.deltas)
        out.ranks.push_back(exact_rank(d));
    for (std::size_t p = 0; p < out.dims.size(); ++p)
    {
        std::size_t kernel = out.dims[p] - out.ranks[p];
        std::size_t image = p > 0 ? out.ranks[p - 1] : 0;
        out.betti.push_back(kernel - image);
        long long sign = p % 2 == 0 ? 1 : -1;
        out.euler += sign * static_cast<long long>(out.betti.back());
        out.euler_from_dims += sign * static_cast<long long>(out.dims[p]);
    }
    return out;
}

/** dim C^{degree+1} - rank δ^degree. */
inline std::size_t cokernel_dim(const CechComplex& complex, std::size_t degree)
{
    if (degree >= complex.deltas.size())
        throw DegreeOutOfRange("degree " + std::to_string(degree) + " but the complex has degrees 0.."
                               + std::to_string(complex.deltas.empty() ? 0 : complex.deltas.size() - 1));
    const auto& d = complex.deltas[degree];
    return d.rows() - exact_rank(d);
}

/**
 * Relabel the sets of a cover by a permutation: set a becomes set perm[a].
 * Tuples are re-sorted and face maps re-keyed to the new positions.
 */
inline CoverNerve relabel(const CoverNerve& cover, const std::vector<std::size_t>& perm)
{
    const std::size_t n = cover.sets.size();
    if (perm.size() != n)
        throw DimensionMismatch("permutation length does not match the number of sets");
    std::vector<std::size_t> check(perm);
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < n; ++i)
        if (check[i] != i)
            throw InvalidCover("relabeling is not a permutation");

    CoverNerve out;
    out.name = cover.name;
    out.sets.resize(n);
    for (std::size_t a = 0; a < n; ++a)
        out.sets[perm[a]] = cover.sets[a];
    for (const auto& x : cover.intersections)
    {
        std::vector<std::pair<std::size_t, std::size_t>> mapped;   // (new label, old position)
        for (std::size_t i = 0; i < x.indices.size(); ++i)
            mapped.emplace_back(perm[x.indices[i]], i);
        std::sort(mapped.begin(), mapped.end());
        Intersection y;
        y.components = x.components;
        for (std::size_t k = 0; k < mapped.size(); ++k)
        {
            y.indices.push_back(mapped[k].first);
            auto it = x.face_map.find(mapped[k].second);
            if (it != x.face_map.end())
                y.face_map[k] = it->second;
        }
        out.intersections.push_back(std::move(y));
    }
    return out;
}

/**
 * Average a coefficient vector over a finite group of linear actions,
 * (1/|Γ|) Σ_g g·x. The list is taken to be the whole group; closure is
 * not checked.
 */
template <typename Scalar>
std::vector<Scalar> group_average(const std::vector<Scalar>& coeffs,
                                  const std::vector<std::vector<std::vector<Scalar>>>& group_action)
{
    const std::size_t n = coeffs.size();
    if (group_action.empty())
        throw DimensionMismatch("group action list is empty");
    std::vector<Scalar> sum(n, Scalar(0));
    for (const auto& g : group_action)
    {
        if (g.size() != n)
            throw DimensionMismatch("group element has " + std::to_string(g.size()) + " rows, expected " + std::to_string(n));
        for (std::size_t i = 0; i < n; ++i)
        {
            if (g[i].size() != n)
                throw DimensionMismatch("group element is not square");
            for (std::size_t j = 0; j < n; ++j)
                sum[i] += g[i][j] * coeffs[j];
        }
    }
    const Scalar count(static_cast<long long>(group_action.size()));
    for (auto& v : sum)
        v /= count;
    return sum;
}

}   // namespace foliage
