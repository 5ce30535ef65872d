/**
 * Hopf sum over critical leaf closures and its comparison with an
 * independently computed basic Euler characteristic.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "foliage/errors.hpp"

namespace foliage {

struct CriticalRecord
{
    std::string label;
    int index = 1;                  // ind_L(V), +1 or -1
    long long chi_b_twisted = 0;    // χ_B(L, F, O_L)
};

enum class Verdict { match, mismatch, unverified };

inline const char* to_string(Verdict v)
{
    switch (v)
    {
        case Verdict::match: return "match";
        case Verdict::mismatch: return "mismatch";
        default: return "unverified";
    }
}

struct Contribution
{
    std::string label;
    int index = 1;
    long long chi_b_twisted = 0;
    long long term = 0;
};

struct HopfReport
{
    std::vector<Contribution> contributions;
    long long hopf_sum = 0;
    std::optional<long long> chi_direct;
    Verdict verdict = Verdict::unverified;
};

namespace detail {

inline void require_unit_index(const CriticalRecord& r)
{
    if (r.index != 1 && r.index != -1)
        throw BadIndexValue("record '" + r.label + "' has index " + std::to_string(r.index));
}

}   // namespace detail

/** Σ ind_L(V) χ_B(L, F, O_L); zero for no critical leaf closures. */
inline long long hopf_sum(const std::vector<CriticalRecord>& records)
{
    long long sum = 0;
    for (const auto& r : records)
    {
        detail::require_unit_index(r);
        sum += r.index * r.chi_b_twisted;
    }
    return sum;
}

inline HopfReport verify(const std::vector<CriticalRecord>& records, std::optional<long long> chi_direct)
{
    HopfReport report;
    for (const auto& r : records)
    {
        detail::require_unit_index(r);
        report.contributions.push_back({r.label, r.index, r.chi_b_twisted, r.index * r.chi_b_twisted});
    }
    report.hopf_sum = hopf_sum(records);
    report.chi_direct = chi_direct;
    if (chi_direct)
        report.verdict = *chi_direct == report.hopf_sum ? Verdict::match : Verdict::mismatch;
    return report;
}

/**
 * When every twisted Euler characteristic is 1 the Hopf sum reduces to a
 * plain count of indices; returns that count, or nothing otherwise.
 */
inline std::optional<long long> simple_form_check(const std::vector<CriticalRecord>& records)
{
    long long count = 0;
    for (const auto& r : records)
    {
        detail::require_unit_index(r);
        if (r.chi_b_twisted != 1)
            return std::nullopt;
        count += r.index;
    }
    return count;
}

struct LowerBound
{
    long long euler = 0;
    bool at_least_two = false;
};

/**
 * Euler characteristic of a basic cohomology with vanishing odd degrees.
 *
 * The list must run to an even top degree with β_top = β_0 (the taut
 * Poincaré duality input); with β_0 >= 1 the result is then >= 2.
 */
inline LowerBound lower_bound_check(const std::vector<long long>& betti)
{
    if (betti.empty() || betti.size() % 2 == 0)
        throw MalformedBetti("expected Betti numbers for degrees 0..2k, got " + std::to_string(betti.size()) + " entries");
    for (std::size_t j = 0; j < betti.size(); ++j)
    {
        if (betti[j] < 0)
            throw MalformedBetti("negative Betti number in degree " + std::to_string(j));
        if (j % 2 == 1 && betti[j] != 0)
            throw OddDegreeNonzero("degree " + std::to_string(j) + " has Betti number " + std::to_string(betti[j]));
    }
    if (betti.front() != betti.back())
        throw MalformedBetti("top Betti number " + std::to_string(betti.back()) + " differs from b0 = "
                             + std::to_string(betti.front()));
    LowerBound out;
    for (std::size_t j = 0; j < betti.size(); ++j)
        out.euler += (j % 2 == 0 ? 1 : -1) * betti[j];
    out.at_least_two = out.euler >= 2;
    return out;
}

}   // namespace foliage
