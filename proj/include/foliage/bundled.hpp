/**
 * The example inputs shipped in data/ and the report values each must
 * produce. `foliage all` and the test suite both check these.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foliage/io.hpp"

namespace foliage {

/** A JSON pointer into a report and the value expected there. */
struct Expectation
{
    std::string pointer;
    io::json value;
};

struct BundledExample
{
    std::string label;
    std::string file;
    std::string command;
    std::optional<std::size_t> cokernel;
    std::vector<Expectation> expect;
};

/** Critical-record file and spectral profile describing the same foliation. */
struct CrossCheck
{
    std::string label;
    std::string records_file;
    std::string profile_file;
};

inline std::vector<BundledExample> bundled_examples()
{
    using io::json;
    return {
        {"example1", "example1.json", "hopf", std::nullopt,
         {{"/records/0/index", 1}, {"/records/1/index", 1}, {"/records/2/index", -1},
          {"/hopf_sum", 2}, {"/chi_direct", 2}, {"/verdict", "match"}}},
        {"example2", "example2.json", "hopf", std::nullopt,
         {{"/records/0/index", 1}, {"/records/1/index", -1}, {"/records/0/minus_one_dim", 0},
          {"/records/1/minus_one_dim", 1}, {"/hopf_sum", 2}, {"/verdict", "match"}}},
        {"example3_betti", "example3_betti.json", "hopf", std::nullopt,
         {{"/lower_bound/euler", 2}, {"/lower_bound/at_least_two", true}}},
        {"mv_counterexample", "mv_counterexample.json", "cech", 0,
         {{"/dims", json::array({3, 3})}, {"/ranks", json::array({2, 0})}, {"/cokernel/dim", 1}}},
        {"torus_irrational", "torus_irrational.json", "cech", std::nullopt,
         {{"/betti", json::array({1})}, {"/good_cover_hypothesis_verified", false}}},
        {"example1_profile", "example1_profile.json", "witten", std::nullopt,
         {{"/betti", json::array({1, 0, 1})}, {"/indices", json::array({2, 2, 2, 2})}, {"/s_independent", true}}},
        {"example2_profile", "example2_profile.json", "witten", std::nullopt,
         {{"/betti", json::array({1, 0, 1})}, {"/indices", json::array({2, 2, 2, 2})}, {"/s_independent", true}}},
    };
}

inline std::vector<CrossCheck> bundled_cross_checks()
{
    return {
        {"example1", "example1.json", "example1_profile.json"},
        {"example2", "example2.json", "example2_profile.json"},
    };
}

}   // namespace foliage
