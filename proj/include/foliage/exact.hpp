/**
 * Exact rational linear algebra: a row-sparse rational matrix and
 * fraction-free (Bareiss) rank computation.
 */
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "foliage/errors.hpp"

namespace foliage {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/**
 * Parse "3", "-2/7", "0.125" or "1e-3" into an exact rational.
 *
 * Decimal strings are read exactly (0.1 becomes 1/10), not through a double.
 */
inline Rational parse_rational(const std::string& text)
{
    auto fail = [&]() -> Rational { throw ParseError("not a rational number: '" + text + "'"); };
    if (text.empty())
        return fail();

    auto slash = text.find('/');
    if (slash != std::string::npos)
    {
        Rational num = parse_rational(text.substr(0, slash));
        Rational den = parse_rational(text.substr(slash + 1));
        if (den == 0)
            throw ParseError("zero denominator in '" + text + "'");
        return num / den;
    }

    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-')
        negative = (text[pos++] == '-');

    Integer mantissa = 0;
    long long frac_digits = 0;
    bool seen_digit = false, seen_point = false;
    for (; pos < text.size(); ++pos)
    {
        char c = text[pos];
        if (c >= '0' && c <= '9')
        {
            mantissa = mantissa * 10 + (c - '0');
            seen_digit = true;
            if (seen_point)
                ++frac_digits;
        }
        else if (c == '.' && !seen_point)
            seen_point = true;
        else
            break;
    }
    if (!seen_digit)
        return fail();

    long long exponent = 0;
    if (pos < text.size())
    {
        if (text[pos] != 'e' && text[pos] != 'E')
            return fail();
        std::string rest = text.substr(pos + 1);
        try
        {
            std::size_t used = 0;
            exponent = std::stoll(rest, &used);
            if (used != rest.size())
                return fail();
        }
        catch (const std::exception&)
        {
            return fail();
        }
    }

    exponent -= frac_digits;
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
    Rational value = exponent < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
    return negative ? Rational(-value) : value;
}

/**
 * Row-sparse matrix over the rationals. Zero entries are never stored.
 */
class RationalMatrix
{
    private:
        std::size_t nrows_ = 0;
        std::size_t ncols_ = 0;
        std::vector<std::map<std::size_t, Rational>> rows_;

    public:
        RationalMatrix() = default;

        RationalMatrix(std::size_t nrows, std::size_t ncols)
            : nrows_(nrows), ncols_(ncols), rows_(nrows) {}

        std::size_t rows() const { return nrows_; }
        std::size_t cols() const { return ncols_; }

        const std::map<std::size_t, Rational>& row(std::size_t i) const { return rows_.at(i); }

        Rational at(std::size_t i, std::size_t j) const
        {
            const auto& r = rows_.at(i);
            auto it = r.find(j);
            return it == r.end() ? Rational(0) : it->second;
        }

        void add(std::size_t i, std::size_t j, const Rational& value)
        {
            if (i >= nrows_ || j >= ncols_)
                throw DimensionMismatch("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") outside matrix");
            auto& r = rows_[i];
            Rational sum = r[j] + value;
            if (sum == 0)
                r.erase(j);
            else
                r[j] = std::move(sum);
        }

        void set(std::size_t i, std::size_t j, const Rational& value)
        {
            auto& r = rows_.at(i);
            if (value == 0)
                r.erase(j);
            else
                r[j] = value;
        }

        std::size_t nonzeros() const
        {
            std::size_t n = 0;
            for (const auto& r : rows_)
                n += r.size();
            return n;
        }

        bool is_zero() const { return nonzeros() == 0; }

        RationalMatrix operator*(const RationalMatrix& other) const
        {
            if (ncols_ != other.nrows_)
                throw DimensionMismatch("product of " + std::to_string(nrows_) + "x" + std::to_string(ncols_)
                                        + " and " + std::to_string(other.nrows_) + "x" + std::to_string(other.ncols_));
            RationalMatrix out(nrows_, other.ncols_);
            for (std::size_t i = 0; i < nrows_; ++i)
                for (const auto& [k, a] : rows_[i])
                    for (const auto& [j, b] : other.rows_[k])
                        out.add(i, j, a * b);
            return out;
        }

        std::vector<Rational> apply(const std::vector<Rational>& x) const
        {
            if (x.size() != ncols_)
                throw DimensionMismatch("vector length does not match matrix columns");
            std::vector<Rational> y(nrows_, Rational(0));
            for (std::size_t i = 0; i < nrows_; ++i)
                for (const auto& [j, a] : rows_[i])
                    y[i] += a * x[j];
            return y;
        }

        bool operator==(const RationalMatrix& other) const
        {
            return nrows_ == other.nrows_ && ncols_ == other.ncols_ && rows_ == other.rows_;
        }
};

/**
 * Rank over Q by fraction-free Gaussian elimination.
 *
 * Each row is first scaled by the lcm of its denominators, so elimination
 * runs entirely in big integers. Bareiss' update keeps every intermediate
 * entry equal to a minor of the scaled matrix, so the divisions are exact.
 */
inline std::size_t exact_rank(const RationalMatrix& matrix)
{
    const std::size_t m = matrix.rows(), n = matrix.cols();
    if (m == 0 || n == 0)
        return 0;

    std::vector<std::vector<Integer>> a(m, std::vector<Integer>(n, Integer(0)));
    for (std::size_t i = 0; i < m; ++i)
    {
        Integer lcm = 1;
        for (const auto& [j, v] : matrix.row(i))
            lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(v));
        for (const auto& [j, v] : matrix.row(i))
            a[i][j] = boost::multiprecision::numerator(v) * (lcm / boost::multiprecision::denominator(v));
    }

    Integer prev = 1;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n && rank < m; ++c)
    {
        std::size_t pivot = rank;
        while (pivot < m && a[pivot][c] == 0)
            ++pivot;
        if (pivot == m)
            continue;
        std::swap(a[pivot], a[rank]);

        const Integer& p = a[rank][c];
        for (std::size_t i = rank + 1; i < m; ++i)
        {
            for (std::size_t j = c + 1; j < n; ++j)
                a[i][j] = (p * a[i][j] - a[i][c] * a[rank][j]) / prev;
            a[i][c] = 0;
        }
        prev = p;
        ++rank;
    }
    return rank;
}

}   // namespace foliage
