/**
 * Input files and report formatting.
 *
 * Every input is a JSON object with an optional "schema_version" (only 1
 * is known). Unknown or missing fields raise SchemaError naming all of
 * them at once; malformed JSON raises ParseError with line and column.
 */
#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "foliage/errors.hpp"
#include "foliage/exact.hpp"
#include "foliage/nerve_cech.hpp"
#include "foliage/witten_spectral.hpp"

namespace foliage::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

/** Round to 12 significant digits so reports are stable across platforms. */
inline double round12(double x)
{
    if (!std::isfinite(x))
        return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    double y = std::strtod(buf, nullptr);
    return y == 0.0 ? 0.0 : y;      // no "-0"
}

inline std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", round12(x));
    return buf;
}

inline json number(double x) { return json(round12(x)); }

inline json numbers(const std::vector<double>& xs)
{
    json out = json::array();
    for (double x : xs)
        out.push_back(number(x));
    return out;
}

inline json matrix_json(const Eigen::MatrixXd& m)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(number(m(i, j)));
        out.push_back(row);
    }
    return out;
}

// --------------------------------------------------------------------------
// Reading
// --------------------------------------------------------------------------

inline json parse_text(const std::string& text, const std::string& origin)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        std::size_t line = 1, column = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k)
        {
            if (text[k] == '\n')
            {
                ++line;
                column = 1;
            }
            else
                ++column;
        }
        throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.what());
    }
}

inline json read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

/** Require an object whose keys are within `required ∪ optional` and cover `required`. */
inline void check_fields(const json& j, const std::vector<std::string>& required, const std::vector<std::string>& optional,
                         const std::string& context)
{
    if (!j.is_object())
        throw SchemaError(context + ": expected an object");
    std::vector<std::string> missing, extra;
    for (const auto& key : required)
        if (!j.contains(key))
            missing.push_back(key);
    std::set<std::string> known(required.begin(), required.end());
    known.insert(optional.begin(), optional.end());
    known.insert("schema_version");
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            extra.push_back(item.key());
    if (missing.empty() && extra.empty())
    {
        if (j.contains("schema_version") && j.at("schema_version") != schema_version)
            throw SchemaError(context + ": unsupported schema_version " + j.at("schema_version").dump());
        return;
    }
    std::string msg = context + ":";
    auto list = [](const std::vector<std::string>& keys) {
        std::string s;
        for (const auto& k : keys)
            s += (s.empty() ? "" : ", ") + k;
        return s;
    };
    if (!missing.empty())
        msg += " missing fields [" + list(missing) + "]";
    if (!extra.empty())
        msg += " unexpected fields [" + list(extra) + "]";
    throw SchemaError(msg);
}

inline double read_real(const json& v, const std::string& context)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
        return static_cast<double>(parse_rational(v.get<std::string>()));
    throw SchemaError(context + ": expected a number or rational string, got " + v.dump());
}

inline long long read_integer(const json& v, const std::string& context)
{
    if (v.is_number_integer())
        return v.get<long long>();
    throw SchemaError(context + ": expected an integer, got " + v.dump());
}

inline std::vector<double> read_reals(const json& v, const std::string& context)
{
    if (!v.is_array())
        throw SchemaError(context + ": expected an array");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(read_real(v[k], context + "[" + std::to_string(k) + "]"));
    return out;
}

inline Eigen::MatrixXd read_matrix(const json& v, const std::string& context)
{
    if (!v.is_array() || v.empty())
        throw SchemaError(context + ": expected a non-empty array of rows");
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
    {
        if (!v[i].is_array() || v[i].size() != cols)
            throw SchemaError(context + ": row " + std::to_string(i) + " does not have " + std::to_string(cols) + " entries");
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = read_real(v[i][j], context + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return m;
}

// --------------------------------------------------------------------------
// Covers
// --------------------------------------------------------------------------

/**
 * {"name", "sets": [labels], "intersections": [{"indices": [labels or
 * positions], "components": k, "face_map": {"<position>": [facet component
 * per component]}}]}
 */
inline CoverNerve parse_cover(const json& j)
{
    check_fields(j, {"name", "sets", "intersections"}, {}, "cover");
    CoverNerve cover;
    if (!j.at("name").is_string() || !j.at("sets").is_array() || !j.at("intersections").is_array())
        throw SchemaError("cover: name must be a string, sets and intersections arrays");
    cover.name = j.at("name").get<std::string>();
    for (const auto& s : j.at("sets"))
    {
        if (!s.is_string())
            throw SchemaError("cover: set labels must be strings, got " + s.dump());
        cover.sets.push_back(s.get<std::string>());
    }

    auto position = [&](const json& v, const std::string& context) -> std::size_t {
        if (v.is_string())
        {
            auto it = std::find(cover.sets.begin(), cover.sets.end(), v.get<std::string>());
            if (it == cover.sets.end())
                throw InvalidCover(context + ": unknown set '" + v.get<std::string>() + "'");
            return static_cast<std::size_t>(it - cover.sets.begin());
        }
        if (v.is_number_unsigned())
            return v.get<std::size_t>();
        throw SchemaError(context + ": index must be a set label or non-negative integer, got " + v.dump());
    };

    const auto& xs = j.at("intersections");
    for (std::size_t k = 0; k < xs.size(); ++k)
    {
        const std::string ctx = "intersections[" + std::to_string(k) + "]";
        check_fields(xs[k], {"indices"}, {"components", "face_map"}, ctx);
        Intersection x;
        if (!xs[k].at("indices").is_array())
            throw SchemaError(ctx + ": indices must be an array");
        for (const auto& v : xs[k].at("indices"))
            x.indices.push_back(position(v, ctx));
        if (xs[k].contains("components"))
        {
            long long c = read_integer(xs[k].at("components"), ctx + ".components");
            if (c < 1)
                throw InvalidCover(ctx + ": components must be positive");
            x.components = static_cast<std::size_t>(c);
        }
        if (xs[k].contains("face_map"))
        {
            const auto& fm = xs[k].at("face_map");
            if (!fm.is_object())
                throw SchemaError(ctx + ".face_map: expected an object keyed by dropped position");
            for (const auto& item : fm.items())
            {
                std::size_t pos = 0;
                try
                {
                    std::size_t used = 0;
                    pos = std::stoul(item.key(), &used);
                    if (used != item.key().size())
                        throw std::invalid_argument("trailing");
                }
                catch (const std::exception&)
                {
                    throw SchemaError(ctx + ".face_map: key '" + item.key() + "' is not a position");
                }
                std::vector<std::size_t> targets;
                if (!item.value().is_array())
                    throw SchemaError(ctx + ".face_map." + item.key() + ": expected an array");
                for (const auto& t : item.value())
                {
                    if (!t.is_number_unsigned())
                        throw SchemaError(ctx + ".face_map." + item.key() + ": entries must be component numbers");
                    targets.push_back(t.get<std::size_t>());
                }
                x.face_map[pos] = targets;
            }
        }
        cover.intersections.push_back(std::move(x));
    }
    return cover;
}

// --------------------------------------------------------------------------
// Critical leaf closures
// --------------------------------------------------------------------------

struct LeafClosureInput
{
    std::string label;
    std::optional<Eigen::MatrixXd> linearization;
    std::vector<Eigen::MatrixXd> holonomy;
    std::optional<int> index;
    long long chi_b_twisted = 0;
};

struct CriticalInput
{
    std::vector<LeafClosureInput> leaf_closures;
    std::optional<long long> chi_b_direct;
    std::optional<std::vector<long long>> betti;
};

/**
 * {"leaf_closures": [{"label", "linearization", "holonomy", "index",
 * "chi_b_twisted"}], "chi_b_direct", "betti"}. A leaf closure needs a
 * linearization or an index; "betti" alone requests only the lower bound.
 */
inline CriticalInput parse_critical(const json& j)
{
    check_fields(j, {}, {"leaf_closures", "chi_b_direct", "betti"}, "critical records");
    if (!j.contains("leaf_closures") && !j.contains("betti"))
        throw SchemaError("critical records: missing fields [leaf_closures] (or betti)");
    CriticalInput in;
    if (j.contains("leaf_closures"))
    {
        const auto& ls = j.at("leaf_closures");
        if (!ls.is_array())
            throw SchemaError("leaf_closures: expected an array");
        for (std::size_t k = 0; k < ls.size(); ++k)
        {
            const std::string ctx = "leaf_closures[" + std::to_string(k) + "]";
            check_fields(ls[k], {"label", "chi_b_twisted"}, {"linearization", "holonomy", "index"}, ctx);
            LeafClosureInput leaf;
            if (!ls[k].at("label").is_string())
                throw SchemaError(ctx + ".label: expected a string");
            leaf.label = ls[k].at("label").get<std::string>();
            leaf.chi_b_twisted = read_integer(ls[k].at("chi_b_twisted"), ctx + ".chi_b_twisted");
            if (ls[k].contains("linearization"))
                leaf.linearization = read_matrix(ls[k].at("linearization"), ctx + ".linearization");
            if (ls[k].contains("holonomy"))
            {
                const auto& hs = ls[k].at("holonomy");
                if (!hs.is_array())
                    throw SchemaError(ctx + ".holonomy: expected an array of matrices");
                for (std::size_t g = 0; g < hs.size(); ++g)
                    leaf.holonomy.push_back(read_matrix(hs[g], ctx + ".holonomy[" + std::to_string(g) + "]"));
            }
            if (ls[k].contains("index"))
                leaf.index = static_cast<int>(read_integer(ls[k].at("index"), ctx + ".index"));
            if (!leaf.linearization && !leaf.index)
                throw SchemaError(ctx + ": missing fields [linearization] (or index)");
            in.leaf_closures.push_back(std::move(leaf));
        }
    }
    if (j.contains("chi_b_direct"))
        in.chi_b_direct = read_integer(j.at("chi_b_direct"), "chi_b_direct");
    if (j.contains("betti"))
    {
        const auto& b = j.at("betti");
        if (!b.is_array())
            throw SchemaError("betti: expected an array of integers");
        std::vector<long long> betti;
        for (std::size_t k = 0; k < b.size(); ++k)
            betti.push_back(read_integer(b[k], "betti[" + std::to_string(k) + "]"));
        in.betti = std::move(betti);
    }
    return in;
}

// --------------------------------------------------------------------------
// Spectral profiles
// --------------------------------------------------------------------------

inline Parity parse_parity(const json& v, const std::string& context)
{
    if (v.is_string())
    {
        const std::string s = v.get<std::string>();
        if (s == "even")
            return Parity::even;
        if (s == "odd")
            return Parity::odd;
        if (s == "none")
            return Parity::none;
    }
    throw BadParity(context + ": expected \"even\", \"odd\" or \"none\", got " + v.dump());
}

inline Parity flip(Parity p)
{
    return p == Parity::even ? Parity::odd : p == Parity::odd ? Parity::even : Parity::none;
}

/**
 * {"name", "modes", "interval": "half"|"full", "parity": {"deg0", "deg1":
 * p or [p_x, p_y], "deg2"}, "weight": "sin"|"one"|[samples], "field":
 * "example1"|"example2"|[V_x samples]|{"x": [...], "y": [...]},
 * "s_values", "t_values", "critical_points", "rho"}
 *
 * deg2 defaults to the opposite of the e^y parity.
 */
inline SpectralProfile parse_profile(const json& j)
{
    check_fields(j, {"modes", "interval", "parity", "weight", "field"},
                 {"name", "s_values", "t_values", "critical_points", "rho"}, "profile");
    SpectralProfile p;
    p.name = j.contains("name") && j.at("name").is_string() ? j.at("name").get<std::string>() : "profile";
    long long modes = read_integer(j.at("modes"), "modes");
    if (modes < 8)
        throw InvalidProfile("modes = " + std::to_string(modes) + " but at least 8 are required");
    p.modes = static_cast<std::size_t>(modes);

    const auto& iv = j.at("interval");
    if (iv == "half")
        p.interval = Interval::half;
    else if (iv == "full")
        p.interval = Interval::full;
    else
        throw SchemaError("interval: expected \"half\" or \"full\", got " + iv.dump());

    const auto& par = j.at("parity");
    check_fields(par, {"deg0", "deg1"}, {"deg2"}, "parity");
    p.parity[deg0] = parse_parity(par.at("deg0"), "parity.deg0");
    const auto& d1 = par.at("deg1");
    if (d1.is_array())
    {
        if (d1.size() != 2)
            throw BadParity("parity.deg1: expected one parity or a pair [x, y]");
        p.parity[deg1x] = parse_parity(d1[0], "parity.deg1[0]");
        p.parity[deg1y] = parse_parity(d1[1], "parity.deg1[1]");
    }
    else
        p.parity[deg1x] = p.parity[deg1y] = parse_parity(d1, "parity.deg1");
    p.parity[deg2] = par.contains("deg2") ? parse_parity(par.at("deg2"), "parity.deg2") : flip(p.parity[deg1y]);

    const auto& w = j.at("weight");
    if (w == "sin")
        p.weight = example1_profile().weight;
    else if (w == "one")
        p.weight = constant_function(1.0, "one");
    else if (w.is_array())
        p.weight = sampled_function(read_reals(w, "weight"), p.interval, "weight samples");
    else
        throw SchemaError("weight: expected \"sin\", \"one\" or an array of samples");

    const auto& f = j.at("field");
    if (f == "example1")
    {
        auto preset = example1_profile();
        p.field_x = preset.field_x;
        p.field_y = preset.field_y;
    }
    else if (f == "example2")
    {
        auto preset = example2_profile();
        p.field_x = preset.field_x;
        p.field_y = preset.field_y;
    }
    else if (f.is_array())
    {
        p.field_x = sampled_function(read_reals(f, "field"), p.interval, "field samples");
        p.field_y = constant_function(0.0, "zero");
    }
    else if (f.is_object())
    {
        check_fields(f, {}, {"x", "y"}, "field");
        p.field_x = f.contains("x") ? sampled_function(read_reals(f.at("x"), "field.x"), p.interval, "field.x samples")
                                    : constant_function(0.0, "zero");
        p.field_y = f.contains("y") ? sampled_function(read_reals(f.at("y"), "field.y"), p.interval, "field.y samples")
                                    : constant_function(0.0, "zero");
    }
    else
        throw SchemaError("field: expected \"example1\", \"example2\", samples, or {\"x\", \"y\"}");

    if (j.contains("s_values"))
        p.s_values = read_reals(j.at("s_values"), "s_values");
    if (j.contains("t_values"))
        p.t_values = read_reals(j.at("t_values"), "t_values");
    if (j.contains("critical_points"))
        p.critical_points = read_reals(j.at("critical_points"), "critical_points");
    if (j.contains("rho"))
        p.rho = read_real(j.at("rho"), "rho");
    return p;
}

}   // namespace foliage::io
