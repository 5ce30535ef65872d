/**
 * Command dispatch for the foliage tool.
 *
 * run() never throws for bad input: library errors become exit code 1
 * with the message in RunResult::error. Verification failures (Hopf
 * mismatch, s-dependence, failed Morse inequality) give exit code 2.
 * Reports are deterministic: fixed key order and 12 significant digits.
 */
#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foliage/bundled.hpp"
#include "foliage/errors.hpp"
#include "foliage/hopf_ledger.hpp"
#include "foliage/io.hpp"
#include "foliage/linear_index.hpp"
#include "foliage/nerve_cech.hpp"
#include "foliage/witten_spectral.hpp"

namespace foliage::cli {

using io::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_input = 1;
inline constexpr int exit_mismatch = 2;

enum class Format { table, json };

struct RunConfig
{
    std::string command;                    // cech | index | hopf | spectrum | witten | all
    std::string input_path;
    std::optional<double> tol;              // overrides FOLIAGE_TOL
    Format format = Format::table;
    std::optional<std::string> report_path;
    std::optional<std::size_t> modes;
    std::vector<double> s_values;
    std::vector<double> t_values;
    std::optional<std::size_t> cokernel;
    bool quiet = false;
};

struct RunResult
{
    int exit_code = exit_ok;
    std::string report;     // rendered in the requested format
    std::string error;      // set when exit_code == exit_input
    json data;
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"cech", "index", "hopf", "spectrum", "witten", "all"};
    return names;
}

/** FOLIAGE_TOL, if set. Throws ParameterOutOfRange when it is not a positive number. */
inline std::optional<double> env_tolerance()
{
    const char* raw = std::getenv("FOLIAGE_TOL");
    if (raw == nullptr || *raw == '\0')
        return std::nullopt;
    char* end = nullptr;
    double value = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !(value > 0.0) || !std::isfinite(value))
        throw ParameterOutOfRange(std::string("FOLIAGE_TOL='") + raw + "' is not a positive number");
    return value;
}

// --------------------------------------------------------------------------
// Rendering
// --------------------------------------------------------------------------

namespace detail {

inline bool is_flat(const json& j)
{
    if (!j.is_array())
        return !j.is_object();
    for (const auto& e : j)
        if (e.is_object() || (e.is_array() && !is_flat(e)))
            return false;
    return true;
}

inline std::string inline_value(const json& j)
{
    if (j.is_null())
        return "-";
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_boolean())
        return j.get<bool>() ? "true" : "false";
    if (j.is_number_float())
        return io::fmt(j.get<double>());
    if (j.is_number())
        return j.dump();
    std::string s = "[";
    for (std::size_t k = 0; k < j.size(); ++k)
        s += (k ? ", " : "") + inline_value(j[k]);
    return s + "]";
}

inline void render_table(const json& j, std::string& out, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (const auto& item : j.items())
    {
        const json& v = item.value();
        if (is_flat(v))
            out += pad + item.key() + ": " + inline_value(v) + "\n";
        else if (v.is_object())
        {
            out += pad + item.key() + ":\n";
            render_table(v, out, indent + 2);
        }
        else
        {
            out += pad + item.key() + ":\n";
            for (std::size_t k = 0; k < v.size(); ++k)
            {
                out += pad + "  [" + std::to_string(k) + "]\n";
                if (v[k].is_object())
                    render_table(v[k], out, indent + 4);
                else
                    out += pad + "    " + inline_value(v[k]) + "\n";
            }
        }
    }
}

/** CSV block with the listed columns of an array of objects. */
inline void render_csv(const json& rows, const std::vector<std::string>& columns, const std::string& title, std::string& out)
{
    out += "\n# " + title + "\n";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out += (c ? "," : "") + columns[c];
    out += "\n";
    for (const auto& row : rows)
    {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out += (c ? "," : "") + inline_value(row.at(columns[c]));
        out += "\n";
    }
}

}   // namespace detail

inline std::string render(const json& data, Format format)
{
    if (format == Format::json)
        return data.dump(2) + "\n";
    std::string out;
    detail::render_table(data, out, 0);
    if (data.contains("supertrace") && data.at("supertrace").is_array())
        detail::render_csv(data.at("supertrace"), {"t", "value"}, "supertrace", out);
    if (data.contains("sweep"))
        detail::render_csv(data.at("sweep"), {"s", "supertrace", "index"}, "witten sweep", out);
    if (data.contains("localization"))
        detail::render_csv(data.at("localization").at("points"), {"s", "outside_ratio"}, "localization", out);
    return out;
}

// --------------------------------------------------------------------------
// Commands
// --------------------------------------------------------------------------

namespace detail {

struct Outcome
{
    json data;
    bool verified = true;
};

inline json index_list(const std::vector<std::size_t>& xs)
{
    json out = json::array();
    for (auto x : xs)
        out.push_back(x);
    return out;
}

inline Outcome run_cech(const RunConfig& cfg)
{
    CoverNerve cover = io::parse_cover(io::read_file(cfg.input_path));
    CechComplex complex = build_complex(cover);
    CohomologySummary summary = betti(complex);

    Outcome o;
    o.data["command"] = "cech";
    o.data["name"] = cover.name;
    o.data["dims"] = index_list(summary.dims);
    o.data["ranks"] = index_list(summary.ranks);
    o.data["betti"] = index_list(summary.betti);
    o.data["euler"] = summary.euler;
    o.data["euler_from_dims"] = summary.euler_from_dims;
    o.data["good_cover_hypothesis_verified"] = summary.good_cover_hypothesis_verified;
    o.data["note"] = "cohomology of the given cover; equals basic cohomology only for a basic good cover with closed leaves";
    if (cfg.cokernel)
    {
        json c;
        c["degree"] = *cfg.cokernel;
        c["dim"] = cokernel_dim(complex, *cfg.cokernel);
        o.data["cokernel"] = c;
    }
    o.verified = summary.euler == summary.euler_from_dims;
    return o;
}

inline LinearTolerances linear_tolerances(const RunConfig& cfg)
{
    LinearTolerances tol;
    if (auto t = cfg.tol ? cfg.tol : env_tolerance())
        tol.degeneracy = *t;
    return tol;
}

inline json tolerance_json(const LinearTolerances& tol)
{
    json t;
    t["degeneracy"] = io::number(tol.degeneracy);
    t["minus_one"] = io::number(tol.minus_one);
    t["orthogonality"] = io::number(tol.orthogonality);
    t["commutation"] = io::number(tol.commutation);
    return t;
}

inline Outcome run_index(const RunConfig& cfg)
{
    io::CriticalInput in = io::parse_critical(io::read_file(cfg.input_path));
    const LinearTolerances tol = linear_tolerances(cfg);

    Outcome o;
    o.data["command"] = "index";
    o.data["tolerances"] = tolerance_json(tol);
    json leaves = json::array();
    for (const auto& leaf : in.leaf_closures)
    {
        json r;
        r["label"] = leaf.label;
        if (!leaf.linearization)
        {
            r["index"] = *leaf.index;
            r["index_source"] = "supplied";
            leaves.push_back(r);
            continue;
        }
        Linearization lin{*leaf.linearization, leaf.label};
        const int index = index_of(lin, tol);
        const PolarParts polar = polar_decompose(lin, tol);
        const CommutationReport comm = holonomy_commutes(lin, HolonomyGenerators{leaf.holonomy}, tol);
        const bool constant = path_index_constancy(lin, 100, tol);
        const bool parity = index == ((polar.minus_one_dim % 2 == 0) ? 1 : -1);

        r["codim"] = lin.codim();
        r["determinant"] = io::number(lin.matrix.determinant());
        r["index"] = index;
        r["index_source"] = "linearization";
        if (leaf.index)
        {
            r["supplied_index"] = *leaf.index;
            r["index_agrees"] = *leaf.index == index;
            o.verified = o.verified && *leaf.index == index;
        }
        r["P"] = io::matrix_json(polar.P);
        r["Theta"] = io::matrix_json(polar.Theta);
        r["minus_one_dim"] = polar.minus_one_dim;
        r["index_matches_minus_one_parity"] = parity;
        json h;
        h["generators"] = leaf.holonomy.size();
        h["commutes"] = comm.commutes;
        h["with_linearization"] = comm.with_linearization;
        h["with_P"] = comm.with_P;
        h["with_Theta"] = comm.with_Theta;
        h["max_residual"] = io::number(comm.max_residual);
        r["holonomy"] = h;
        r["path_index_constant"] = constant;
        o.verified = o.verified && comm.commutes && constant && parity;
        leaves.push_back(r);
    }
    o.data["leaf_closures"] = leaves;
    o.data["consistent"] = o.verified;
    return o;
}

inline Outcome run_hopf(const RunConfig& cfg)
{
    io::CriticalInput in = io::parse_critical(io::read_file(cfg.input_path));
    const LinearTolerances tol = linear_tolerances(cfg);

    Outcome o;
    std::vector<CriticalRecord> records;
    json rows = json::array();
    bool indices_agree = true;
    for (const auto& leaf : in.leaf_closures)
    {
        json r;
        r["label"] = leaf.label;
        int index = 0;
        if (leaf.linearization)
        {
            Linearization lin{*leaf.linearization, leaf.label};
            index = index_of(lin, tol);
            r["index"] = index;
            r["index_source"] = "linearization";
            r["minus_one_dim"] = polar_decompose(lin, tol).minus_one_dim;
            if (leaf.index && *leaf.index != index)
            {
                r["supplied_index"] = *leaf.index;
                indices_agree = false;
            }
        }
        else
        {
            index = *leaf.index;
            r["index"] = index;
            r["index_source"] = "supplied";
        }
        r["chi_b_twisted"] = leaf.chi_b_twisted;
        records.push_back({leaf.label, index, leaf.chi_b_twisted});
        rows.push_back(r);
    }

    HopfReport report = verify(records, in.chi_b_direct);
    for (std::size_t k = 0; k < report.contributions.size(); ++k)
        rows[k]["term"] = report.contributions[k].term;

    o.data["command"] = "hopf";
    o.data["records"] = rows;
    o.data["hopf_sum"] = report.hopf_sum;
    o.data["chi_direct"] = report.chi_direct ? json(*report.chi_direct) : json(nullptr);
    o.data["verdict"] = to_string(report.verdict);
    auto simple = simple_form_check(records);
    o.data["simple_form"] = simple ? json(*simple) : json(nullptr);
    o.data["indices_agree"] = indices_agree;
    if (in.betti)
    {
        LowerBound lb = lower_bound_check(*in.betti);
        json l;
        l["betti"] = *in.betti;
        l["euler"] = lb.euler;
        l["at_least_two"] = lb.at_least_two;
        o.data["lower_bound"] = l;
    }
    o.verified = report.verdict != Verdict::mismatch && indices_agree;
    return o;
}

inline SpectralProfile load_profile(const RunConfig& cfg)
{
    SpectralProfile p = io::parse_profile(io::read_file(cfg.input_path));
    if (cfg.modes)
        p.modes = *cfg.modes;
    if (!cfg.s_values.empty())
        p.s_values = cfg.s_values;
    if (!cfg.t_values.empty())
        p.t_values = cfg.t_values;
    if (p.s_values.empty())
        p.s_values = {0.0, 1.0, 5.0, 20.0};
    if (p.t_values.empty())
        p.t_values = {0.1, 0.25, 0.5, 1.0};
    return p;
}

inline double kernel_tolerance(const RunConfig& cfg)
{
    auto t = cfg.tol ? cfg.tol : env_tolerance();
    return t ? *t : 1e-8;
}

inline json profile_json(const SpectralProfile& p)
{
    json j;
    j["name"] = p.name;
    j["modes"] = p.modes;
    j["interval"] = to_string(p.interval);
    json par;
    par["deg0"] = to_string(p.parity[deg0]);
    par["deg1"] = json::array({to_string(p.parity[deg1x]), to_string(p.parity[deg1y])});
    par["deg2"] = to_string(p.parity[deg2]);
    j["parity"] = par;
    j["weight"] = p.weight.description;
    j["field"] = json::array({p.field_x.description, p.field_y.description});
    return j;
}

inline json morse_json(const MorseReport& r, double s, double t)
{
    json j;
    j["s"] = io::number(s);
    j["t"] = io::number(t);
    json mu = json::array();
    for (double x : r.mu)
        mu.push_back(io::number(x));
    j["mu"] = mu;
    json ineq = json::array();
    for (const auto& q : r.inequalities)
    {
        json e;
        e["degree"] = q.degree;
        e["betti_side"] = io::number(q.betti_side);
        e["mu_side"] = io::number(q.mu_side);
        e["holds"] = q.holds;
        ineq.push_back(e);
    }
    j["inequalities"] = ineq;
    j["euler_mu"] = io::number(r.euler_mu);
    j["all_hold"] = r.all_hold;
    return j;
}

inline long long alternating_sum(const std::vector<std::size_t>& betti)
{
    long long e = 0;
    for (std::size_t j = 0; j < betti.size(); ++j)
        e += (j % 2 == 0 ? 1 : -1) * static_cast<long long>(betti[j]);
    return e;
}

inline Outcome run_spectrum(const RunConfig& cfg)
{
    const SpectralProfile p = load_profile(cfg);
    const BasicComplexMatrices m = assemble(p);
    const double tol = kernel_tolerance(cfg);
    const auto b = betti_numeric(m, tol);
    const long long euler = alternating_sum(b);

    Outcome o;
    o.data["command"] = "spectrum";
    o.data["profile"] = profile_json(p);
    o.data["kernel_tol"] = io::number(tol);
    o.data["betti"] = index_list(b);
    o.data["euler"] = euler;

    json traces = json::array();
    double lo = INFINITY, hi = -INFINITY;
    bool matches = true;
    for (double t : p.t_values)
    {
        const double v = heat_supertrace(m, t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        matches = matches && std::abs(v - static_cast<double>(euler)) <= 0.05;
        json e;
        e["t"] = io::number(t);
        e["value"] = io::number(v);
        traces.push_back(e);
    }
    o.data["supertrace"] = traces;
    o.data["supertrace_variation"] = io::number(p.t_values.empty() ? 0.0 : hi - lo);
    o.data["supertrace_matches_betti"] = matches;
    o.data["anticommutator_parity_preserving"] = parity_of_anticommutator(m);

    json morse = json::array();
    bool morse_ok = true;
    for (double t : p.t_values)
    {
        MorseReport r = morse_check(m, 0.0, t, tol);
        morse_ok = morse_ok && r.all_hold;
        morse.push_back(morse_json(r, 0.0, t));
    }
    o.data["morse"] = morse;
    o.verified = matches && morse_ok;
    return o;
}

inline Outcome run_witten(const RunConfig& cfg)
{
    const SpectralProfile p = load_profile(cfg);
    const double t = cfg.t_values.empty() ? 0.5 : cfg.t_values.front();
    if (!(t > 0.0))
        throw ParameterOutOfRange("heat time must be positive");
    const BasicComplexMatrices m = assemble(p);
    const double tol = kernel_tolerance(cfg);
    const auto b = betti_numeric(m, tol);
    const long long euler = alternating_sum(b);
    const WittenSweep sweep = witten_sweep(m, p.s_values, t);

    Outcome o;
    o.data["command"] = "witten";
    o.data["profile"] = profile_json(p);
    o.data["t"] = io::number(t);
    o.data["kernel_tol"] = io::number(tol);
    o.data["betti"] = index_list(b);
    o.data["euler"] = euler;

    json rows = json::array();
    json indices = json::array();
    for (const auto& pt : sweep.points)
    {
        json e;
        e["s"] = io::number(pt.s);
        e["supertrace"] = io::number(pt.supertrace);
        e["index"] = pt.index;
        e["margin"] = io::number(pt.margin);
        rows.push_back(e);
        indices.push_back(pt.index);
    }
    const bool matches = !sweep.points.empty() && sweep.points.front().index == euler;
    o.data["sweep"] = rows;
    o.data["indices"] = indices;
    o.data["s_independent"] = sweep.constant;
    o.data["matches_betti"] = matches;

    json morse = json::array();
    bool morse_ok = true;
    for (double s : p.s_values)
    {
        MorseReport r = morse_check(m, s, t, tol);
        morse_ok = morse_ok && r.all_hold;
        morse.push_back(morse_json(r, s, t));
    }
    o.data["morse"] = morse;

    if (!p.critical_points.empty())
    {
        LocalizationReport loc = localization_profile(m, p.s_values, t, p.critical_points, p.rho);
        json l;
        l["rho"] = io::number(p.rho);
        l["critical_points"] = io::numbers(p.critical_points);
        l["min_norm_v2_outside"] = io::number(loc.min_norm_v2_outside);
        json pts = json::array();
        for (const auto& pt : loc.points)
        {
            json e;
            e["s"] = io::number(pt.s);
            e["outside_ratio"] = io::number(pt.outside_ratio);
            pts.push_back(e);
        }
        l["points"] = pts;
        l["decreasing"] = loc.decreasing;
        o.data["localization"] = l;
    }
    o.verified = sweep.constant && matches && morse_ok;
    return o;
}

inline Outcome run_single(const RunConfig& cfg);

inline Outcome run_all(const RunConfig& cfg)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(cfg.input_path))
        throw ParseError("'" + cfg.input_path + "' is not a directory of bundled examples");

    Outcome o;
    o.data["command"] = "all";
    json examples = json::array();
    std::map<std::string, json> reports;
    for (const auto& ex : bundled_examples())
    {
        RunConfig sub;
        sub.command = ex.command;
        sub.input_path = (fs::path(cfg.input_path) / ex.file).string();
        sub.cokernel = ex.cokernel;
        sub.tol = cfg.tol;
        sub.modes = cfg.modes;

        json e;
        e["label"] = ex.label;
        e["file"] = ex.file;
        e["command"] = ex.command;
        bool ok = true;
        try
        {
            Outcome r = run_single(sub);
            reports[ex.file] = r.data;
            json checks = json::array();
            for (const auto& want : ex.expect)
            {
                const json::json_pointer ptr(want.pointer);
                json got = r.data.contains(ptr) ? r.data.at(ptr) : json(nullptr);
                const bool pass = got == want.value;
                ok = ok && pass;
                json c;
                c["pointer"] = want.pointer;
                c["expected"] = want.value;
                c["actual"] = got;
                c["ok"] = pass;
                checks.push_back(c);
            }
            e["verified"] = r.verified;
            e["checks"] = checks;
            ok = ok && r.verified;
        }
        catch (const Error& err)
        {
            e["error"] = err.what();
            ok = false;
        }
        e["ok"] = ok;
        o.verified = o.verified && ok;
        examples.push_back(e);
    }
    o.data["examples"] = examples;

    json cross = json::array();
    for (const auto& cc : bundled_cross_checks())
    {
        json c;
        c["label"] = cc.label;
        const bool have = reports.count(cc.records_file) && reports.count(cc.profile_file);
        json hopf = have ? reports[cc.records_file].at("hopf_sum") : json(nullptr);
        json spectral = have ? reports[cc.profile_file].at("euler") : json(nullptr);
        const bool ok = have && hopf == spectral;
        c["hopf_sum"] = hopf;
        c["spectral_euler"] = spectral;
        c["ok"] = ok;
        o.verified = o.verified && ok;
        cross.push_back(c);
    }
    o.data["cross_checks"] = cross;
    o.data["ok"] = o.verified;
    return o;
}

inline Outcome run_single(const RunConfig& cfg)
{
    if (cfg.command == "cech")
        return run_cech(cfg);
    if (cfg.command == "index")
        return run_index(cfg);
    if (cfg.command == "hopf")
        return run_hopf(cfg);
    if (cfg.command == "spectrum")
        return run_spectrum(cfg);
    if (cfg.command == "witten")
        return run_witten(cfg);
    if (cfg.command == "all")
        return run_all(cfg);
    throw SchemaError("unknown command '" + cfg.command + "'");
}

}   // namespace detail

/** Execute one command; write the report to cfg.report_path when set. */
inline RunResult run(const RunConfig& cfg)
{
    RunResult result;
    try
    {
        detail::Outcome o = detail::run_single(cfg);
        result.data = o.data;
        result.report = render(o.data, cfg.format);
        result.exit_code = o.verified ? exit_ok : exit_mismatch;
    }
    catch (const Error& e)
    {
        result.exit_code = exit_input;
        result.error = e.what();
        return result;
    }
    catch (const json::exception& e)
    {
        result.exit_code = exit_input;
        result.error = std::string("SchemaError: ") + e.what();
        return result;
    }
    if (cfg.report_path)
    {
        std::ofstream out(*cfg.report_path, std::ios::binary);
        if (!out)
        {
            result.exit_code = exit_input;
            result.error = "cannot write report to '" + *cfg.report_path + "'";
            return result;
        }
        out << result.report;
    }
    return result;
}

}   // namespace foliage::cli
