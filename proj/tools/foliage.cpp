#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "foliage/cli.hpp"

int main(int argc, char** argv)
{
    using foliage::cli::Format;

    CLI::App app{"Basic cohomology, Hopf index and Witten deformation checks for Riemannian foliations"};
    app.require_subcommand(0, 1);

    foliage::cli::RunConfig cfg;
    std::string format = "table";
    std::size_t modes = 0, cokernel = 0;
    std::string report;

    app.add_option("command", cfg.command, "cech | index | hopf | spectrum | witten | all")
        ->required()
        ->check(CLI::IsMember(foliage::cli::commands()));
    app.add_option("--input", cfg.input_path, "input file (directory for 'all')")->required();
    app.add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}));
    auto* tol = app.add_option("--tol", "degeneracy (index, hopf) or kernel (spectrum, witten) tolerance")
                    ->check(CLI::PositiveNumber);
    auto* modes_opt = app.add_option("--modes", modes, "basis size N for spectral profiles")->check(CLI::Range(8, 4096));
    app.add_option("--s", cfg.s_values, "deformation parameters (overrides the profile)");
    app.add_option("--t", cfg.t_values, "heat times (witten uses the first, default 0.5)");
    auto* cok = app.add_option("--cokernel", cokernel, "report the cokernel dimension of this coboundary degree");
    auto* rep = app.add_option("--report", report, "also write the report to this file");
    app.add_flag("--quiet", cfg.quiet, "print nothing; rely on the exit code");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : foliage::cli::exit_input;
    }

    cfg.format = format == "json" ? Format::json : Format::table;
    if (*tol)
        cfg.tol = tol->as<double>();
    if (*modes_opt)
        cfg.modes = modes;
    if (*cok)
        cfg.cokernel = cokernel;
    if (*rep)
        cfg.report_path = report;

    foliage::cli::RunResult result = foliage::cli::run(cfg);
    if (!result.error.empty())
        std::cerr << "foliage: " << result.error << "\n";
    else if (!cfg.quiet)
        std::cout << result.report;
    return result.exit_code;
}
