#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fracgeo/fracgeo.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Discrete fractional perimeter, capacity and Sobolev-inequality experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(fracgeo::version()));

    std::string config_path, out_path;
    int threads = 1;
    bool verbose = false;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_path, "CSV output path (default: config 'output', else stdout)");
    run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--verbose", verbose, "progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        fracgeo::set_thread_count(static_cast<unsigned>(threads));
        const auto cfg = fracgeo::parse_config_file(config_path);
        fracgeo::RunOptions opt;
        if (verbose) opt.log = [](const std::string& m) { std::cerr << "fracgeo: " << m << '\n'; };

        auto report = fracgeo::run_experiment(cfg, opt);
        report.add_metadata("source", config_path);

        const std::string target = !out_path.empty() ? out_path : cfg.output_path;
        if (target.empty()) {
            report.write_csv(std::cout);
        } else {
            std::ofstream os(target);
            if (!os) throw fracgeo::Error("cannot write '" + target + "'");
            report.write_csv(os);
            if (!os.flush()) throw fracgeo::Error("write to '" + target + "' failed");
        }
        if (verbose) {
            std::size_t failed = 0;
            for (const auto& r : report.rows()) failed += r.pass == fracgeo::PassFlag::Fail;
            std::cerr << "fracgeo: " << report.rows().size() << " rows, " << failed << " failed\n";
        }
        return report.any_failed() ? 2 : 0;
    } catch (const std::exception& e) {
        std::cerr << "fracgeo: error: " << e.what() << '\n';
        return 1;
    }
}
