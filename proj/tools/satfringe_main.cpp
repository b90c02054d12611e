// Command-line front end: predict / simulate / analyze / oracle / report.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 fit refused or
// numeric failure, 4 oracle mismatch.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satfringe.hpp"

namespace {

using satfringe::RunConfig;

RunConfig build_config(const std::string& preset, const std::string& config_file) {
    RunConfig cfg;
    if (!preset.empty()) cfg = satfringe::preset_run_config(preset);
    if (!config_file.empty()) {
        satfringe::ordered_json doc;
        try {
            doc = satfringe::ordered_json::parse(satfringe::read_text_file(config_file));
        } catch (const nlohmann::json::parse_error& e) {
            throw satfringe::validation_error(config_file + ": " + e.what());
        }
        cfg = satfringe::run_config_from_json(doc, cfg);
    }
    return cfg;
}

/// Flags shared by the config-driven subcommands.
struct CommonOpts {
    std::string preset;
    std::string config_file;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 0;
    double bins_ps = 0.0;
    std::string phase_select;

    void attach(CLI::App* cmd, bool with_sim_flags) {
        cmd->add_option("--preset", preset, "built-in satellite preset (beacon-c, stella, ajisai)");
        cmd->add_option("--config", config_file, "JSON run configuration, overlaid on the preset")
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory (created if missing)");
        if (with_sim_flags) {
            cmd->add_option("--seed", seed, "RNG seed");
            cmd->add_option("--threads", threads, "worker threads (output is identical for any value)");
        }
    }

    void attach_analysis(CLI::App* cmd) {
        cmd->add_option("--bins", bins_ps, "analysis bin width in ps (default 648 = 8 TDC quanta)");
        cmd->add_option("--phase-select", phase_select,
                        "restrict analysis to predicted phase in [lo,hi) rad: 'lo:hi' or 'none'");
    }

    RunConfig resolve(const CLI::App* cmd) const {
        auto given = [&](const char* name) {
            const CLI::Option* o = cmd->get_option_no_throw(name);
            return o != nullptr && o->count() > 0;
        };
        RunConfig cfg = build_config(preset, config_file);
        if (given("--seed")) cfg.seed = seed;
        if (given("--threads")) {
            if (threads < 1) throw satfringe::validation_error("--threads must be >= 1");
            cfg.threads = threads;
        }
        if (given("--bins")) {
            if (!(bins_ps > 0.0)) throw satfringe::validation_error("--bins must be positive");
            cfg.analysis.bin_width_s = bins_ps * 1e-12;
        }
        if (given("--phase-select")) satfringe::parse_phase_select(phase_select, cfg.analysis);
        return cfg;
    }
};

void warn_multi_photon(const RunConfig& cfg) {
    if (cfg.link.multi_photon_regime())
        std::cerr << "warning: mu*eta = " << cfg.link.mu_received * cfg.link.eta_optics
                  << " > 0.1; multi-photon contamination is not modeled at this flux\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-bin interference over satellite laser-ranging links: phase\n"
                 "prediction, single-photon Monte Carlo, and fringe analysis"};
    app.set_version_flag("--version", satfringe::version_string);
    app.require_subcommand(0, 1);

    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "print the preset table as JSON and exit");

    // predict ---------------------------------------------------------------
    auto* predict = app.add_subcommand("predict", "range track -> kinematic phase track CSV");
    CommonOpts predict_opts;
    std::string predict_range;
    predict_opts.attach(predict, /*with_sim_flags=*/true);
    predict->add_option("--range", predict_range, "range-track CSV (t_s,roundtrip_m)")
        ->check(CLI::ExistingFile);

    // simulate --------------------------------------------------------------
    auto* simulate = app.add_subcommand(
        "simulate", "Monte Carlo photon detection over a pass -> events CSV + manifest");
    CommonOpts sim_opts;
    sim_opts.attach(simulate, true);

    // analyze ---------------------------------------------------------------
    auto* analyze = app.add_subcommand(
        "analyze", "events + range track -> histogram, peak fit, visibility reports");
    CommonOpts ana_opts;
    std::string ana_events, ana_range;
    ana_opts.attach(analyze, false);
    ana_opts.attach_analysis(analyze);
    analyze->add_option("--events", ana_events, "event CSV (t_ref_ns,t_meas_ns[,truth])")
        ->required()
        ->check(CLI::ExistingFile);
    analyze->add_option("--range", ana_range, "range-track CSV used for phase prediction")
        ->required()
        ->check(CLI::ExistingFile);

    // report ----------------------------------------------------------------
    auto* report = app.add_subcommand("report", "analyze plus a human-readable summary table");
    CommonOpts rep_opts;
    std::string rep_events, rep_range;
    rep_opts.attach(report, false);
    rep_opts.attach_analysis(report);
    report->add_option("--events", rep_events, "event CSV")->required()->check(CLI::ExistingFile);
    report->add_option("--range", rep_range, "range-track CSV")->required()->check(CLI::ExistingFile);

    // oracle ----------------------------------------------------------------
    auto* oracle = app.add_subcommand(
        "oracle", "closed-form P_c vs direct wavepacket quadrature over a beta sweep");
    CommonOpts ora_opts;
    ora_opts.attach(oracle, true);
    double ora_beta_min = -1e-4, ora_beta_max = 1e-4, ora_tol = 1e-9;
    std::size_t ora_count = 100;
    std::vector<double> ora_betas;
    oracle->add_option("--beta-min", ora_beta_min, "sweep lower bound");
    oracle->add_option("--beta-max", ora_beta_max, "sweep upper bound");
    oracle->add_option("--count", ora_count, "number of random betas in the sweep");
    oracle->add_option("--beta", ora_betas, "explicit beta value(s), overrides the random sweep");
    oracle->add_option("--tol", ora_tol, "max |closed - quadrature| accepted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // flag misuse is a validation failure
    }

    try {
        if (list_presets) {
            std::cout << satfringe::presets_json().dump(2) << "\n";
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 2;
        }

        if (predict->parsed()) {
            RunConfig cfg = predict_opts.resolve(predict);
            if (predict->count("--range")) {
                cfg.range_file = predict_range;
                cfg.use_geometry = false;
            }
            const auto out = satfringe::cmd_predict(cfg, predict_opts.out_dir);
            std::cout << "wrote " << out.phase_track_csv << " (" << out.pass.ptrack.size()
                      << " knots)\n";
            return 0;
        }

        if (simulate->parsed()) {
            RunConfig cfg = sim_opts.resolve(simulate);
            warn_multi_photon(cfg);
            const auto out = satfringe::cmd_simulate(cfg, sim_opts.out_dir);
            std::cout << "wrote " << out.events_csv << " (" << out.n_events << " events)\n"
                      << "wrote " << out.range_csv << "\n"
                      << "wrote " << out.phase_track_csv << "\n"
                      << "wrote " << out.manifest_json << "\n";
            return 0;
        }

        if (analyze->parsed() || report->parsed()) {
            const bool is_report = report->parsed();
            CommonOpts& opts = is_report ? rep_opts : ana_opts;
            CLI::App* cmd = is_report ? report : analyze;
            RunConfig cfg = opts.resolve(cmd);
            const std::string events = is_report ? rep_events : ana_events;
            const std::string range = is_report ? rep_range : ana_range;
            if (is_report) {
                const auto out = satfringe::cmd_report(events, range, cfg, opts.out_dir);
                std::cout << out.summary_text;
                std::cout << "wrote " << out.summary_txt << "\n";
            } else {
                const auto out = satfringe::cmd_analyze(events, range, cfg, opts.out_dir);
                std::cout << "wrote " << out.histogram_csv << "\n"
                          << "wrote " << out.fit_json << "\n";
                if (!out.visibility_json.empty())
                    std::cout << "wrote " << out.visibility_json << "\n"
                              << "wrote " << out.visibility_csv << "\n";
                const auto& prod = out.products;
                if (prod.have_p_c)
                    std::cout << "P_c_exp = " << prod.p_c.value << " +- " << prod.p_c.err << "\n";
                if (prod.have_visibility)
                    std::cout << "visibility = " << prod.vis.v_exp << " +- " << prod.vis.v_exp_err
                              << "\n";
            }
            return 0;
        }

        if (oracle->parsed()) {
            RunConfig cfg = ora_opts.resolve(oracle);
            std::vector<double> betas = ora_betas;
            if (betas.empty()) {
                if (!(ora_beta_max >= ora_beta_min))
                    throw satfringe::validation_error("oracle: beta-max must be >= beta-min");
                satfringe::RandomStream rng(cfg.seed, 0, /*salt=*/3);
                betas.reserve(ora_count);
                for (std::size_t i = 0; i < ora_count; ++i)
                    betas.push_back(ora_beta_min + (ora_beta_max - ora_beta_min) * rng.uniform());
            }
            const auto out = satfringe::cmd_oracle(cfg.optical, betas, ora_tol, ora_opts.out_dir);
            std::cout << "wrote " << out.table_csv << " (" << out.rows.size()
                      << " rows, max |diff| = " << out.max_diff << ")\n";
            if (!out.ok) {
                std::cerr << "oracle mismatch: max |closed - quadrature| = " << out.max_diff
                          << " exceeds " << ora_tol << "\n";
                return 4;
            }
            return 0;
        }

        std::cerr << app.help();
        return 2;
    } catch (const satfringe::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const satfringe::fit_refused& e) {
        std::cerr << "fit refused: " << e.what() << "\n";
        return 3;
    } catch (const satfringe::numerical_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
