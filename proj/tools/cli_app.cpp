#include "cli_app.hpp"

#include <guadasim/error.hpp>
#include <guadasim/scenario.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace guadasim::cli {

namespace {

ScenarioConfig builtin_energy_table() {
    ScenarioConfig c;
    c.id = "energy-table";
    c.run = RunKind::EnergyTable;
    c.energy_rows = {{"cortex-m3", 200.0, 0.157}, {"cortex-m3", 100.0, 0.393}, {"cortex-m3", 34.7, 0.562}};
    return c;
}

ScenarioConfig energy_table_config() {
    if (std::filesystem::exists(fixture_dir() / "energy-table.json")) {
        return load_fixture_scenario("energy-table");
    }
    return builtin_energy_table();
}

std::optional<BrowserConfig> builtin_browser(const std::string& name) {
    if (name == "guadalupe") return guadalupe_browser();
    if (name == "chrome") return chrome_browser();
    if (name == "chrome-30") return chrome_browser_30fps();
    return std::nullopt;
}

void print_analysis(const AnalyzeResult& result, std::ostream& out) {
    for (const auto& f : result.files) {
        if (!f.error.empty()) {
            out << fmt::format("{}: error: {}\n", f.path, f.error);
            continue;
        }
        out << fmt::format("{}: {}", f.path, to_string(f.requirement->kind()));
        for (const auto& r : f.requirement->reasons) {
            out << fmt::format(" {}@{}+{}", to_string(r.keyword), r.location.source, r.location.offset);
        }
        out << '\n';
        for (const auto& w : f.warnings) out << fmt::format("  warning: {}\n", w);
    }
    if (result.stats) {
        const CorpusStats& s = *result.stats;
        out << fmt::format("total {}  2D {} ({}%)  3D {}\n", s.total, s.two_d_count,
                           format_number(100.0 * static_cast<double>(s.two_d_count) / static_cast<double>(s.total)),
                           s.three_d_count);
        for (const auto& [kw, n] : s.reason_histogram) {
            out << fmt::format("  {:<12} {}\n", to_string(kw), n);
        }
    }
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heterogeneity-aware browser model: page classifier and rendering/loading simulators", "guadasim"};
    app.require_subcommand(1);

    std::vector<std::string> analyze_paths_arg;
    bool analyze_json = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Classify HTML pages as 2D or 3D");
    analyze_cmd->add_option("paths", analyze_paths_arg, "HTML files or directories")->required();
    analyze_cmd->add_flag("--json", analyze_json, "Emit a JSON report");

    std::string scenario_file;
    std::string fixture_name;
    std::string format = "json";
    std::string out_path = "-";
    auto* run_cmd = app.add_subcommand("run", "Run a scenario file or a bundled fixture");
    auto* file_opt = run_cmd->add_option("scenario", scenario_file, "Scenario file");
    auto* fixture_opt = run_cmd->add_option("--fixture", fixture_name, "Bundled scenario name");
    file_opt->excludes(fixture_opt);
    run_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    run_cmd->add_option("--out", out_path, "Destination file, - for stdout");

    std::string hardware_file;
    bool energy_json = false;
    auto* energy_cmd = app.add_subcommand("energy-table", "Weak vs strong core energy reduction table");
    energy_cmd->add_option("--hardware", hardware_file, "Hardware fixture file")->check(CLI::ExistingFile);
    energy_cmd->add_flag("--json", energy_json, "Emit a JSON report");

    std::string browser_name;
    double browser_fps = 0.0;
    double bg_draw = 10.0;
    double bg_composite = 6.7;
    double bg_fps = 60.0;
    auto* cont_cmd = app.add_subcommand("contention", "Background 3D app frame rate next to the browser");
    cont_cmd->add_option("--browser", browser_name, "guadalupe, chrome or chrome-30")->required();
    cont_cmd->add_option("--browser-fps", browser_fps, "Browser frame rate")->required();
    cont_cmd->add_option("--bg-draw", bg_draw, "Background draw cost per frame, ms");
    cont_cmd->add_option("--bg-composite", bg_composite, "Background compositor cost per frame, ms");
    cont_cmd->add_option("--bg-fps", bg_fps, "Background standalone frame rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kValidationError;
    }

    try {
        if (*analyze_cmd) {
            const AnalyzeResult result = analyze_paths(analyze_paths_arg);
            if (analyze_json) {
                emit_report(analyze_report(result), ReportFormat::Json, out);
            } else {
                print_analysis(result, out);
            }
            if (!result.stats) {
                err << "no readable pages\n";
                return kRuntimeError;
            }
            return result.partial_failure() ? kPartialFailure : kSuccess;
        }

        if (*run_cmd) {
            if (scenario_file.empty() && fixture_name.empty()) {
                err << "run: give a scenario file or --fixture <name>\n";
                return kValidationError;
            }
            const ScenarioConfig config =
                fixture_name.empty() ? load_scenario_file(scenario_file) : load_fixture_scenario(fixture_name);
            const SimReport report = run_scenario(config);
            const ReportFormat fmt_kind = format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
            if (out_path == "-") {
                emit_report(report, fmt_kind, out);
            } else {
                emit_report(report, fmt_kind, out_path);
            }
            for (const auto& w : report.warnings()) err << "warning: " << w << '\n';
            return kSuccess;
        }

        if (*energy_cmd) {
            ScenarioConfig config = energy_table_config();
            HardwareFixture hw;
            if (hardware_file.empty()) {
                hw = config.hardware_inline ? parse_hardware(*config.hardware_inline, config.hardware_name)
                                            : load_hardware(config.hardware_name);
            } else {
                hw = load_hardware_file(hardware_file);
                config.hardware_inline = hardware_to_json(hw);
            }
            if (energy_json) {
                emit_report(run_scenario(config), ReportFormat::Json, out);
            } else {
                out << format_energy_table(energy_table(hw, config));
            }
            return kSuccess;
        }

        if (*cont_cmd) {
            const auto browser = builtin_browser(browser_name);
            if (!browser) {
                err << fmt::format("contention: unknown browser '{}'\n", browser_name);
                return kValidationError;
            }
            BackgroundApp bg{Millis{bg_draw}, Millis{bg_composite}, bg_fps};
            try {
                bg.validate();
            } catch (const InputError& e) {
                err << "contention: " << e.what() << '\n';
                return kValidationError;
            }
            const int fps = contention(*browser, browser_fps, bg);
            out << fmt::format("browser {} at {} fps uses {} ms/s of the 3D accelerator\n", browser->name,
                               format_number(browser_fps),
                               format_number(browser->per_frame_3d_cost().count() * browser_fps));
            out << fmt::format("background app: {} fps (standalone {})\n", fps, format_number(bg_fps));
            out << "note: " << kContentionAnchorNote << '\n';
            return kSuccess;
        }
    } catch (const ValidationError& e) {
        err << e.what() << '\n';
        return kValidationError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kSuccess;
}

} // namespace guadasim::cli
