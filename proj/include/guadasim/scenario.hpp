#pragma once

#include <guadasim/hardware_model.hpp>
#include <guadasim/loading_sim.hpp>
#include <guadasim/page_analyzer.hpp>
#include <guadasim/rendering_sim.hpp>
#include <guadasim/report.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace guadasim {

inline constexpr int kSchemaVersion = 1;

enum class RunKind { AnalyzeOnly, Render, Load, Contention, EnergyTable };

[[nodiscard]] std::string_view to_string(RunKind k) noexcept;

struct PodSpec {
    std::string service;
    std::string group;
    bool redundant_prep = true;
    std::optional<double> base_switch_latency_ms;
};

struct EnergyRowSpec {
    std::string weak_unit;
    double weak_clock_mhz = 0.0;
    std::optional<double> reference_reduction;
};

/// Declarative description of one run. Parsed from and serialized to JSON;
/// see docs/scenario-schema.md for the file layout.
struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::string id;
    std::uint64_t seed = 0;
    RunKind run = RunKind::AnalyzeOnly;

    // Hardware: a fixture name, or an inline definition.
    std::string hardware_name = "omap4";
    std::optional<nlohmann::json> hardware_inline;

    std::vector<PodSpec> pods;

    // Page: html paths, an inline render page, and/or a resource list.
    std::vector<std::string> page_paths;
    std::optional<RenderPage> render_page;
    std::optional<std::string> render_source; // html whose analysis supplies the requirement
    std::vector<Resource> resources;

    std::optional<NetworkModel> network;

    // Render / Contention
    double duration_s = 5.0;
    double vsync_ms = kVsync60Hz.count();
    std::vector<BrowserConfig> browsers;
    std::vector<double> browser_fps; // Contention; defaults to each browser's fps cap
    std::optional<BackgroundApp> background;
    std::vector<Mutation> mutations;
    double system_power_mw = 1700.0;

    // Load
    StackPerfModel weak_stack = m3_stack_model();
    std::optional<StackPerfModel> strong_stack;
    CacheFlushModel flush;
    double weak_clock_mhz = 200.0;
    double strong_clock_mhz = 200.0;
    bool per_packet_latency = false;

    // EnergyTable
    std::string strong_unit = "cortex-a9";
    double energy_strong_clock_mhz = 200.0;
    double work_megacycles = 100.0;
    std::vector<EnergyRowSpec> energy_rows;
    double reference_tolerance = 0.01;

    /// Relative paths resolve against this directory. Not serialized.
    std::filesystem::path base_dir = ".";
};

/// Parses and validates. Throws ValidationError listing every problem found.
[[nodiscard]] ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
[[nodiscard]] ScenarioConfig load_scenario_file(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Fixture directory: $GUADASIM_FIXTURE_DIR if set, else the bundled one.
[[nodiscard]] std::filesystem::path fixture_dir();
[[nodiscard]] ScenarioConfig load_fixture_scenario(const std::string& name);

[[nodiscard]] HardwareFixture parse_hardware(const nlohmann::json& doc, const std::string& name);
[[nodiscard]] nlohmann::json hardware_to_json(const HardwareFixture& hw);
/// A fixture file from fixture_dir() when present, else a built-in fixture.
[[nodiscard]] HardwareFixture load_hardware(const std::string& name);
[[nodiscard]] HardwareFixture load_hardware_file(const std::filesystem::path& path);

/// Runs the scenario. Deterministic: identical configs give identical reports.
[[nodiscard]] SimReport run_scenario(const ScenarioConfig& config);

struct EnergyTableRow {
    std::string weak_unit;
    Megahertz weak_clock;
    Milliwatts weak_power;
    std::string strong_unit;
    Megahertz strong_clock;
    Milliwatts strong_power;
    double reduction = 0.0;
    std::optional<double> reference;
    bool flagged = false; // reference not reproduced within tolerance
};

[[nodiscard]] std::vector<EnergyTableRow> energy_table(const HardwareFixture& hw, const ScenarioConfig& config);
/// Human-readable table with footnotes for flagged rows.
[[nodiscard]] std::string format_energy_table(const std::vector<EnergyTableRow>& rows);

struct AnalyzedFile {
    std::string path;
    std::optional<RenderingRequirement> requirement;
    std::string error;
    std::vector<std::string> warnings;
};

struct AnalyzeResult {
    std::vector<AnalyzedFile> files;
    std::optional<CorpusStats> stats; // over the readable files
    [[nodiscard]] bool partial_failure() const;
};

/// Loads an HTML file and the stylesheets/scripts it references from the same
/// directory. Missing references become warnings. Throws InputError if the
/// HTML itself cannot be read.
[[nodiscard]] PageSource load_page_source(const std::filesystem::path& path, std::vector<std::string>& warnings);

/// Directories expand to the *.html files they contain, sorted. Files are
/// analyzed on worker threads; output order follows input order.
[[nodiscard]] AnalyzeResult analyze_paths(const std::vector<std::string>& paths);

[[nodiscard]] SimReport analyze_report(const AnalyzeResult& result);

} // namespace guadasim
