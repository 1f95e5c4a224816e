#include <guadasim/scenario.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

namespace guadasim {

using nlohmann::json;
namespace fs = std::filesystem;

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) msg += "\n  - " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

std::string_view to_string(RunKind k) noexcept {
    switch (k) {
    case RunKind::AnalyzeOnly: return "analyze_only";
    case RunKind::Render: return "render";
    case RunKind::Load: return "load";
    case RunKind::Contention: return "contention";
    case RunKind::EnergyTable: return "energy_table";
    }
    return "?";
}

namespace {

std::optional<RunKind> run_kind_from_string(std::string_view s) {
    for (RunKind k : {RunKind::AnalyzeOnly, RunKind::Render, RunKind::Load, RunKind::Contention,
                      RunKind::EnergyTable}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

// Reads typed fields out of one JSON object, recording problems instead of
// throwing so that a single pass reports every bad field.
class Reader {
public:
    Reader(const json& obj, std::string where, std::vector<std::string>& problems)
        : obj_(obj), where_(std::move(where)), problems_(problems) {
        if (!obj_.is_object()) {
            fail("", "must be an object");
        }
    }

    [[nodiscard]] bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }
    [[nodiscard]] const json& at(const char* key) const { return obj_.at(key); }
    [[nodiscard]] std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

    void fail(const char* key, const std::string& what) const {
        problems_.push_back(fmt::format("{}: {}", key[0] ? path(key) : where_, what));
    }

    std::optional<double> number(const char* key, bool required = false) const {
        if (!has(key)) {
            if (required) fail(key, "required number is missing");
            return std::nullopt;
        }
        if (!at(key).is_number()) {
            fail(key, "must be a number");
            return std::nullopt;
        }
        return at(key).get<double>();
    }

    double number_or(const char* key, double dflt) const { return number(key).value_or(dflt); }

    std::optional<double> positive(const char* key, bool required = false) const {
        auto v = number(key, required);
        if (v && !(*v > 0.0)) {
            fail(key, "must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const char* key, bool required = false) const {
        if (!has(key)) {
            if (required) fail(key, "required string is missing");
            return std::nullopt;
        }
        if (!at(key).is_string()) {
            fail(key, "must be a string");
            return std::nullopt;
        }
        return at(key).get<std::string>();
    }

    std::optional<bool> boolean(const char* key) const {
        if (!has(key)) return std::nullopt;
        if (!at(key).is_boolean()) {
            fail(key, "must be true or false");
            return std::nullopt;
        }
        return at(key).get<bool>();
    }

    const json* array(const char* key, bool required = false) const {
        if (!has(key)) {
            if (required) fail(key, "required list is missing");
            return nullptr;
        }
        if (!at(key).is_array()) {
            fail(key, "must be a list");
            return nullptr;
        }
        return &at(key);
    }

private:
    const json& obj_;
    std::string where_;
    std::vector<std::string>& problems_;
};

template <typename F>
void guarded(std::vector<std::string>& problems, const std::string& where, F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        for (const auto& p : e.problems()) problems.push_back(p);
    } catch (const Error& e) {
        problems.push_back(fmt::format("{}: {}", where, e.what()));
    }
}

NetworkModel parse_network(const Reader& r) {
    NetworkModel net;
    net.first_packet_latency = Millis{r.positive("first_packet_latency_ms", true).value_or(1.0)};
    net.rtt = Millis{r.positive("rtt_ms", true).value_or(1.0)};
    net.bandwidth = Mbps{r.positive("bandwidth_mbps", true).value_or(1.0)};
    return net;
}

json network_to_json(const NetworkModel& n) {
    return {{"first_packet_latency_ms", n.first_packet_latency.count()},
            {"rtt_ms", n.rtt.count()},
            {"bandwidth_mbps", n.bandwidth.value()}};
}

StackPerfModel parse_stack(const Reader& r, std::vector<std::string>& problems, const std::string& where) {
    StackPerfModel m;
    m.per_packet_overhead = Micros{r.positive("per_packet_overhead_us").value_or(300.0)};
    if (const json* anchors = r.array("anchors", true)) {
        for (std::size_t i = 0; i < anchors->size(); ++i) {
            Reader a((*anchors)[i], fmt::format("{}.anchors[{}]", where, i), problems);
            m.anchors.push_back({Megahertz{a.positive("clock_mhz", true).value_or(1.0)},
                                 Mbps{a.positive("throughput_mbps", true).value_or(1.0)}});
        }
    }
    guarded(problems, where, [&] { m.validate(); });
    return m;
}

json stack_to_json(const StackPerfModel& m) {
    json anchors = json::array();
    for (const auto& a : m.anchors) {
        anchors.push_back({{"clock_mhz", a.clock.value()}, {"throughput_mbps", a.throughput.value()}});
    }
    return {{"anchors", anchors}, {"per_packet_overhead_us", m.per_packet_overhead.count()}};
}

BrowserConfig parse_browser(const json& j, const std::string& where, std::vector<std::string>& problems) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "guadalupe") return guadalupe_browser();
        if (name == "chrome") return chrome_browser();
        if (name == "chrome-30") return chrome_browser_30fps();
        problems.push_back(fmt::format("{}: unknown built-in browser '{}'", where, name));
        return guadalupe_browser();
    }
    Reader r(j, where, problems);
    BrowserConfig b;
    b.name = r.string("name", true).value_or("?");
    b.uses_2d_compositor = r.boolean("uses_2d_compositor").value_or(false);
    b.app_draw_cost_3d = Millis{r.number_or("app_draw_cost_3d_ms", 0.0)};
    b.page_composite_cost_3d = Millis{r.number_or("page_composite_cost_3d_ms", 0.0)};
    b.target_fps_cap = r.number_or("target_fps_cap", 60.0);
    guarded(problems, where, [&] { b.validate(); });
    return b;
}

json browser_to_json(const BrowserConfig& b) {
    return {{"name", b.name},
            {"uses_2d_compositor", b.uses_2d_compositor},
            {"app_draw_cost_3d_ms", b.app_draw_cost_3d.count()},
            {"page_composite_cost_3d_ms", b.page_composite_cost_3d.count()},
            {"target_fps_cap", b.target_fps_cap}};
}

std::optional<Keyword> keyword_from_string(std::string_view s) {
    for (Keyword k : kAllKeywords) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

RenderPage parse_render_page(const Reader& r, std::vector<std::string>& problems, const std::string& where) {
    RenderPage p;
    p.layer_count = static_cast<int>(r.number_or("layer_count", 1.0));
    p.composite_latency_2d = Millis{r.number_or("composite_latency_2d_ms", 12.6)};
    p.composite_latency_3d = Millis{r.number_or("composite_latency_3d_ms", 6.3)};
    p.other_frame_work = Millis{r.number_or("other_frame_work_ms", 5.0)};
    if (const json* kws = r.array("requirement_keywords")) {
        for (const auto& k : *kws) {
            auto kw = k.is_string() ? keyword_from_string(k.get<std::string>()) : std::nullopt;
            if (!kw) {
                problems.push_back(fmt::format("{}.requirement_keywords: unknown keyword {}", where, k.dump()));
                continue;
            }
            p.requirement.reasons.push_back(Requirement3D{category_of(*kw), *kw, SourceLocation{"config", 0}});
        }
    }
    guarded(problems, where, [&] { p.validate(); });
    return p;
}

json render_page_to_json(const RenderPage& p) {
    json kws = json::array();
    for (const auto& r : p.requirement.reasons) kws.push_back(std::string{to_string(r.keyword)});
    return {{"layer_count", p.layer_count},
            {"composite_latency_2d_ms", p.composite_latency_2d.count()},
            {"composite_latency_3d_ms", p.composite_latency_3d.count()},
            {"other_frame_work_ms", p.other_frame_work.count()},
            {"requirement_keywords", kws}};
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path{p};
    return path.is_absolute() ? path : base / path;
}

} // namespace

// ---------------------------------------------------------------------------
// Hardware

HardwareFixture parse_hardware(const json& doc, const std::string& name) {
    std::vector<std::string> problems;
    Reader root(doc, "hardware", problems);
    HardwareFixture hw;
    hw.name = root.string("name").value_or(name);

    if (const json* units = root.array("units", true)) {
        for (std::size_t i = 0; i < units->size(); ++i) {
            const std::string where = fmt::format("hardware.units[{}]", i);
            Reader u((*units)[i], where, problems);
            ProcessingUnit::Params p;
            p.id = u.string("id", true).value_or("");
            p.specialization = Specialization::from_name(u.string("specialization").value_or("GeneralPurpose"));
            guarded(problems, where, [&] { p.tier = tier_from_string(u.string("tier", true).value_or("Weak")); });
            if (const json* pts = u.array("clock_points", true)) {
                for (std::size_t k = 0; k < pts->size(); ++k) {
                    Reader c((*pts)[k], fmt::format("{}.clock_points[{}]", where, k), problems);
                    p.clock_points.push_back(
                        {Megahertz{c.number("mhz", true).value_or(0.0)}, Milliwatts{c.number("mw", true).value_or(0.0)}});
                }
            }
            p.idle_power = Milliwatts{u.number_or("idle_power_mw", 0.0)};
            p.wake_latency = Micros{u.number_or("wake_latency_us", 0.0)};
            p.ipi_latency = Micros{u.number_or("ipi_latency_us", 0.0)};
            guarded(problems, where, [&] { hw.units.emplace_back(std::move(p)); });
        }
    }
    if (const json* groups = root.array("groups", true)) {
        for (std::size_t i = 0; i < groups->size(); ++i) {
            const std::string where = fmt::format("hardware.groups[{}]", i);
            Reader g((*groups)[i], where, problems);
            const auto gname = g.string("name", true);
            const auto weak = g.string("weak", true);
            const auto strong = g.string("strong", true);
            if (!gname || !weak || !strong) continue;
            guarded(problems, where, [&] {
                hw.groups.emplace(*gname, SpecializationGroup{hw.unit(*weak), hw.unit(*strong)});
            });
        }
    }
    if (!problems.empty()) {
        throw ValidationError(std::move(problems));
    }
    return hw;
}

json hardware_to_json(const HardwareFixture& hw) {
    json units = json::array();
    for (const auto& u : hw.units) {
        json pts = json::array();
        for (const auto& p : u.clock_points()) {
            pts.push_back({{"mhz", p.clock.value()}, {"mw", p.active_power.value()}});
        }
        units.push_back({{"id", u.id()},
                         {"specialization", u.specialization().name()},
                         {"tier", std::string{to_string(u.tier())}},
                         {"clock_points", pts},
                         {"idle_power_mw", u.idle_power().value()},
                         {"wake_latency_us", u.wake_latency().count()},
                         {"ipi_latency_us", u.ipi_latency().count()}});
    }
    json groups = json::array();
    for (const auto& [name, g] : hw.groups) {
        groups.push_back({{"name", name}, {"weak", g.weak().id()}, {"strong", g.strong().id()}});
    }
    return {{"schema_version", kSchemaVersion}, {"name", hw.name}, {"units", units}, {"groups", groups}};
}

fs::path fixture_dir() {
    if (const char* env = std::getenv("GUADASIM_FIXTURE_DIR"); env && *env) {
        return fs::path{env};
    }
    return fs::path{GUADASIM_DEFAULT_FIXTURE_DIR};
}

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError({fmt::format("{}: cannot open file", path.string())});
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({fmt::format("{}: {}", path.string(), e.what())});
    }
}

} // namespace

HardwareFixture load_hardware_file(const fs::path& path) {
    return parse_hardware(read_json_file(path), path.stem().string());
}

HardwareFixture load_hardware(const std::string& name) {
    const fs::path file = fixture_dir() / (name + ".json");
    if (fs::exists(file)) {
        return load_hardware_file(file);
    }
    if (name == "omap4") {
        return omap4_fixture();
    }
    throw ValidationError({fmt::format("hardware: no fixture named '{}' in {}", name, fixture_dir().string())});
}

// ---------------------------------------------------------------------------
// Scenario parsing

ScenarioConfig parse_scenario(const json& doc, const fs::path& base_dir) {
    std::vector<std::string> problems;
    ScenarioConfig c;
    c.base_dir = base_dir;
    Reader root(doc, "", problems);
    if (!doc.is_object()) {
        throw ValidationError(std::move(problems));
    }

    if (auto v = root.number("schema_version", true); v && static_cast<int>(*v) != kSchemaVersion) {
        root.fail("schema_version", fmt::format("unsupported version {} (expected {})", *v, kSchemaVersion));
    }
    c.id = root.string("id", true).value_or("");
    if (auto seed = root.number("seed")) {
        if (*seed < 0) root.fail("seed", "must be non-negative");
        else c.seed = static_cast<std::uint64_t>(*seed);
    }

    // hardware
    if (root.has("hardware")) {
        const json& h = root.at("hardware");
        if (h.is_string()) {
            c.hardware_name = h.get<std::string>();
        } else if (h.is_object()) {
            c.hardware_inline = h;
            c.hardware_name = h.value("name", std::string{"inline"});
        } else {
            root.fail("hardware", "must be a fixture name or an inline definition");
        }
    }

    // run
    const json* run_obj = nullptr;
    if (!root.has("run")) {
        root.fail("run", "required object is missing");
    } else {
        run_obj = &root.at("run");
    }
    static const json kEmpty = json::object();
    Reader run(run_obj ? *run_obj : kEmpty, "run", problems);
    if (run_obj) {
        const auto kind = run.string("kind", true);
        if (kind) {
            if (auto k = run_kind_from_string(*kind)) c.run = *k;
            else run.fail("kind", fmt::format("unknown run kind '{}'", *kind));
        }
    }

    // pods
    if (const json* pods = root.array("pods")) {
        for (std::size_t i = 0; i < pods->size(); ++i) {
            Reader p((*pods)[i], fmt::format("pods[{}]", i), problems);
            PodSpec spec;
            spec.service = p.string("service", true).value_or("");
            spec.group = p.string("group", true).value_or("");
            spec.redundant_prep = p.boolean("redundant_prep").value_or(true);
            spec.base_switch_latency_ms = p.number("base_switch_latency_ms");
            if (spec.base_switch_latency_ms && *spec.base_switch_latency_ms < 0) {
                p.fail("base_switch_latency_ms", "must be non-negative");
            }
            c.pods.push_back(std::move(spec));
        }
    }

    // page
    if (root.has("page")) {
        Reader page(root.at("page"), "page", problems);
        if (const json* paths = page.array("paths")) {
            for (const auto& p : *paths) {
                if (!p.is_string()) {
                    page.fail("paths", "entries must be strings");
                    continue;
                }
                c.page_paths.push_back(p.get<std::string>());
                if (!fs::exists(resolve(base_dir, c.page_paths.back()))) {
                    page.fail("paths", fmt::format("'{}' does not exist", c.page_paths.back()));
                }
            }
        }
        if (page.has("render")) {
            Reader rp(page.at("render"), "page.render", problems);
            c.render_page = parse_render_page(rp, problems, "page.render");
            if (auto src = rp.string("source")) {
                c.render_source = *src;
                if (!fs::exists(resolve(base_dir, *src))) {
                    rp.fail("source", fmt::format("'{}' does not exist", *src));
                }
            }
        }
        if (const json* res = page.array("resources")) {
            for (std::size_t i = 0; i < res->size(); ++i) {
                Reader r((*res)[i], fmt::format("page.resources[{}]", i), problems);
                Resource item;
                item.url = r.string("url", true).value_or("");
                guarded(problems, fmt::format("page.resources[{}].kind", i),
                        [&] { item.kind = resource_kind_from_string(r.string("kind", true).value_or("Other")); });
                const double size = r.number("size_bytes", true).value_or(0.0);
                if (size < 0) r.fail("size_bytes", "must be non-negative");
                item.size = static_cast<Bytes>(std::max(0.0, size));
                item.discovered_by = r.string("discovered_by");
                c.resources.push_back(std::move(item));
            }
            guarded(problems, "page.resources", [&] { validate_resources(c.resources); });
        }
    }

    if (root.has("network")) {
        Reader n(root.at("network"), "network", problems);
        c.network = parse_network(n);
    }

    // run-specific parameters
    if (run_obj) {
        c.duration_s = run.number_or("duration_s", c.duration_s);
        c.vsync_ms = run.number_or("vsync_ms", c.vsync_ms);
        c.system_power_mw = run.number_or("system_power_mw", c.system_power_mw);
        if (const json* browsers = run.array("browsers")) {
            for (std::size_t i = 0; i < browsers->size(); ++i) {
                c.browsers.push_back(parse_browser((*browsers)[i], fmt::format("run.browsers[{}]", i), problems));
            }
        }
        if (const json* fps = run.array("browser_fps")) {
            for (const auto& f : *fps) {
                if (!f.is_number() || f.get<double>() < 0) run.fail("browser_fps", "entries must be numbers >= 0");
                else c.browser_fps.push_back(f.get<double>());
            }
        }
        if (run.has("background")) {
            Reader bg(run.at("background"), "run.background", problems);
            BackgroundApp app;
            app.draw_cost_3d = Millis{bg.number_or("draw_cost_3d_ms", 10.0)};
            app.compositor_cost_3d = Millis{bg.number_or("compositor_cost_3d_ms", 6.7)};
            app.standalone_fps = bg.number_or("standalone_fps", 60.0);
            guarded(problems, "run.background", [&] { app.validate(); });
            c.background = app;
        }
        if (const json* muts = run.array("mutations")) {
            for (std::size_t i = 0; i < muts->size(); ++i) {
                Reader m((*muts)[i], fmt::format("run.mutations[{}]", i), problems);
                Mutation mut;
                mut.timestamp = Millis{m.number("t_ms", true).value_or(0.0)};
                if (mut.timestamp.count() < 0) m.fail("t_ms", "must be non-negative");
                guarded(problems, fmt::format("run.mutations[{}].kind", i),
                        [&] { mut.kind = mutation_kind_from_string(m.string("kind", true).value_or("AddElement")); });
                mut.value = m.string("value", true).value_or("");
                c.mutations.push_back(std::move(mut));
            }
        }
        if (run.has("weak_stack")) {
            c.weak_stack = parse_stack(Reader(run.at("weak_stack"), "run.weak_stack", problems), problems,
                                       "run.weak_stack");
        }
        if (run.has("strong_stack")) {
            c.strong_stack = parse_stack(Reader(run.at("strong_stack"), "run.strong_stack", problems), problems,
                                         "run.strong_stack");
        }
        if (run.has("flush")) {
            Reader f(run.at("flush"), "run.flush", problems);
            c.flush.cache_size_kb = f.positive("cache_size_kb").value_or(32.0);
            c.flush.flush_cycles = f.positive("flush_cycles").value_or(3000.0);
        }
        c.weak_clock_mhz = run.positive("weak_clock_mhz").value_or(c.weak_clock_mhz);
        c.strong_clock_mhz = run.positive("strong_clock_mhz").value_or(c.strong_clock_mhz);
        c.per_packet_latency = run.boolean("per_packet_latency").value_or(false);

        c.strong_unit = run.string("strong_unit").value_or(c.strong_unit);
        c.energy_strong_clock_mhz = run.positive("energy_strong_clock_mhz").value_or(c.energy_strong_clock_mhz);
        c.work_megacycles = run.positive("work_megacycles").value_or(c.work_megacycles);
        c.reference_tolerance = run.number_or("reference_tolerance", c.reference_tolerance);
        if (const json* rows = run.array("rows")) {
            for (std::size_t i = 0; i < rows->size(); ++i) {
                Reader r((*rows)[i], fmt::format("run.rows[{}]", i), problems);
                EnergyRowSpec row;
                row.weak_unit = r.string("weak_unit", true).value_or("");
                row.weak_clock_mhz = r.positive("weak_clock_mhz", true).value_or(1.0);
                row.reference_reduction = r.number("reference_reduction");
                c.energy_rows.push_back(std::move(row));
            }
        }
        if (!(c.duration_s > 0.0)) run.fail("duration_s", "must be positive");
        if (!(c.vsync_ms > 0.0)) run.fail("vsync_ms", "must be positive");
        if (!(c.system_power_mw > 0.0)) run.fail("system_power_mw", "must be positive");
    }

    // Required inputs per run kind.
    switch (c.run) {
    case RunKind::AnalyzeOnly:
        if (c.page_paths.empty()) root.fail("page", "analyze_only run needs page.paths");
        break;
    case RunKind::Render:
        if (!c.render_page) root.fail("page", "render run needs page.render");
        if (c.browsers.empty()) run.fail("browsers", "render run needs at least one browser");
        break;
    case RunKind::Load:
        if (c.resources.empty()) root.fail("page", "load run needs page.resources");
        if (!c.network) root.fail("network", "load run needs a network model");
        break;
    case RunKind::Contention:
        if (c.browsers.empty()) run.fail("browsers", "contention run needs at least one browser");
        if (!c.background) run.fail("background", "contention run needs a background app");
        if (!c.browser_fps.empty() && c.browser_fps.size() != c.browsers.size()) {
            run.fail("browser_fps", "needs one entry per browser");
        }
        break;
    case RunKind::EnergyTable:
        if (c.energy_rows.empty()) run.fail("rows", "energy_table run needs at least one row");
        break;
    }

    // The hardware must load and every referenced unit/group must exist.
    guarded(problems, "hardware", [&] {
        const HardwareFixture hw = c.hardware_inline ? parse_hardware(*c.hardware_inline, c.hardware_name)
                                                     : load_hardware(c.hardware_name);
        for (std::size_t i = 0; i < c.pods.size(); ++i) {
            guarded(problems, fmt::format("pods[{}].group", i), [&] { (void)hw.group(c.pods[i].group); });
        }
        if (c.run == RunKind::EnergyTable) {
            guarded(problems, "run.strong_unit", [&] { (void)hw.unit(c.strong_unit); });
            for (std::size_t i = 0; i < c.energy_rows.size(); ++i) {
                guarded(problems, fmt::format("run.rows[{}].weak_unit", i),
                        [&] { (void)hw.unit(c.energy_rows[i].weak_unit); });
            }
        }
    });

    if (!problems.empty()) {
        throw ValidationError(std::move(problems));
    }
    return c;
}

ScenarioConfig load_scenario_file(const fs::path& path) {
    return parse_scenario(read_json_file(path), path.parent_path().empty() ? fs::path{"."} : path.parent_path());
}

ScenarioConfig load_fixture_scenario(const std::string& name) {
    const fs::path file = fixture_dir() / (name + ".json");
    if (!fs::exists(file)) {
        throw ValidationError({fmt::format("no fixture scenario named '{}' in {}", name, fixture_dir().string())});
    }
    return load_scenario_file(file);
}

json scenario_to_json(const ScenarioConfig& c) {
    json doc;
    doc["schema_version"] = c.schema_version;
    doc["id"] = c.id;
    doc["seed"] = c.seed;
    doc["hardware"] = c.hardware_inline ? *c.hardware_inline : json(c.hardware_name);

    json pods = json::array();
    for (const auto& p : c.pods) {
        json j = {{"service", p.service}, {"group", p.group}, {"redundant_prep", p.redundant_prep}};
        if (p.base_switch_latency_ms) j["base_switch_latency_ms"] = *p.base_switch_latency_ms;
        pods.push_back(std::move(j));
    }
    doc["pods"] = pods;

    json page = json::object();
    if (!c.page_paths.empty()) page["paths"] = c.page_paths;
    if (c.render_page) {
        page["render"] = render_page_to_json(*c.render_page);
        if (c.render_source) page["render"]["source"] = *c.render_source;
    }
    if (!c.resources.empty()) {
        json res = json::array();
        for (const auto& r : c.resources) {
            json j = {{"url", r.url}, {"kind", std::string{to_string(r.kind)}}, {"size_bytes", r.size}};
            if (r.discovered_by) j["discovered_by"] = *r.discovered_by;
            res.push_back(std::move(j));
        }
        page["resources"] = res;
    }
    doc["page"] = page;
    if (c.network) doc["network"] = network_to_json(*c.network);

    json run = {{"kind", std::string{to_string(c.run)}},
                {"duration_s", c.duration_s},
                {"vsync_ms", c.vsync_ms},
                {"system_power_mw", c.system_power_mw},
                {"weak_stack", stack_to_json(c.weak_stack)},
                {"flush", {{"cache_size_kb", c.flush.cache_size_kb}, {"flush_cycles", c.flush.flush_cycles}}},
                {"weak_clock_mhz", c.weak_clock_mhz},
                {"strong_clock_mhz", c.strong_clock_mhz},
                {"per_packet_latency", c.per_packet_latency},
                {"strong_unit", c.strong_unit},
                {"energy_strong_clock_mhz", c.energy_strong_clock_mhz},
                {"work_megacycles", c.work_megacycles},
                {"reference_tolerance", c.reference_tolerance}};
    if (c.strong_stack) run["strong_stack"] = stack_to_json(*c.strong_stack);
    json browsers = json::array();
    for (const auto& b : c.browsers) browsers.push_back(browser_to_json(b));
    run["browsers"] = browsers;
    if (!c.browser_fps.empty()) run["browser_fps"] = c.browser_fps;
    if (c.background) {
        run["background"] = {{"draw_cost_3d_ms", c.background->draw_cost_3d.count()},
                             {"compositor_cost_3d_ms", c.background->compositor_cost_3d.count()},
                             {"standalone_fps", c.background->standalone_fps}};
    }
    json muts = json::array();
    for (const auto& m : c.mutations) {
        muts.push_back({{"t_ms", m.timestamp.count()}, {"kind", std::string{to_string(m.kind)}}, {"value", m.value}});
    }
    run["mutations"] = muts;
    json rows = json::array();
    for (const auto& r : c.energy_rows) {
        json j = {{"weak_unit", r.weak_unit}, {"weak_clock_mhz", r.weak_clock_mhz}};
        if (r.reference_reduction) j["reference_reduction"] = *r.reference_reduction;
        rows.push_back(std::move(j));
    }
    run["rows"] = rows;
    doc["run"] = run;
    return doc;
}

// ---------------------------------------------------------------------------
// Energy table

std::vector<EnergyTableRow> energy_table(const HardwareFixture& hw, const ScenarioConfig& c) {
    const ProcessingUnit& strong = hw.unit(c.strong_unit);
    const Megahertz strong_clock{c.energy_strong_clock_mhz};
    const Megacycles work{c.work_megacycles};
    std::vector<EnergyTableRow> rows;
    for (const auto& spec : c.energy_rows) {
        const ProcessingUnit& weak = hw.unit(spec.weak_unit);
        const Megahertz weak_clock{spec.weak_clock_mhz};
        EnergyTableRow row{weak.id(),
                           weak_clock,
                           power_at_clock(weak, weak_clock),
                           strong.id(),
                           strong_clock,
                           power_at_clock(strong, strong_clock),
                           energy_reduction({weak, weak_clock}, {strong, strong_clock}, work),
                           spec.reference_reduction,
                           false};
        row.flagged = row.reference && std::abs(*row.reference - row.reduction) > c.reference_tolerance;
        rows.push_back(row);
    }
    return rows;
}

std::string format_energy_table(const std::vector<EnergyTableRow>& rows) {
    std::string out = fmt::format("{:<12} {:>10} {:>10}   {:<12} {:>10} {:>10}   {:>10} {:>10}\n", "weak", "MHz", "mW",
                                  "strong", "MHz", "mW", "reduction", "reference");
    std::vector<std::string> footnotes;
    for (const auto& r : rows) {
        std::string ref = r.reference ? fmt::format("{:.1f}%", *r.reference * 100.0) : std::string{"-"};
        std::string mark;
        if (r.flagged) {
            footnotes.push_back(fmt::format(
                "[{}] reference {:.1f}% for {} @ {} MHz is not derivable from iso-work energy "
                "(power x cycles / clock) with the listed powers; the model gives {:.1f}%",
                footnotes.size() + 1, *r.reference * 100.0, r.weak_unit, format_number(r.weak_clock.value()),
                r.reduction * 100.0));
            mark = fmt::format(" [{}]", footnotes.size());
        }
        out += fmt::format("{:<12} {:>10} {:>10}   {:<12} {:>10} {:>10}   {:>9.1f}% {:>10}{}\n", r.weak_unit,
                           format_number(r.weak_clock.value()), format_number(r.weak_power.value()), r.strong_unit,
                           format_number(r.strong_clock.value()), format_number(r.strong_power.value()),
                           r.reduction * 100.0, ref, mark);
    }
    for (const auto& f : footnotes) out += f + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Page analysis over files

bool AnalyzeResult::partial_failure() const {
    return std::any_of(files.begin(), files.end(), [](const AnalyzedFile& f) { return !f.error.empty(); });
}

namespace {

std::optional<std::string> read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in || fs::is_directory(path)) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_local_reference(const std::string& ref) {
    return ref.find("://") == std::string::npos && !ref.starts_with("//") && !ref.starts_with("data:");
}

} // namespace

PageSource load_page_source(const fs::path& path, std::vector<std::string>& warnings) {
    auto html = read_text(path);
    if (!html) {
        throw InputError(fmt::format("cannot read '{}'", path.string()));
    }
    PageSource src;
    src.html_name = path.filename().string();
    src.html = std::move(*html);
    const PageReferences refs = extract_references(src.html);
    auto load_refs = [&](const std::vector<std::string>& names, std::vector<NamedText>& into) {
        for (const auto& ref : names) {
            if (!is_local_reference(ref)) {
                warnings.push_back(fmt::format("{}: remote reference '{}' not fetched", src.html_name, ref));
                continue;
            }
            if (std::any_of(into.begin(), into.end(), [&](const NamedText& t) { return t.name == ref; })) {
                continue;
            }
            if (auto text = read_text(path.parent_path() / ref)) {
                into.push_back({ref, std::move(*text)});
            } else {
                warnings.push_back(fmt::format("{}: missing reference '{}'", src.html_name, ref));
            }
        }
    };
    load_refs(refs.stylesheets, src.stylesheets);
    load_refs(refs.scripts, src.scripts);
    return src;
}

AnalyzeResult analyze_paths(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const auto& p : paths) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(p, ec)) {
                if (entry.is_regular_file() && entry.path().extension() == ".html") {
                    found.push_back(entry.path().string());
                }
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }

    struct Loaded {
        AnalyzedFile file;
        std::optional<PageSource> source;
    };
    std::vector<std::future<Loaded>> jobs;
    jobs.reserve(files.size());
    for (const auto& f : files) {
        jobs.push_back(std::async(std::launch::async, [f] {
            Loaded out;
            out.file.path = f;
            try {
                out.source = load_page_source(f, out.file.warnings);
                out.file.requirement = analyze(*out.source);
            } catch (const Error& e) {
                out.file.error = e.what();
                out.source.reset();
            }
            return out;
        }));
    }

    AnalyzeResult result;
    std::vector<PageSource> readable;
    for (auto& job : jobs) {
        Loaded l = job.get();
        if (l.source) readable.push_back(std::move(*l.source));
        result.files.push_back(std::move(l.file));
    }
    if (!readable.empty()) {
        result.stats = corpus_stats(readable);
    }
    return result;
}

SimReport analyze_report(const AnalyzeResult& result) {
    SimReport report("analyze");
    Table& t = report.table();
    t.columns = {"path", "kind", "reasons", "error"};
    for (const auto& f : result.files) {
        std::string reasons;
        if (f.requirement) {
            for (const auto& r : f.requirement->reasons) {
                if (!reasons.empty()) reasons += ' ';
                reasons += fmt::format("{}:{}@{}+{}", to_string(r.category), to_string(r.keyword), r.location.source,
                                       r.location.offset);
            }
        }
        t.rows.push_back({f.path, f.requirement ? std::string{to_string(f.requirement->kind())} : std::string{"error"},
                          reasons, f.error});
        for (const auto& w : f.warnings) report.add_warning(w);
        if (!f.error.empty()) report.add_warning(f.error);
    }
    report.set_metric("files", static_cast<double>(result.files.size()), "count");
    if (result.stats) {
        const CorpusStats& s = *result.stats;
        report.set_metric("total", static_cast<double>(s.total), "count");
        report.set_metric("two_d_count", static_cast<double>(s.two_d_count), "count");
        report.set_metric("three_d_count", static_cast<double>(s.three_d_count), "count");
        report.set_metric("two_d_fraction", static_cast<double>(s.two_d_count) / static_cast<double>(s.total),
                          "fraction");
        for (const auto& [kw, n] : s.reason_histogram) {
            report.set_metric(fmt::format("histogram.{}", to_string(kw)), static_cast<double>(n), "pages");
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Running

namespace {

const PodSpec* find_pod(const ScenarioConfig& c, std::string_view service) {
    auto it = std::find_if(c.pods.begin(), c.pods.end(), [&](const PodSpec& p) { return p.service == service; });
    return it == c.pods.end() ? nullptr : &*it;
}

MappingPod build_rendering_pod(const ScenarioConfig& c, const HardwareFixture& hw) {
    const PodSpec* spec = find_pod(c, "rendering");
    const std::string group = spec ? spec->group : "graphics";
    std::optional<Millis> base;
    if (spec && spec->base_switch_latency_ms) base = Millis{*spec->base_switch_latency_ms};
    return create_pod("rendering", hw.group(group), spec ? spec->redundant_prep : true, base);
}

SimReport run_render(const ScenarioConfig& c, const HardwareFixture& hw) {
    RenderPage page = *c.render_page;
    SimReport report(c.id);
    if (c.render_source) {
        std::vector<std::string> warnings;
        const PageSource src = load_page_source(resolve(c.base_dir, *c.render_source), warnings);
        page.requirement = analyze(src);
        for (auto& w : warnings) report.add_warning(std::move(w));
    }

    Table combined;
    std::vector<std::pair<BrowserConfig, double>> fps_by_browser;
    for (const auto& browser : c.browsers) {
        MappingPod pod = build_rendering_pod(c, hw);
        ScrollScenario sc;
        sc.page = page;
        sc.browser = browser;
        sc.duration = Seconds{c.duration_s};
        sc.vsync = Millis{c.vsync_ms};
        sc.mutations = c.mutations;
        const SimReport r = simulate_scroll(sc, pod);
        report.merge(r, browser.name);
        if (combined.columns.empty()) {
            combined.columns = {"browser"};
            combined.columns.insert(combined.columns.end(), r.table().columns.begin(), r.table().columns.end());
        }
        for (const auto& row : r.table().rows) {
            std::vector<Cell> out{browser.name};
            out.insert(out.end(), row.begin(), row.end());
            combined.rows.push_back(std::move(out));
        }
        fps_by_browser.emplace_back(browser, r.metric("fps"));
    }
    report.table() = std::move(combined);

    // Pairwise comparisons of the first browser against the others.
    const auto& [first, first_fps] = fps_by_browser.front();
    for (std::size_t i = 1; i < fps_by_browser.size(); ++i) {
        const auto& [other, other_fps] = fps_by_browser[i];
        const std::string key = fmt::format("{}_vs_{}", first.name, other.name);
        report.set_metric("utilization_reduction." + key,
                          utilization_reduction(accel_utilization(first, first_fps), accel_utilization(other, other_fps)),
                          "fraction");
        const double saving = report.metric(other.name + ".composite_energy_mJ_per_s") -
                              report.metric(first.name + ".composite_energy_mJ_per_s");
        report.set_metric("composite_energy_saving_mJ_per_s." + key, saving, "mJ/s");
        report.set_metric("system_energy_saving." + key, system_energy_saving(saving, Milliwatts{c.system_power_mw}),
                          "fraction");
    }
    return report;
}

SimReport run_load(const ScenarioConfig& c, const HardwareFixture& hw) {
    const PodSpec* spec = find_pod(c, "resource_loading");
    const SpecializationGroup& group = hw.group(spec ? spec->group : "cpu");
    LoadScenario sc;
    sc.resources = c.resources;
    sc.net = *c.network;
    sc.weak_stack = c.weak_stack;
    sc.strong_stack = c.strong_stack;
    sc.flush = c.flush;
    sc.weak_clock = Megahertz{c.weak_clock_mhz};
    sc.strong_clock = Megahertz{c.strong_clock_mhz};
    sc.per_packet_latency = c.per_packet_latency;

    MappingPod pod = spec && spec->base_switch_latency_ms
                         ? create_pod("resource_loading", group, spec->redundant_prep,
                                      Millis{*spec->base_switch_latency_ms})
                         : make_loading_pod(group, sc.flush, sc.weak_clock);
    SimReport report = simulate_page_load(sc, group, pod);
    report.set_scenario_id(c.id);
    return report;
}

SimReport run_contention(const ScenarioConfig& c) {
    SimReport report(c.id);
    Table& t = report.table();
    t.columns = {"browser", "browser_fps", "browser_3d_ms_per_s", "background_fps"};
    std::vector<std::pair<std::string, int>> results;
    for (std::size_t i = 0; i < c.browsers.size(); ++i) {
        const BrowserConfig& b = c.browsers[i];
        const double fps = c.browser_fps.empty() ? b.target_fps_cap : c.browser_fps[i];
        const int bg = contention(b, fps, *c.background);
        report.set_metric("background_fps." + b.name, bg, "fps");
        report.set_metric("browser_fps." + b.name, fps, "fps");
        t.rows.push_back({b.name, fps, b.per_frame_3d_cost().count() * fps, static_cast<double>(bg)});
        results.emplace_back(b.name, bg);
    }
    for (std::size_t i = 1; i < results.size(); ++i) {
        const auto& [a, a_fps] = results.front();
        const auto& [b, b_fps] = results[i];
        if (b_fps > 0) {
            report.set_metric(fmt::format("background_improvement.{}_vs_{}", a, b),
                              static_cast<double>(a_fps) / b_fps - 1.0, "fraction");
        } else {
            report.add_warning(fmt::format("background app starved under '{}'; improvement unbounded", b));
        }
    }
    report.add_note(kContentionAnchorNote);
    return report;
}

SimReport run_energy_table(const ScenarioConfig& c, const HardwareFixture& hw) {
    SimReport report(c.id);
    const auto rows = energy_table(hw, c);
    Table& t = report.table();
    t.columns = {"weak_unit",   "weak_clock_MHz", "weak_power_mW", "strong_unit",
                 "strong_clock_MHz", "strong_power_mW", "energy_reduction", "reference", "flagged"};
    for (const auto& r : rows) {
        report.set_metric(fmt::format("energy_reduction.{}@{}", r.weak_unit, format_number(r.weak_clock.value())),
                          r.reduction, "fraction");
        t.rows.push_back({r.weak_unit, r.weak_clock.value(), r.weak_power.value(), r.strong_unit,
                          r.strong_clock.value(), r.strong_power.value(), r.reduction,
                          r.reference ? Cell{*r.reference} : Cell{std::string{}}, r.flagged ? 1.0 : 0.0});
        if (r.flagged) {
            report.add_note(fmt::format("reference {:.1f}% for {} @ {} MHz is not derivable from iso-work energy; "
                                        "model gives {:.1f}%",
                                        *r.reference * 100.0, r.weak_unit, format_number(r.weak_clock.value()),
                                        r.reduction * 100.0));
        }
    }
    return report;
}

} // namespace

SimReport run_scenario(const ScenarioConfig& c) {
    const HardwareFixture hw = c.hardware_inline ? parse_hardware(*c.hardware_inline, c.hardware_name)
                                                 : load_hardware(c.hardware_name);
    SimReport report(c.id);
    switch (c.run) {
    case RunKind::AnalyzeOnly: {
        std::vector<std::string> paths;
        for (const auto& p : c.page_paths) paths.push_back(resolve(c.base_dir, p).string());
        report = analyze_report(analyze_paths(paths));
        report.set_scenario_id(c.id);
        break;
    }
    case RunKind::Render: report = run_render(c, hw); break;
    case RunKind::Load: report = run_load(c, hw); break;
    case RunKind::Contention: report = run_contention(c); break;
    case RunKind::EnergyTable: report = run_energy_table(c, hw); break;
    }
    report.set_seed(c.seed);
    return report;
}

} // namespace guadasim
