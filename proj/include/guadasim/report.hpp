#pragma once

#include <guadasim/units.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace guadasim {

struct ReportEvent {
    Millis timestamp{0.0};
    std::string kind;
    std::string detail;
};

struct Metric {
    double value = 0.0;
    std::string unit;
};

using Cell = std::variant<double, std::string>;

/// Plot-ready table: one row per frame, resource or table entry.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// Outcome of one simulation run: an ordered event timeline, aggregate
/// metrics with units, and an optional per-row table for CSV export.
class SimReport {
public:
    explicit SimReport(std::string scenario_id = {}) : scenario_id_(std::move(scenario_id)) {}

    /// Throws InputError if `t` precedes the last event.
    void add_event(Millis t, std::string kind, std::string detail = {});
    /// Throws InputError on an empty unit tag.
    void set_metric(const std::string& name, double value, std::string unit);
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }
    void add_note(std::string n) { notes_.push_back(std::move(n)); }
    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void set_scenario_id(std::string id) { scenario_id_ = std::move(id); }
    Table& table() noexcept { return table_; }

    /// Appends another report's events (re-sorted stably by time), metrics
    /// under `prefix.`, warnings and notes.
    void merge(const SimReport& other, const std::string& prefix);

    [[nodiscard]] const std::string& scenario_id() const noexcept { return scenario_id_; }
    [[nodiscard]] const std::vector<ReportEvent>& events() const noexcept { return events_; }
    [[nodiscard]] const std::map<std::string, Metric>& metrics() const noexcept { return metrics_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    [[nodiscard]] const std::vector<std::string>& notes() const noexcept { return notes_; }
    [[nodiscard]] const Table& table() const noexcept { return table_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    /// Throws InputError if absent.
    [[nodiscard]] double metric(const std::string& name) const;
    [[nodiscard]] bool has_metric(const std::string& name) const { return metrics_.contains(name); }

private:
    std::string scenario_id_;
    std::vector<ReportEvent> events_;
    std::map<std::string, Metric> metrics_;
    std::vector<std::string> warnings_;
    std::vector<std::string> notes_;
    Table table_;
    std::uint64_t seed_ = 0;
};

enum class ReportFormat { Json, Csv };

/// Formats a number with 6 significant digits, the way every report number
/// is printed.
[[nodiscard]] std::string format_number(double v);

/// Sorted keys, 6-significant-digit floats: identical reports always give
/// byte-identical output.
[[nodiscard]] std::string to_json(const SimReport& report);
/// Header row then one row per table row. Reports without a table export
/// their event timeline instead.
[[nodiscard]] std::string to_csv(const SimReport& report);

void emit_report(const SimReport& report, ReportFormat format, std::ostream& out);
/// Writes to `path`, or stdout when path is "-". Throws Error if the
/// destination cannot be written.
void emit_report(const SimReport& report, ReportFormat format, const std::string& path);

} // namespace guadasim
