#include <guadasim/report.hpp>

#include <guadasim/error.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

namespace guadasim {

void SimReport::add_event(Millis t, std::string kind, std::string detail) {
    if (!events_.empty() && t < events_.back().timestamp) {
        throw InputError(fmt::format("report '{}': event '{}' at {} ms precedes {} ms", scenario_id_, kind, t.count(),
                                     events_.back().timestamp.count()));
    }
    events_.push_back(ReportEvent{t, std::move(kind), std::move(detail)});
}

void SimReport::set_metric(const std::string& name, double value, std::string unit) {
    if (unit.empty()) {
        throw InputError(fmt::format("metric '{}' needs a unit tag", name));
    }
    metrics_[name] = Metric{value, std::move(unit)};
}

double SimReport::metric(const std::string& name) const {
    auto it = metrics_.find(name);
    if (it == metrics_.end()) {
        throw InputError(fmt::format("report '{}' has no metric '{}'", scenario_id_, name));
    }
    return it->second.value;
}

void SimReport::merge(const SimReport& other, const std::string& prefix) {
    for (const auto& e : other.events_) {
        events_.push_back(ReportEvent{e.timestamp, prefix + "." + e.kind, e.detail});
    }
    std::stable_sort(events_.begin(), events_.end(),
                     [](const ReportEvent& a, const ReportEvent& b) { return a.timestamp < b.timestamp; });
    for (const auto& [name, m] : other.metrics_) {
        metrics_[prefix + "." + name] = m;
    }
    for (const auto& w : other.warnings_) warnings_.push_back(prefix + ": " + w);
    for (const auto& n : other.notes_) notes_.push_back(n);
}

std::string format_number(double v) {
    if (!std::isfinite(v)) {
        return "null";
    }
    if (v == 0.0) {
        return "0"; // no "-0"
    }
    return fmt::format("{:.6g}", v);
}

namespace {

void write_json(const nlohmann::json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) { // std::map order: sorted keys
            if (!first) out += ",\n";
            first = false;
            out += inner;
            out += nlohmann::json(it.key()).dump();
            out += ": ";
            write_json(it.value(), out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ",\n";
            first = false;
            out += inner;
            write_json(v, out, indent + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case nlohmann::json::value_t::number_float:
        out += format_number(j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

std::string csv_field(const Cell& cell) {
    if (const double* d = std::get_if<double>(&cell)) {
        return format_number(*d);
    }
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

} // namespace

std::string to_json(const SimReport& report) {
    nlohmann::json doc = nlohmann::json::object();
    doc["scenario_id"] = report.scenario_id();
    doc["seed"] = report.seed();

    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : report.events()) {
        nlohmann::json ev = {{"t_ms", e.timestamp.count()}, {"kind", e.kind}};
        if (!e.detail.empty()) ev["detail"] = e.detail;
        events.push_back(std::move(ev));
    }
    doc["events"] = std::move(events);

    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, m] : report.metrics()) {
        metrics[name] = {{"value", m.value}, {"unit", m.unit}};
    }
    doc["metrics"] = std::move(metrics);
    doc["warnings"] = report.warnings();
    doc["notes"] = report.notes();

    if (!report.table().columns.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : report.table().rows) {
            nlohmann::json r = nlohmann::json::array();
            for (const auto& cell : row) {
                if (const double* d = std::get_if<double>(&cell)) {
                    r.push_back(*d);
                } else {
                    r.push_back(std::get<std::string>(cell));
                }
            }
            rows.push_back(std::move(r));
        }
        doc["table"] = {{"columns", report.table().columns}, {"rows", std::move(rows)}};
    }

    std::string out;
    write_json(doc, out, 0);
    out += '\n';
    return out;
}

std::string to_csv(const SimReport& report) {
    std::string out;
    auto write_row = [&out](const std::vector<Cell>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    if (!report.table().columns.empty()) {
        std::vector<Cell> header(report.table().columns.begin(), report.table().columns.end());
        write_row(header);
        for (const auto& row : report.table().rows) write_row(row);
        return out;
    }
    write_row({std::string{"t_ms"}, std::string{"kind"}, std::string{"detail"}});
    for (const auto& e : report.events()) {
        write_row({e.timestamp.count(), e.kind, e.detail});
    }
    return out;
}

void emit_report(const SimReport& report, ReportFormat format, std::ostream& out) {
    out << (format == ReportFormat::Json ? to_json(report) : to_csv(report));
}

void emit_report(const SimReport& report, ReportFormat format, const std::string& path) {
    if (path == "-") {
        emit_report(report, format, std::cout);
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error(fmt::format("cannot open '{}' for writing", path));
    }
    emit_report(report, format, file);
    file.flush();
    if (!file) {
        throw Error(fmt::format("failed writing '{}'", path));
    }
}

} // namespace guadasim
