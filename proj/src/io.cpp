#include "decomp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "decomp/geometry.hpp"

namespace decomp::io {

namespace fs = std::filesystem;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) {
    if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

double parse_double(std::string_view s, const std::string& src, std::size_t row, const std::string& field) {
    s = trim(s);
    if (s == "nan") return std::nan("");
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end)
        throw ParseError(src, row, field, "not a number: '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, const std::string& src, std::size_t row, const std::string& field) {
    s = trim(s);
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end)
        throw ParseError(src, row, field, "not an integer: '" + std::string(s) + "'");
    return v;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
    return in;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

/// Reads the header line and returns whether the optional trailing column is present.
bool read_header(std::istream& in, const std::string& src, std::string_view required, std::string_view optional) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(src, 0, "", "missing header");
    const auto h = trim(line);
    if (h == required) return false;
    if (h.size() == required.size() + 1 + optional.size() && h.substr(0, required.size()) == required &&
        h[required.size()] == ',' && h.substr(required.size() + 1) == optional)
        return true;
    throw ParseError(src, 0, "header",
                     "expected '" + std::string(required) + "[," + std::string(optional) + "]'");
}

}  // namespace

Trajectory parse_trajectory(std::istream& in, const std::string& src) {
    static const char* const kFields[] = {"t", "x", "y", "psi", "v", "omega", "u_lat", "u_lon", "mode"};
    const bool has_mode = read_header(in, src, "t,x,y,psi,v,omega,u_lat,u_lon", "mode");
    const std::size_t width = has_mode ? 9 : 8;

    std::vector<TrajectorySample> samples;
    std::vector<int> modes;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_csv(trim(line));
        if (cells.size() != width)
            throw ParseError(src, row, "", "expected " + std::to_string(width) + " fields, got " +
                                               std::to_string(cells.size()));
        double f[8];
        for (std::size_t k = 0; k < 8; ++k) {
            f[k] = parse_double(cells[k], src, row, kFields[k]);
            if (!std::isfinite(f[k])) throw ParseError(src, row, kFields[k], "non-finite value");
        }
        TrajectorySample s;
        s.t = f[0];
        s.state = {f[1], f[2], read_angle(f[3]), f[4], f[5]};
        s.input = {f[6], f[7]};
        if (s.state.v < 0.0) throw ParseError(src, row, "v", "negative speed");
        if (s.input.u_lon < 0.0) throw ParseError(src, row, "u_lon", "negative longitudinal command");
        if (!samples.empty()) {
            const double prev = samples.back().t;
            if (!(s.t > prev)) throw ParseError(src, row, "t", "time not strictly increasing");
            if (samples.size() >= 2) {
                const double period = samples[1].t - samples[0].t;
                if (std::abs((s.t - prev) - period) > 1e-9 * period + 1e-12)
                    throw ParseError(src, row, "t", "non-uniform sample period");
            }
        }
        samples.push_back(s);
        if (has_mode) modes.push_back(static_cast<int>(parse_int(cells[8], src, row, "mode")));
    }
    if (samples.empty()) throw ParseError(src, 0, "", "no samples");
    TrajectoryMeta meta;
    meta.trial_id = fs::path(src).stem().string();
    std::optional<std::vector<int>> m;
    if (has_mode) m = std::move(modes);
    return Trajectory(std::move(samples), std::move(meta), std::move(m));
}

Trajectory load_trajectory(const fs::path& path) {
    auto in = open_in(path);
    return parse_trajectory(in, path.string());
}

void write_trajectory(const Trajectory& traj, std::ostream& out) {
    std::vector<std::string> header{"t", "x", "y", "psi", "v", "omega", "u_lat", "u_lon"};
    const bool has_mode = traj.modes().has_value();
    if (has_mode) header.emplace_back("mode");
    CsvWriter w(out, header);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& s = traj[i];
        w << s.t << s.state.x << s.state.y << s.state.psi << s.state.v << s.state.omega << s.input.u_lat
          << s.input.u_lon;
        if (has_mode) w << (*traj.modes())[i];
        w.end_row();
    }
}

void save_trajectory(const Trajectory& traj, const fs::path& path) {
    auto out = open_out(path);
    write_trajectory(traj, out);
}

GazeTrace parse_gaze(std::istream& in, const std::string& src) {
    const bool has_mode = read_header(in, src, "t,gx,gy,valid", "mode");
    const std::size_t width = has_mode ? 5 : 4;
    GazeTrace trace;
    std::vector<int> modes;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_csv(trim(line));
        if (cells.size() != width)
            throw ParseError(src, row, "", "expected " + std::to_string(width) + " fields");
        GazeSample g;
        g.t = parse_double(cells[0], src, row, "t");
        const auto valid = trim(cells[3]);
        if (valid == "1" || valid == "true") g.valid = true;
        else if (valid == "0" || valid == "false") g.valid = false;
        else throw ParseError(src, row, "valid", "expected 0/1");
        if (g.valid) {
            g.gx = parse_double(cells[1], src, row, "gx");
            g.gy = parse_double(cells[2], src, row, "gy");
            if (!std::isfinite(g.gx) || !std::isfinite(g.gy))
                throw ParseError(src, row, "gx", "valid sample with non-finite position");
        } else {
            g.gx = g.gy = std::nan("");
        }
        if (!std::isfinite(g.t)) throw ParseError(src, row, "t", "non-finite time");
        if (!trace.samples.empty() && !(g.t > trace.samples.back().t))
            throw ParseError(src, row, "t", "time not strictly increasing");
        trace.samples.push_back(g);
        if (has_mode) modes.push_back(static_cast<int>(parse_int(cells[4], src, row, "mode")));
    }
    if (trace.samples.empty()) throw ParseError(src, 0, "", "no samples");
    if (has_mode) trace.modes = std::move(modes);
    return trace;
}

GazeTrace load_gaze(const fs::path& path) {
    auto in = open_in(path);
    return parse_gaze(in, path.string());
}

void write_gaze(const GazeTrace& trace, std::ostream& out) {
    std::vector<std::string> header{"t", "gx", "gy", "valid"};
    if (trace.modes) header.emplace_back("mode");
    CsvWriter w(out, header);
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& g = trace.samples[i];
        w << g.t;
        if (g.valid) w << g.gx << g.gy;
        else w << std::string_view{} << std::string_view{};
        w << (g.valid ? 1 : 0);
        if (trace.modes) w << (*trace.modes)[i];
        w.end_row();
    }
}

void save_gaze(const GazeTrace& trace, const fs::path& path) {
    auto out = open_out(path);
    write_gaze(trace, out);
}

namespace {

Rect rect_from_json(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 4) throw ValidationError(std::string(what) + " must be [xmin, ymin, xmax, ymax]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json rect_to_json(const Rect& r) {
    return Json::array({round12(r.xmin), round12(r.ymin), round12(r.xmax), round12(r.ymax)});
}

}  // namespace

Workspace workspace_from_json(const Json& j) {
    Workspace ws;
    try {
        ws.bounds = rect_from_json(j.at("bounds"), "bounds");
        for (const auto& poly : j.value("obstacles", Json::array())) {
            Polygon p;
            for (const auto& v : poly) p.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            ws.obstacles.push_back(std::move(p));
        }
        const auto& g = j.at("goal");
        ws.goal.rect = rect_from_json(g.at("rect"), "goal.rect");
        ws.goal.psi_G = read_angle(g.at("psi_G").get<double>());
        for (const auto& s : j.value("starts", Json::array()))
            ws.starts.push_back({s.at("x").get<double>(), s.at("y").get<double>(),
                                 read_angle(s.at("psi0").get<double>())});
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("workspace JSON: ") + e.what());
    }
    ws.validate();
    return ws;
}

Json workspace_to_json(const Workspace& ws) {
    Json j;
    j["bounds"] = rect_to_json(ws.bounds);
    Json obs = Json::array();
    for (const auto& poly : ws.obstacles) {
        Json p = Json::array();
        for (const auto& v : poly) p.push_back(Json::array({round12(v.x), round12(v.y)}));
        obs.push_back(std::move(p));
    }
    j["obstacles"] = std::move(obs);
    j["goal"] = {{"rect", rect_to_json(ws.goal.rect)}, {"psi_G", round12(ws.goal.psi_G)}};
    Json starts = Json::array();
    for (const auto& s : ws.starts)
        starts.push_back({{"x", round12(s.x)}, {"y", round12(s.y)}, {"psi0", round12(s.psi0)}});
    j["starts"] = std::move(starts);
    return j;
}

Workspace load_workspace(const fs::path& path) { return workspace_from_json(load_json(path)); }

void save_workspace(const Workspace& ws, const fs::path& path) { save_json(workspace_to_json(ws), path); }

Json load_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string(), 0, "", e.what());
    }
}

void save_json(const Json& j, const fs::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::sep() {
    if (col_ >= width_) throw Error("CSV row wider than header");
    if (col_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
    sep();
    out_ << format_number(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view v) {
    sep();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    if (col_ != width_) throw Error("CSV row narrower than header");
    out_ << '\n';
    col_ = 0;
}

}  // namespace decomp::io
