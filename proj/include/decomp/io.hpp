#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "decomp/types.hpp"

namespace decomp::io {

using Json = nlohmann::json;

/// "%.12g" rendering used by every writer.
std::string format_number(double v);
/// Rounds to 12 significant digits so JSON output matches CSV precision.
double round12(double v);

/// Header `t,x,y,psi,v,omega,u_lat,u_lon[,mode]`. Headings are wrapped on
/// load; the trial id defaults to the file stem.
Trajectory load_trajectory(const std::filesystem::path& path);
Trajectory parse_trajectory(std::istream& in, const std::string& source);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
void write_trajectory(const Trajectory& traj, std::ostream& out);

/// Header `t,gx,gy,valid[,mode]`.
GazeTrace load_gaze(const std::filesystem::path& path);
GazeTrace parse_gaze(std::istream& in, const std::string& source);
void save_gaze(const GazeTrace& trace, const std::filesystem::path& path);
void write_gaze(const GazeTrace& trace, std::ostream& out);

Workspace workspace_from_json(const Json& j);
Json workspace_to_json(const Workspace& ws);
Workspace load_workspace(const std::filesystem::path& path);
void save_workspace(const Workspace& ws, const std::filesystem::path& path);

Json load_json(const std::filesystem::path& path);
/// Two-space indented, keys sorted, trailing newline.
void save_json(const Json& j, const std::filesystem::path& path);

/// Minimal CSV writer with the shared number formatting.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(std::string_view v);
    /// Ends the current row; throws if the row width differs from the header.
    void end_row();

private:
    void sep();
    std::ostream& out_;
    std::size_t width_;
    std::size_t col_ = 0;
};

/// Splits a CSV line on commas (no quoting; the formats never need it).
std::vector<std::string_view> split_csv(std::string_view line);

}  // namespace decomp::io
