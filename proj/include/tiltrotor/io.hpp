#pragma once

// Configuration files, CSV/JSON artefacts and minimal SVG line plots.

#include <filesystem>
#include <string>
#include <vector>

#include "tiltrotor/control.hpp"
#include "tiltrotor/gaitlab.hpp"
#include "tiltrotor/model.hpp"
#include "tiltrotor/sim.hpp"

namespace tiltrotor::io {

namespace fs = std::filesystem;

/// Physical parameters, gains and loop options from one JSON document.
struct Config {
  Params params = Params::defaults();
  Gains gains;
  bool abort_on_singular = true;
};

/// Parses the JSON text; missing keys keep their defaults, unknown keys are
/// rejected. Throws Error(kInvalidInput).
Config parse_config(const std::string& json_text);
Config load_config(const fs::path& path);
std::string config_to_json(const Config& config);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

/// Writes `<stem>.csv` (t_frac,alpha1..alpha4 at n_samples evenly spaced
/// fractions including both ends) and the sidecar `<stem>.json`.
void write_gait(const Gait& gait, const fs::path& csv_path, int n_samples = 200);
Gait read_gait(const fs::path& csv_path);
fs::path gait_sidecar_path(const fs::path& csv_path);

void write_colormap_csv(const ColorMap& map, const fs::path& path);
void write_colormap_planes(const ColorMap& map, const fs::path& path);

struct LabelledCurves {
  std::string label;  // becomes the curve_id prefix
  SingularCurveSet curves;
};
void write_curves_csv(const std::vector<LabelledCurves>& sets, const fs::path& path);

inline constexpr const char* kTrackHeader =
    "t,x,y,z,vx,vy,vz,phi,theta,psi,p,q,r,a1,a2,a3,a4,w1,w2,w3,w4,xr,yr,zr,det,sat1,sat2,sat3,sat4,singular";
void write_track_csv(const TrackLog& log, const fs::path& path);
/// Reads the rows back (references without velocity or acceleration).
TrackLog read_track_csv(const fs::path& path);

/// Parses a CSV with a header line into numeric columns.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_numeric_csv(const fs::path& path);

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "black";
  bool polyline = true;  // false draws disconnected markers
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  std::vector<SvgSeries> series;
};

std::string render_svg(const SvgPlot& plot);
void write_text(const fs::path& path, const std::string& text);

}  // namespace tiltrotor::io
