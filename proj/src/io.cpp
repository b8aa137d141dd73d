#include "tiltrotor/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tiltrotor/error.hpp"

namespace tiltrotor::io {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidInput, msg); }

double number(const json& j, const std::string& key) {
  if (!j.is_number()) invalid("config key '" + key + "' must be a number");
  return j.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vector_of(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != N) invalid("config key '" + key + "' must be an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(j[i], key);
  return v;
}

Vec4 gain_vector(const json& j, const std::string& key) {
  if (j.is_number()) return Vec4::Constant(j.get<double>());
  return vector_of<4>(j, key);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Config parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) invalid("config must be a JSON object");

  Config cfg;
  Params p;
  static const std::set<std::string> known = {"m", "g", "k_f", "k_m", "arm_length", "inertia", "omega_lo",
                                              "omega_hi", "spin_sign", "reversible_rotors", "gains",
                                              "abort_on_singular"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) invalid("unknown config key '" + key + "'");
  }
  if (doc.contains("m")) p.mass = number(doc["m"], "m");
  if (doc.contains("g")) p.gravity = number(doc["g"], "g");
  if (doc.contains("k_f")) p.k_f = number(doc["k_f"], "k_f");
  if (doc.contains("k_m")) p.k_m = number(doc["k_m"], "k_m");
  if (doc.contains("arm_length")) p.arm_length = number(doc["arm_length"], "arm_length");
  if (doc.contains("inertia")) {
    const auto flat = vector_of<9>(doc["inertia"], "inertia");
    p.inertia = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(flat.data());
  }
  if (doc.contains("omega_lo")) p.omega_lo = number(doc["omega_lo"], "omega_lo");
  if (doc.contains("omega_hi")) p.omega_hi = number(doc["omega_hi"], "omega_hi");
  if (doc.contains("spin_sign")) p.spin_sign = vector_of<4>(doc["spin_sign"], "spin_sign");
  if (doc.contains("reversible_rotors")) {
    if (!doc["reversible_rotors"].is_boolean()) invalid("config key 'reversible_rotors' must be a boolean");
    p.reversible_rotors = doc["reversible_rotors"].get<bool>();
  }
  cfg.params = p.validate();

  if (doc.contains("gains")) {
    const json& g = doc["gains"];
    if (!g.is_object()) invalid("config key 'gains' must be an object");
    static const std::set<std::string> gain_keys = {"kp", "kd", "kp_xy", "kd_xy", "clamp"};
    for (const auto& [key, value] : g.items()) {
      if (!gain_keys.count(key)) invalid("unknown config key 'gains." + key + "'");
    }
    if (g.contains("kp")) cfg.gains.kp = gain_vector(g["kp"], "gains.kp");
    if (g.contains("kd")) cfg.gains.kd = gain_vector(g["kd"], "gains.kd");
    if (g.contains("kp_xy")) cfg.gains.kp_xy = number(g["kp_xy"], "gains.kp_xy");
    if (g.contains("kd_xy")) cfg.gains.kd_xy = number(g["kd_xy"], "gains.kd_xy");
    if (g.contains("clamp")) cfg.gains.clamp = number(g["clamp"], "gains.clamp");
  }
  cfg.gains.validate();
  if (doc.contains("abort_on_singular")) {
    if (!doc["abort_on_singular"].is_boolean()) invalid("config key 'abort_on_singular' must be a boolean");
    cfg.abort_on_singular = doc["abort_on_singular"].get<bool>();
  }
  return cfg;
}

Config load_config(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const Config& config) {
  const Params& p = config.params;
  json doc;
  doc["m"] = p.mass;
  doc["g"] = p.gravity;
  doc["k_f"] = p.k_f;
  doc["k_m"] = p.k_m;
  doc["arm_length"] = p.arm_length;
  json inertia = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) inertia.push_back(p.inertia(r, c));
  doc["inertia"] = inertia;
  doc["omega_lo"] = p.omega_lo;
  doc["omega_hi"] = p.omega_hi;
  doc["spin_sign"] = {p.spin_sign[0], p.spin_sign[1], p.spin_sign[2], p.spin_sign[3]};
  doc["reversible_rotors"] = p.reversible_rotors;
  const Gains& g = config.gains;
  doc["gains"] = {{"kp", {g.kp[0], g.kp[1], g.kp[2], g.kp[3]}},
                  {"kd", {g.kd[0], g.kd[1], g.kd[2], g.kd[3]}},
                  {"kp_xy", g.kp_xy},
                  {"kd_xy", g.kd_xy},
                  {"clamp", g.clamp}};
  doc["abort_on_singular"] = config.abort_on_singular;
  return doc.dump(2);
}

fs::path gait_sidecar_path(const fs::path& csv_path) {
  fs::path p = csv_path;
  return p.replace_extension(".json");
}

void write_gait(const Gait& gait, const fs::path& csv_path, int n_samples) {
  if (n_samples < 2) invalid("a gait file needs at least two samples");
  std::ofstream out = open_output(csv_path);
  out << "t_frac,alpha1,alpha2,alpha3,alpha4\n";
  for (int k = 0; k < n_samples; ++k) {
    const double frac = k == n_samples - 1 ? 1.0 : static_cast<double>(k) / (n_samples - 1);
    const Vec4 a = k == n_samples - 1 ? gait.waypoints.back().alpha : sample_gait_lifted(gait, frac * gait.period);
    out << format_double(frac);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(a[i]);
    out << '\n';
  }
  json side = {{"period_s", gait.period}, {"color", to_string(gait.color)}, {"bias", gait.bias}};
  std::ofstream sidecar = open_output(gait_sidecar_path(csv_path));
  sidecar << side.dump(2) << '\n';
}

Gait read_gait(const fs::path& csv_path) {
  const CsvTable table = read_numeric_csv(csv_path);
  const std::vector<std::string> expected = {"t_frac", "alpha1", "alpha2", "alpha3", "alpha4"};
  if (table.header != expected) invalid("gait file header must be t_frac,alpha1,alpha2,alpha3,alpha4");
  Gait gait;
  for (const auto& row : table.rows) gait.waypoints.push_back({row[0], Vec4(row[1], row[2], row[3], row[4])});

  std::ifstream in = open_input(gait_sidecar_path(csv_path));
  json side;
  try {
    side = json::parse(in);
    gait.period = side.at("period_s").get<double>();
    gait.color = branch_from_string(side.at("color").get<std::string>());
    gait.bias = side.at("bias").get<double>();
  } catch (const json::exception& e) {
    invalid(std::string("malformed gait sidecar: ") + e.what());
  }
  gait.validate();
  return gait;
}

CsvTable read_numeric_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) invalid(path.string() + " is empty");
  for (auto& h : split(strip(line), ',')) table.header.push_back(strip(h));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != table.header.size())
      invalid(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) + " fields");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        size_t used = 0;
        const std::string s = strip(f);
        row.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        invalid(path.string() + ":" + std::to_string(line_no) + ": '" + f + "' is not a number");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_colormap_csv(const ColorMap& map, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "alpha1,alpha2,alpha3,alpha4,residual_sign\n";
  for (const ColorSolution& s : map.cells) {
    out << format_double(s.alpha12.x()) << ',' << format_double(s.alpha12.y()) << ','
        << format_double(s.alpha34.x()) << ',' << format_double(s.alpha34.y()) << ',' << s.residual_sign << '\n';
  }
}

void write_colormap_planes(const ColorMap& map, const fs::path& path) {
  auto plane = [](const PlaneFit& f) {
    return json{{"c0", f.c0}, {"c_alpha1", f.c1}, {"c_alpha2", f.c2}, {"rms_residual", f.rms}, {"max_residual", f.max_abs}};
  };
  json doc = {{"branch", to_string(map.branch)},
              {"grid", {{"alpha1", {map.grid.x_min, map.grid.x_max, map.grid.nx}},
                        {"alpha2", {map.grid.y_min, map.grid.y_max, map.grid.ny}}}},
              {"alpha3", plane(map.alpha3_plane)},
              {"alpha4", plane(map.alpha4_plane)}};
  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
}

void write_curves_csv(const std::vector<LabelledCurves>& sets, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "phi,theta,curve_id\n";
  for (const auto& set : sets) {
    for (size_t c = 0; c < set.curves.polylines.size(); ++c) {
      for (const auto& v : set.curves.polylines[c])
        out << format_double(v.x()) << ',' << format_double(v.y()) << ',' << set.label << '-' << c << '\n';
    }
  }
}

void write_track_csv(const TrackLog& log, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << kTrackHeader << '\n';
  for (const TrackRow& r : log.rows) {
    const Vec12 s = r.state.to_vector();
    out << format_double(r.t);
    for (int i = 0; i < 12; ++i) out << ',' << format_double(s[i]);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(r.alpha[i]);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(r.varpi[i]);
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.ref.pos[i]);
    out << ',' << format_double(r.det_delta);
    for (bool f : r.saturated) out << ',' << (f ? 1 : 0);
    out << ',' << (r.singular ? 1 : 0) << '\n';
  }
}

TrackLog read_track_csv(const fs::path& path) {
  const CsvTable table = read_numeric_csv(path);
  if (table.header != split(kTrackHeader, ',')) invalid(path.string() + " does not carry the track log header");
  TrackLog log;
  for (const auto& v : table.rows) {
    TrackRow r;
    r.t = v[0];
    Vec12 s;
    for (int i = 0; i < 12; ++i) s[i] = v[1 + i];
    r.state = State::from_vector(s);
    r.alpha = TiltAngles(v[13], v[14], v[15], v[16]);
    r.varpi = Vec4(v[17], v[18], v[19], v[20]);
    r.ref.pos = Vec3(v[21], v[22], v[23]);
    r.det_delta = v[24];
    for (int i = 0; i < 4; ++i) r.saturated[i] = v[25 + i] != 0.0;
    r.singular = v[29] != 0.0;
    log.rows.push_back(r);
  }
  return log;
}

std::string render_svg(const SvgPlot& plot) {
  constexpr double width = 640, height = 480, left = 70, right = 20, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  const double xr = plot.x_max - plot.x_min, yr = plot.y_max - plot.y_min;
  auto sx = [&](double x) { return left + (x - plot.x_min) / xr * pw; };
  auto sy = [&](double y) { return top + ph - (y - plot.y_min) / yr * ph; };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << plot.title << "</text>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << plot.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << top + ph / 2 << ")\">" << plot.y_label << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = plot.x_min + xr * k / 4, yv = plot.y_min + yr * k / 4;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << xv << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv << "</text>\n";
  }
  for (const SvgSeries& s : plot.series) {
    if (s.polyline) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i) os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
      os << "\"/>\n";
    } else {
      for (size_t i = 0; i < s.x.size(); ++i)
        os << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"1\" fill=\"" << s.color << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
}

}  // namespace tiltrotor::io
