#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "tiltrotor/cli.hpp"
#include "tiltrotor/control.hpp"
#include "tiltrotor/error.hpp"
#include "tiltrotor/gaitlab.hpp"
#include "tiltrotor/linearization.hpp"
#include "tiltrotor/model.hpp"
#include "tiltrotor/sim.hpp"

namespace py = pybind11;
using namespace tiltrotor;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Params or_defaults(const std::optional<Params>& p) { return p ? *p : Params::defaults(); }

py::dict track_summary(const TrackLog& log) {
  const size_t n = log.rows.size();
  RowMatrix pos(n, 3), ref(n, 3), euler(n, 3), alpha(n, 4), varpi(n, 4);
  Eigen::VectorXd t(n), det(n);
  std::vector<bool> singular(n);
  for (size_t k = 0; k < n; ++k) {
    const TrackRow& r = log.rows[k];
    const auto i = static_cast<Eigen::Index>(k);
    t[i] = r.t;
    pos.row(i) = r.state.position.transpose();
    ref.row(i) = r.ref.pos.transpose();
    euler.row(i) = r.state.euler.transpose();
    alpha.row(i) = r.alpha.values().transpose();
    varpi.row(i) = r.varpi.transpose();
    det[i] = r.det_delta;
    singular[k] = r.singular;
  }
  py::dict out;
  out["t"] = t;
  out["position"] = pos;
  out["reference"] = ref;
  out["euler"] = euler;
  out["alpha"] = alpha;
  out["rotor_speeds"] = varpi;
  out["det"] = det;
  out["singular"] = singular;
  out["completed"] = log.completed();
  if (log.abort) {
    out["abort_time"] = log.abort->time;
    out["abort_reason"] = std::string(to_string(log.abort->reason));
    out["abort_message"] = log.abort->message;
  } else {
    out["abort_time"] = py::none();
    out["abort_reason"] = py::none();
    out["abort_message"] = py::none();
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tilt-rotor gait design, singularity analysis and tracking simulation";

  py::register_exception<Error>(m, "TiltrotorError", PyExc_ValueError);

  py::class_<Params>(m, "Params")
      .def(py::init([] { return Params::defaults(); }))
      .def_readwrite("mass", &Params::mass)
      .def_readwrite("gravity", &Params::gravity)
      .def_readwrite("k_f", &Params::k_f)
      .def_readwrite("k_m", &Params::k_m)
      .def_readwrite("arm_length", &Params::arm_length)
      .def_readwrite("inertia", &Params::inertia)
      .def_readwrite("omega_lo", &Params::omega_lo)
      .def_readwrite("omega_hi", &Params::omega_hi)
      .def_readwrite("spin_sign", &Params::spin_sign)
      .def_readwrite("reversible_rotors", &Params::reversible_rotors)
      .def("hover_speed", &Params::hover_speed)
      .def("validate", [](Params& p) { p.validate(); return p; });

  py::class_<Gains>(m, "Gains")
      .def(py::init<>())
      .def_readwrite("kp", &Gains::kp)
      .def_readwrite("kd", &Gains::kd)
      .def_readwrite("kp_xy", &Gains::kp_xy)
      .def_readwrite("kd_xy", &Gains::kd_xy)
      .def_readwrite("clamp", &Gains::clamp)
      .def("validate", &Gains::validate);

  m.def("wrap_angle", &wrap_angle, py::arg("angle"));

  m.def(
      "thrust_matrix", [](const Vec4& a, const std::optional<Params>& p) { return thrust_matrix(TiltAngles(a), or_defaults(p)); },
      py::arg("alpha"), py::arg("params") = py::none(), "Body force per unit signed squared speed, 3x4.");
  m.def(
      "torque_matrix", [](const Vec4& a, const std::optional<Params>& p) { return torque_matrix(TiltAngles(a), or_defaults(p)); },
      py::arg("alpha"), py::arg("params") = py::none(), "Body torque per unit signed squared speed, 3x4.");
  m.def(
      "decoupling_matrix",
      [](const Vec3& euler, const Vec4& a, const std::optional<Params>& p) {
        return Mat4(decoupling_matrix(euler, TiltAngles(a), or_defaults(p)).delta);
      },
      py::arg("euler"), py::arg("alpha"), py::arg("params") = py::none());
  m.def(
      "decoupling_det",
      [](const Vec3& euler, const Vec4& a, const std::optional<Params>& p) {
        return decoupling_matrix(euler, TiltAngles(a), or_defaults(p)).determinant();
      },
      py::arg("euler"), py::arg("alpha"), py::arg("params") = py::none());
  m.def(
      "det_decomposition",
      [](const Vec4& a, const std::optional<Params>& p) {
        const DetCoefficients c = det_decomposition(TiltAngles(a), or_defaults(p));
        return py::make_tuple(c.a, c.b, c.c);
      },
      py::arg("alpha"), py::arg("params") = py::none(), "Coefficients (a, b, c) of the determinant factorization.");
  m.def(
      "normalized_det",
      [](double roll, double pitch, double a, double b, double c) {
        DetCoefficients k;
        k.a = a;
        k.b = b;
        k.c = c;
        return normalized_det(roll, pitch, k);
      },
      py::arg("roll"), py::arg("pitch"), py::arg("a"), py::arg("b"), py::arg("c"));
  m.def("coefficient_scale", [](const std::optional<Params>& p) { return coefficient_scale(or_defaults(p)); },
        py::arg("params") = py::none());

  py::enum_<Branch>(m, "Branch").value("BLUE", Branch::kBlue).value("RED", Branch::kRed);

  py::class_<ColorSolution>(m, "ColorSolution")
      .def_readonly("alpha12", &ColorSolution::alpha12)
      .def_readonly("alpha34", &ColorSolution::alpha34)
      .def_readonly("color", &ColorSolution::color)
      .def_readonly("residual_sign", &ColorSolution::residual_sign)
      .def("lifted", &ColorSolution::lifted);

  m.def(
      "solve_color_pair",
      [](double a1, double a2, const std::optional<Params>& p) { return solve_color_pair(a1, a2, or_defaults(p)); },
      py::arg("alpha1"), py::arg("alpha2"), py::arg("params") = py::none(), "Blue and red solutions, in that order.");

  py::class_<Grid2D>(m, "Grid2D")
      .def(py::init<>())
      .def(py::init([](double half_range, int n) { return Grid2D::square(half_range, n); }), py::arg("half_range"),
           py::arg("n"))
      .def_readwrite("x_min", &Grid2D::x_min)
      .def_readwrite("x_max", &Grid2D::x_max)
      .def_readwrite("y_min", &Grid2D::y_min)
      .def_readwrite("y_max", &Grid2D::y_max)
      .def_readwrite("nx", &Grid2D::nx)
      .def_readwrite("ny", &Grid2D::ny);

  m.def(
      "color_map",
      [](Branch branch, double half_range, int n, const std::optional<Params>& p) {
        const ColorMap map = color_map(Grid2D::square(half_range, n), branch, or_defaults(p));
        RowMatrix a3(n, n), a4(n, n), sign(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            a3(i, j) = map.at(i, j).alpha34.x();
            a4(i, j) = map.at(i, j).alpha34.y();
            sign(i, j) = map.at(i, j).residual_sign;
          }
        Eigen::VectorXd axis(n);
        for (int i = 0; i < n; ++i) axis[i] = map.grid.x(i);
        auto plane = [](const PlaneFit& f) {
          py::dict d;
          d["c0"] = f.c0;
          d["c_alpha1"] = f.c1;
          d["c_alpha2"] = f.c2;
          d["rms"] = f.rms;
          d["max_abs"] = f.max_abs;
          return d;
        };
        py::dict out;
        out["axis"] = axis;
        out["alpha3"] = a3;
        out["alpha4"] = a4;
        out["residual_sign"] = sign;
        out["alpha3_plane"] = plane(map.alpha3_plane);
        out["alpha4_plane"] = plane(map.alpha4_plane);
        return out;
      },
      py::arg("branch"), py::arg("half_range") = 0.6, py::arg("n") = 21, py::arg("params") = py::none(),
      "Colour sheet over a square grid; alpha3[i, j] belongs to (axis[i], axis[j]).");

  py::class_<Gait>(m, "Gait")
      .def_readwrite("period", &Gait::period)
      .def_readwrite("color", &Gait::color)
      .def_readwrite("bias", &Gait::bias)
      .def_property_readonly("waypoints",
                             [](const Gait& g) {
                               RowMatrix w(g.waypoints.size(), 5);
                               for (size_t k = 0; k < g.waypoints.size(); ++k) {
                                 const auto i = static_cast<Eigen::Index>(k);
                                 w(i, 0) = g.waypoints[k].t_frac;
                                 w.block<1, 4>(i, 1) = g.waypoints[k].alpha.transpose();
                               }
                               return w;
                             })
      .def("sample", &sample_gait_lifted, py::arg("t"));

  m.def(
      "make_preset_gait", [](const std::string& name, const std::optional<Params>& p) { return make_preset_gait(name, or_defaults(p)); },
      py::arg("name"), py::arg("params") = py::none());
  m.def(
      "make_rectangle_gait",
      [](const Eigen::Vector2d& c, const Eigen::Vector2d& h, double period, Branch branch,
         const std::optional<Params>& p) { return make_rectangle_gait(c, h, period, branch, or_defaults(p)); },
      py::arg("center"), py::arg("half_extents"), py::arg("period") = 10.0, py::arg("branch") = Branch::kBlue,
      py::arg("params") = py::none());
  m.def("bias_gait", &bias_gait, py::arg("gait"), py::arg("factor"));

  m.def(
      "singular_curves",
      [](const Vec4& a, const Grid2D& grid, const std::optional<Params>& p) {
        const SingularCurveSet set = singular_curves(TiltAngles(a), or_defaults(p), grid);
        std::vector<RowMatrix> out;
        for (const auto& line : set.polylines) {
          RowMatrix v(line.size(), 2);
          for (size_t k = 0; k < line.size(); ++k) v.row(static_cast<Eigen::Index>(k)) = line[k].transpose();
          out.push_back(std::move(v));
        }
        return out;
      },
      py::arg("alpha"), py::arg("grid") = Grid2D{}, py::arg("params") = py::none(),
      "Polylines of (roll, pitch) where the decoupling matrix is singular.");

  m.def(
      "robustness_report",
      [](const Gait& g, const Grid2D& grid, int phases, const std::optional<Params>& p) {
        const RobustnessReport r = robustness_report(g, or_defaults(p), grid, phases);
        return py::make_tuple(r.area_fraction, r.hover_margin);
      },
      py::arg("gait"), py::arg("grid") = Grid2D{}, py::arg("phases") = 20, py::arg("params") = py::none(),
      "(area_fraction, hover_margin).");

  m.def(
      "run_tracking",
      [](const Gait& gait, double duration, double dt, bool saturation, bool abort_on_singular,
         const std::optional<Params>& p, const std::optional<Gains>& g) {
        SimConfig cfg;
        cfg.duration = duration;
        cfg.dt = dt;
        cfg.saturation = saturation;
        cfg.abort_on_singular = abort_on_singular;
        TrackLog log;
        {
          py::gil_scoped_release release;
          log = run_tracking(cfg, or_defaults(p), g ? *g : Gains{}, gait);
        }
        return track_summary(log);
      },
      py::arg("gait"), py::arg("duration") = 120.0, py::arg("dt") = 1e-3, py::arg("saturation") = true,
      py::arg("abort_on_singular") = true, py::arg("params") = py::none(), py::arg("gains") = py::none(),
      "Closed-loop circle tracking; returns arrays keyed by name.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"tiltrotor"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line front end in-process and returns its exit code.");
}
