#include <sstream>

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "planecast/analytics.hpp"
#include "planecast/geometry.hpp"
#include "planecast/orientation_filter.hpp"
#include "planecast/session.hpp"
#include "planecast/sim.hpp"
#include "planecast/task.hpp"
#include "planecast/wire.hpp"

namespace py = pybind11;
using namespace planecast;

namespace {

std::string repr(const Vec3& v) {
  std::ostringstream s;
  s << "Vec3(" << v.x << ", " << v.y << ", " << v.z << ")";
  return s.str();
}

std::string repr(const Quat& q) {
  std::ostringstream s;
  s << "Quat(" << q.w << ", " << q.x << ", " << q.y << ", " << q.z << ")";
  return s.str();
}

void bind_math(py::module_& m) {
  py::class_<Vec3>(m, "Vec3")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * double())
      .def(py::self == py::self)
      .def("norm", [](const Vec3& v) { return norm(v); })
      .def("__repr__", [](const Vec3& v) { return repr(v); })
      .def("to_tuple", [](const Vec3& v) { return py::make_tuple(v.x, v.y, v.z); });

  py::class_<Quat>(m, "Quat")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("w"), py::arg("x"), py::arg("y"),
           py::arg("z"))
      .def_readwrite("w", &Quat::w)
      .def_readwrite("x", &Quat::x)
      .def_readwrite("y", &Quat::y)
      .def_readwrite("z", &Quat::z)
      .def(py::self == py::self)
      .def("__mul__", [](const Quat& a, const Quat& b) { return a * b; })
      .def("norm", [](const Quat& q) { return norm(q); })
      .def("rotate", [](const Quat& q, const Vec3& v) { return rotate(q, v); })
      .def_static("identity", &Quat::identity)
      .def_static("from_axis_angle", &Quat::from_axis_angle, py::arg("axis"),
                  py::arg("angle_rad"))
      .def("__repr__", [](const Quat& q) { return repr(q); });
}

void bind_geometry(py::module_& m) {
  py::enum_<TechniqueMode>(m, "TechniqueMode")
      .value("PivotPC", TechniqueMode::PivotPC)
      .value("FreePC", TechniqueMode::FreePC);

  py::class_<Plane>(m, "Plane")
      .def(py::init<>())
      .def_readwrite("pivot", &Plane::pivot)
      .def_readwrite("e1", &Plane::e1)
      .def_readwrite("e2", &Plane::e2)
      .def("normal", &Plane::normal);

  py::class_<PlanecastState>(m, "PlanecastState")
      .def(py::init<>())
      .def_readwrite("mode", &PlanecastState::mode)
      .def_readwrite("plane", &PlanecastState::plane)
      .def_readwrite("cursor", &PlanecastState::cursor)
      .def_property(
          "uv", [](const PlanecastState& s) { return py::make_tuple(s.uv.u, s.uv.v); },
          [](PlanecastState& s, std::pair<double, double> uv) { s.uv = {uv.first, uv.second}; })
      .def_readwrite("gain", &PlanecastState::gain)
      .def(py::self == py::self);

  py::register_exception<InvalidOrientation>(m, "InvalidOrientation", PyExc_ValueError);

  m.def("device_to_plane_basis", [](const Quat& q) {
    const PlaneBasis b = device_to_plane_basis(q);
    return py::make_tuple(b.e1, b.e2);
  });
  m.def("make_state", &make_state, py::arg("mode"), py::arg("gain"));
  m.def("apply_rotation", &apply_rotation, py::arg("state"), py::arg("q"));
  m.def("apply_touch", &apply_touch, py::arg("state"), py::arg("du_px"), py::arg("dv_px"));
  m.def("rotation_sensitivity", &rotation_sensitivity, py::arg("state"));
  m.def("default_gain", &default_gain, py::arg("screen_w_px"));
}

void bind_filter(py::module_& m) {
  py::class_<OrientationFilter>(m, "OrientationFilter")
      .def(py::init<std::size_t>(), py::arg("window") = 30)
      .def(
          "push",
          [](OrientationFilter& f, std::int64_t t, const Quat& q) {
            const FilterOutput out = f.push({t, q});
            return py::make_tuple(out.q, out.degenerate);
          },
          py::arg("t_ms"), py::arg("q"))
      .def("calibrate", &OrientationFilter::calibrate, py::arg("reference"))
      .def("relative", &OrientationFilter::relative, py::arg("q"))
      .def_property_readonly("size", &OrientationFilter::size)
      .def_property_readonly("window", &OrientationFilter::window);

  m.def("angular_distance_deg", &angular_distance_deg, py::arg("a"), py::arg("b"));
  m.def("mt_threshold_crossed", &mt_threshold_crossed, py::arg("start"), py::arg("now"),
        py::arg("threshold_deg") = 3.6);
}

void bind_wire(py::module_& m) {
  auto w = m.def_submodule("wire", "Newline-delimited JSON records");

  py::enum_<wire::TouchPhase>(w, "TouchPhase")
      .value("Down", wire::TouchPhase::Down)
      .value("Move", wire::TouchPhase::Move)
      .value("Up", wire::TouchPhase::Up);
  py::enum_<Condition>(m, "Condition")
      .value("Speed", Condition::Speed)
      .value("Accuracy", Condition::Accuracy);

  py::class_<wire::Hello>(w, "Hello")
      .def(py::init<std::string, int, int>(), py::arg("device_id"), py::arg("screen_w_px"),
           py::arg("screen_h_px"))
      .def_readwrite("device_id", &wire::Hello::device_id)
      .def_readwrite("screen_w_px", &wire::Hello::screen_w_px)
      .def_readwrite("screen_h_px", &wire::Hello::screen_h_px)
      .def(py::self == py::self);
  py::class_<wire::Orientation>(w, "Orientation")
      .def(py::init<std::int64_t, Quat>(), py::arg("t"), py::arg("q"))
      .def_readwrite("t", &wire::Orientation::t)
      .def_readwrite("q", &wire::Orientation::q)
      .def(py::self == py::self);
  py::class_<wire::Touch>(w, "Touch")
      .def(py::init<std::int64_t, wire::TouchPhase, double, double>(), py::arg("t"),
           py::arg("phase"), py::arg("x_px"), py::arg("y_px"))
      .def_readwrite("t", &wire::Touch::t)
      .def_readwrite("phase", &wire::Touch::phase)
      .def_readwrite("x_px", &wire::Touch::x_px)
      .def_readwrite("y_px", &wire::Touch::y_px)
      .def(py::self == py::self);
  py::class_<wire::Footswitch>(w, "Footswitch")
      .def(py::init<std::int64_t>(), py::arg("t"))
      .def_readwrite("t", &wire::Footswitch::t)
      .def(py::self == py::self);
  py::class_<wire::Calibrate>(w, "Calibrate")
      .def(py::init<std::int64_t>(), py::arg("t"))
      .def_readwrite("t", &wire::Calibrate::t)
      .def(py::self == py::self);
  py::class_<wire::TrialBegin>(w, "TrialBegin")
      .def(py::init<>())
      .def_readwrite("t", &wire::TrialBegin::t)
      .def_readwrite("trial_id", &wire::TrialBegin::trial_id)
      .def_readwrite("technique", &wire::TrialBegin::technique)
      .def_readwrite("condition", &wire::TrialBegin::condition)
      .def_readwrite("target", &wire::TrialBegin::target)
      .def_readwrite("radius_cm", &wire::TrialBegin::radius_cm)
      .def(py::self == py::self);
  py::class_<wire::TrialEnd>(w, "TrialEnd")
      .def(py::init<>())
      .def_readwrite("t", &wire::TrialEnd::t)
      .def_readwrite("trial_id", &wire::TrialEnd::trial_id)
      .def_readwrite("mt_ms", &wire::TrialEnd::mt_ms)
      .def_readwrite("d_cm", &wire::TrialEnd::d_cm)
      .def_readwrite("t_px", &wire::TrialEnd::t_px)
      .def(py::self == py::self);
  py::class_<wire::StateSnapshot>(w, "StateSnapshot")
      .def(py::init<>())
      .def_readwrite("t", &wire::StateSnapshot::t)
      .def_readwrite("cursor", &wire::StateSnapshot::cursor)
      .def_readwrite("pivot", &wire::StateSnapshot::pivot)
      .def_readwrite("e1", &wire::StateSnapshot::e1)
      .def_readwrite("e2", &wire::StateSnapshot::e2)
      .def_readwrite("target", &wire::StateSnapshot::target)
      .def_readwrite("matched", &wire::StateSnapshot::matched)
      .def_readwrite("phase", &wire::StateSnapshot::phase)
      .def(py::self == py::self);

  py::register_exception<wire::ProtocolError>(w, "ProtocolError", PyExc_ValueError);
  py::register_exception<wire::EncodeError>(w, "EncodeError", PyExc_ValueError);

  w.def("encode", &wire::encode, py::arg("message"));
  w.def("decode", [](const std::string& line) { return wire::decode(line); }, py::arg("line"));
}

void bind_task(py::module_& m) {
  py::class_<TrialSpec>(m, "TrialSpec")
      .def(py::init<>())
      .def_readwrite("position_idx", &TrialSpec::position_idx)
      .def_readwrite("radius_cm", &TrialSpec::radius_cm)
      .def_readwrite("technique", &TrialSpec::technique)
      .def_readwrite("condition", &TrialSpec::condition)
      .def(py::self == py::self);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def(py::init<>())
      .def_readwrite("trial_id", &TrialRecord::trial_id)
      .def_readwrite("spec", &TrialRecord::spec)
      .def_readwrite("mt_ms", &TrialRecord::mt_ms)
      .def_readwrite("d_cm", &TrialRecord::d_cm)
      .def_readwrite("t_px", &TrialRecord::t_px)
      .def_readwrite("started_at_ms", &TrialRecord::started_at_ms)
      .def_readwrite("ended_at_ms", &TrialRecord::ended_at_ms)
      .def(py::self == py::self);

  py::class_<Aabb>(m, "Aabb")
      .def(py::init<Vec3, Vec3>(), py::arg("center"), py::arg("half_extents"))
      .def_readwrite("center", &Aabb::center)
      .def_readwrite("half_extents", &Aabb::half_extents);

  m.def("target_position", &target_position, py::arg("idx"), py::arg("radius_cm"));
  m.def("target_direction", &target_direction, py::arg("idx"));
  m.def(
      "make_session_plan",
      [](std::uint64_t seed, const std::string& order) {
        return make_session_plan(seed, technique_order_from_string(order));
      },
      py::arg("seed"), py::arg("order") = "pivot-first");
  m.def("aabb_intersect", &aabb_intersect, py::arg("a"), py::arg("b"));
}

void bind_session(py::module_& m) {
  py::class_<Session>(m, "Session")
      .def(py::init([](std::uint64_t seed, const std::string& order, std::optional<double> gain,
                       std::size_t filter_window) {
             SessionConfig cfg;
             cfg.seed = seed;
             cfg.order = technique_order_from_string(order);
             cfg.gain = gain;
             cfg.filter.window = filter_window;
             return Session(cfg);
           }),
           py::arg("seed") = 1, py::arg("order") = "pivot-first", py::arg("gain") = py::none(),
           py::arg("filter_window") = 30)
      .def(
          "ingest_line",
          [](Session& s, ConnectionId conn, const std::string& line, std::int64_t host_ms) {
            const IngestResult r = s.ingest_line(conn, line, host_ms);
            std::vector<std::string> out;
            for (const auto& msg : r.outbound) out.push_back(wire::encode(msg));
            py::object err = py::none();
            if (r.error) err = py::str(r.error->what());
            return py::make_tuple(out, err, r.records);
          },
          py::arg("conn"), py::arg("line"), py::arg("host_ms"),
          "Returns (outbound record lines, error text or None, completed TrialRecords).")
      .def("snapshot", &Session::snapshot, py::arg("t") = 0)
      .def_property_readonly("phase",
                             [](const Session& s) { return std::string(to_string(s.machine().phase())); })
      .def_property_readonly("gain", &Session::gain)
      .def_property_readonly("records", &Session::records);
}

void bind_analytics_and_sim(py::module_& m) {
  py::class_<analytics::AnovaResult>(m, "AnovaResult")
      .def_readonly("f", &analytics::AnovaResult::f)
      .def_readonly("df1", &analytics::AnovaResult::df1)
      .def_readonly("df2", &analytics::AnovaResult::df2)
      .def_readonly("p", &analytics::AnovaResult::p);
  m.def("rm_anova_oneway", &analytics::rm_anova_oneway, py::arg("matrix"));
  m.def("f_cdf", &analytics::f_cdf, py::arg("x"), py::arg("df1"), py::arg("df2"));

  m.def(
      "run_headless",
      [](std::uint64_t seed, const std::string& technique) {
        sim::HeadlessOptions opts;
        opts.session.seed = seed;
        opts.session.order = order_starting_with(technique_from_string(technique));
        const auto plan = make_session_plan(seed, opts.session.order);
        return sim::run_headless(plan, opts).records;
      },
      py::arg("seed") = 1, py::arg("technique") = "pivot",
      "Plays a full 96-trial session with the synthetic user; returns the TrialRecords.");
}

}  // namespace

PYBIND11_MODULE(_planecast, m) {
  m.doc() = "Plane-Casting 3D cursor kinematics, docking-task harness and statistics";
  bind_math(m);
  bind_geometry(m);
  bind_filter(m);
  bind_wire(m);
  bind_task(m);
  bind_session(m);
  bind_analytics_and_sim(m);
}
