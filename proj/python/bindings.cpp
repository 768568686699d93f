#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl_bind.h>

#include <sstream>

#include "fusesim/config.hpp"
#include "fusesim/engine.hpp"
#include "fusesim/metrics.hpp"
#include "fusesim/trace.hpp"

namespace py = pybind11;
using namespace fusesim;

PYBIND11_MAKE_OPAQUE(std::vector<fusesim::TraceRecord>)

namespace {

MixSpec mix_from(const py::dict &d) {
  MixSpec spec;
  for (const auto &[k, v] : d) apply_mix_key(spec, py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
  spec.validate();
  return spec;
}

SimConfig config_from(const std::string &preset, const py::dict &overrides, std::uint64_t seed) {
  SimConfig c = make_config(preset);
  c.seed = seed;
  for (const auto &[k, v] : overrides) {
    const std::string value = py::isinstance<py::bool_>(v) ? (v.cast<bool>() ? "true" : "false") : py::str(v).cast<std::string>();
    apply_override(c, py::str(k).cast<std::string>(), value);
  }
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_fusesim, m) {
  m.doc() = "Hybrid SRAM / STT-MRAM GPU L1D simulator";

  py::register_exception<MalformedLine>(m, "TraceParseError", PyExc_ValueError);

  py::enum_<Op>(m, "Op").value("Read", Op::Read).value("Write", Op::Write);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def(py::init([](Cycle cycle, std::uint32_t warp, std::uint32_t pc, std::uint32_t addr, bool write) {
             return TraceRecord{cycle, warp, pc, addr, write ? Op::Write : Op::Read};
           }),
           py::arg("cycle"), py::arg("warp_id"), py::arg("pc"), py::arg("addr"), py::arg("write") = false)
      .def_readwrite("cycle", &TraceRecord::cycle)
      .def_readwrite("warp_id", &TraceRecord::warp_id)
      .def_readwrite("pc", &TraceRecord::pc)
      .def_readwrite("addr", &TraceRecord::addr)
      .def_readwrite("op", &TraceRecord::op)
      .def_property_readonly("is_write", &TraceRecord::is_write)
      .def("__eq__", [](const TraceRecord &a, const TraceRecord &b) { return a == b; })
      .def("__repr__", [](const TraceRecord &r) { return "TraceRecord(" + format_record(r) + ")"; });

  py::bind_vector<Trace>(m, "Trace");

  m.def("presets", [] {
    std::vector<std::string> names;
    for (const auto p : all_presets()) names.emplace_back(to_string(p));
    return names;
  });

  m.def("parse_trace", [](const std::string &text) { return parse_trace_string(text); }, py::arg("text"));
  m.def("load_trace", [](const std::string &path) { return load_trace_file(path); }, py::arg("path"));
  m.def("format_trace", [](const Trace &t) {
    std::ostringstream ss;
    write_trace(ss, t);
    return ss.str();
  });
  m.def("generate", [](const py::dict &mix, std::uint64_t seed) { return generate_synthetic(mix_from(mix), seed); },
        py::arg("mix") = py::dict(), py::arg("seed") = 1);
  m.def("label_fractions", [](const Trace &t) {
    const auto f = label_fractions(label_trace(t));
    py::dict d;
    d["wm"] = f.wm;
    d["read_intensive"] = f.read_intensive;
    d["worm"] = f.worm;
    d["woro"] = f.woro;
    return d;
  });

  m.def("csv_columns", &csv_columns);

  m.def(
      "_run_json",
      [](const Trace &t, const std::string &preset, const py::dict &overrides, std::uint64_t seed, bool check) {
        SimConfig c = config_from(preset, overrides, seed);
        c.check_invariants = check;
        SimReport r;
        {
          py::gil_scoped_release release;
          r = run(t, c).report;
        }
        return to_json(r, -1);
      },
      py::arg("trace"), py::arg("preset"), py::arg("overrides"), py::arg("seed"), py::arg("check_invariants"));
}
