#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "spherephd/cli.hpp"
#include "spherephd/error.hpp"
#include "spherephd/formats.hpp"
#include "spherephd/irregularity.hpp"
#include "spherephd/projection.hpp"

namespace py = pybind11;
using namespace spherephd;

namespace {

using Doubles = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class T>
py::array_t<T> array_2d(const std::vector<T>& v, std::size_t rows, std::size_t cols) {
  py::array_t<T> a({rows, cols});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::array_t<double> vec3_array(std::size_t n, auto&& get) {
  py::array_t<double> a({n, std::size_t(3)});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 v = get(i);
    m(i, 0) = v.x;
    m(i, 1) = v.y;
    m(i, 2) = v.z;
  }
  return a;
}

Rotation rotation_from(const std::optional<Doubles>& r) {
  if (!r) return {};
  if (r->ndim() != 2 || r->shape(0) != 3 || r->shape(1) != 3) throw ShapeError("rotation must be a 3x3 array");
  std::array<double, 9> m;
  std::copy(r->data(), r->data() + 9, m.begin());
  return Rotation(m);
}

py::array_t<double> rotation_array(const Rotation& r) {
  py::array_t<double> a({3, 3});
  std::copy(r.matrix().begin(), r.matrix().end(), a.mutable_data());
  return a;
}

Representation representation(const std::string& kind, int n, int face_size, int height, int width) {
  if (kind == "sphd") return SpherePhdRep{n};
  if (kind == "cube") return CubeMapRep{face_size};
  if (kind == "erp") return ErpRep{height, width};
  throw ParameterError("representation must be sphd, cube or erp");
}

py::array_t<double> sphd_array(const SpherePhdImage& img) {
  return array_2d(img.data, std::size_t(img.channels), img.pixels());
}

SpherePhdImage sphd_from(const Doubles& a) {
  if (a.ndim() != 1 && a.ndim() != 2) throw ShapeError("SpherePHD arrays are (pixels,) or (channels, pixels)");
  std::size_t c = a.ndim() == 2 ? a.shape(0) : 1, p = a.shape(a.ndim() - 1);
  int n = -1;
  for (int k = 0; k <= kMaxSubdivision; ++k)
    if (pixel_count(k) == p) n = k;
  if (n < 0) throw ShapeError("pixel count is not 20 * 4^n");
  SpherePhdImage img(n, int(c));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

}  // namespace

PYBIND11_MODULE(_spherephd, m) {
  m.doc() = "Icosahedral spherical images: mesh, tables, projections, irregularity and formats";

  static py::exception<Error> base(m, "SpherePhdError", PyExc_RuntimeError);
  static py::exception<FormatError> format(m, "FormatError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const FormatError& e) {
      py::set_error(format, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("pixel_count", [](int n) { return pixel_count(n); });
  m.def("vertex_count", [](int n) { return vertex_count(n); });

  py::class_<SphereMesh>(m, "Mesh")
      .def(py::init([](int n) { return TableCache::global().get(n)->mesh; }), py::arg("n"))
      .def_property_readonly("subdivision", &SphereMesh::subdivision)
      .def_property_readonly("pixel_count", &SphereMesh::pixel_count)
      .def_property_readonly("vertex_count", &SphereMesh::vertex_count)
      .def_property_readonly("edge_count", &SphereMesh::edge_count)
      .def("vertices", [](const SphereMesh& s) { return vec3_array(s.vertex_count(), [&](std::size_t i) { return s.vertices()[i]; }); })
      .def("faces",
           [](const SphereMesh& s) {
             py::array_t<std::uint32_t> a({s.pixel_count(), std::size_t(3)});
             auto f = s.faces();
             std::copy(f.front().data(), f.front().data() + 3 * f.size(), a.mutable_data());
             return a;
           })
      .def("centroids", [](const SphereMesh& s) { return vec3_array(s.pixel_count(), [&](std::size_t i) { return s.centroid(PixelIndex(i)).vec(); }); })
      .def("areas",
           [](const SphereMesh& s) {
             py::array_t<double> a(s.pixel_count());
             for (std::size_t i = 0; i < s.pixel_count(); ++i) a.mutable_data()[i] = s.area(PixelIndex(i));
             return a;
           })
      .def("up_mask",
           [](const SphereMesh& s) {
             py::array_t<bool> a(s.pixel_count());
             for (std::size_t i = 0; i < s.pixel_count(); ++i) a.mutable_data()[i] = s.orientation(PixelIndex(i)) == Orientation::Up;
             return a;
           })
      .def("locate",
           [](const SphereMesh& s, const Doubles& dirs) {
             if (dirs.ndim() == 1 && dirs.shape(0) == 3) return py::cast(s.locate({dirs.at(0), dirs.at(1), dirs.at(2)}));
             if (dirs.ndim() != 2 || dirs.shape(1) != 3) throw ShapeError("directions must be (3,) or (M, 3)");
             py::array_t<std::uint32_t> out(dirs.shape(0));
             auto d = dirs.unchecked<2>();
             for (py::ssize_t i = 0; i < dirs.shape(0); ++i) out.mutable_data()[i] = s.locate({d(i, 0), d(i, 1), d(i, 2)});
             return py::object(out);
           })
      .def("__repr__", [](const SphereMesh& s) { return "<Mesh n=" + std::to_string(s.subdivision()) + ">"; });

  m.def("conv_table", [](int n) {
    auto t = TableCache::global().get(n);
    if (!t->conv) throw ConfigurationError("no convolution table at n = 0");
    return array_2d(t->conv->taps, t->conv->rows(), kConvArity);
  });
  m.def("pool_table", [](int n) {
    auto t = TableCache::global().get(n);
    if (!t->pool) throw ConfigurationError("no pooling table at n = 0");
    return array_2d(t->pool->children, t->pool->rows(), kPoolArity);
  });
  m.def("verify_tables", [](int n) {
    auto t = TableCache::global().get(n);
    if (!t->conv) throw ConfigurationError("no tables at n = 0");
    UnpoolTable un = build_unpool_table(n);
    std::map<std::string, bool> out;
    for (const auto& c : verify_tables(t->mesh, *t->conv, *t->pool, &un).checks) out[c.name] = c.passed;
    return out;
  });

  m.def(
      "effective_areas",
      [](const std::string& kind, int n, int face_size, int height, int width) {
        auto v = effective_areas(representation(kind, n, face_size, height, width)).areas;
        return py::array_t<double>(v.size(), v.data());
      },
      py::arg("kind"), py::arg("n") = 3, py::arg("face_size") = 20, py::arg("height") = 40, py::arg("width") = 80);
  m.def("irregularity", [](const std::vector<double>& areas) {
    auto r = irregularity(areas);
    return py::make_tuple(r.mean_area, py::array_t<double>(r.d.size(), r.d.data()), r.score);
  });

  m.def("random_rotation", [](std::uint64_t seed) { return rotation_array(random_rotation(seed)); });
  m.def(
      "erp_to_sphd",
      [](const Doubles& erp, int n, std::optional<Doubles> rotation) {
        if (erp.ndim() != 2 && erp.ndim() != 3) throw ShapeError("ERP arrays are (H, W) or (H, W, C)");
        ErpImage e(int(erp.shape(0)), int(erp.shape(1)), erp.ndim() == 3 ? int(erp.shape(2)) : 1);
        std::copy(erp.data(), erp.data() + erp.size(), e.data.begin());
        return sphd_array(erp_to_sphd(e, n, rotation_from(rotation)));
      },
      py::arg("erp"), py::arg("n"), py::arg("rotation") = py::none());
  m.def(
      "sphd_to_erp",
      [](const Doubles& img, int height, int width, int supersample) {
        ErpImage e = sphd_to_erp(sphd_from(img), height, width, supersample);
        py::array_t<double> a({std::size_t(e.height), std::size_t(e.width), std::size_t(e.channels)});
        std::copy(e.data.begin(), e.data.end(), a.mutable_data());
        return a;
      },
      py::arg("image"), py::arg("height"), py::arg("width"), py::arg("supersample") = 1);

  m.def("read_sphi", [](const std::filesystem::path& p) {
    auto r = read_sphi(p);
    return py::make_tuple(sphd_array(r.image), r.dtype == Dtype::U8 ? "u8" : "f32");
  });
  m.def(
      "write_sphi",
      [](const std::filesystem::path& p, const Doubles& img, const std::string& dtype) {
        if (dtype != "f32" && dtype != "u8") throw ParameterError("dtype must be f32 or u8");
        write_sphi(p, sphd_from(img), dtype == "u8" ? Dtype::U8 : Dtype::F32);
      },
      py::arg("path"), py::arg("image"), py::arg("dtype") = "f32");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release nogil;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
