#include "spherephd/irregularity.hpp"

#include <cmath>
#include <numbers>

#include "spherephd/error.hpp"
#include "spherephd/indexing.hpp"
#include "spherephd/projection.hpp"

namespace spherephd {

namespace {

constexpr double kPi = std::numbers::pi;

struct ValidateRep {
  void operator()(const SpherePhdRep& r) const {
    if (r.subdivision < 0 || r.subdivision > kMaxSubdivision) throw ParameterError("subdivision out of range");
  }
  void operator()(const CubeMapRep& r) const {
    if (r.face_size < 1) throw ParameterError("cubemap face size must be positive");
  }
  void operator()(const ErpRep& r) const {
    if (r.height < 1 || r.width < 1) throw ParameterError("ERP size must be positive");
  }
};

}  // namespace

std::string describe(const Representation& rep) {
  struct V {
    std::string operator()(const SpherePhdRep& r) const { return "sphd(n=" + std::to_string(r.subdivision) + ")"; }
    std::string operator()(const CubeMapRep& r) const { return "cube(F=" + std::to_string(r.face_size) + ")"; }
    std::string operator()(const ErpRep& r) const {
      return "erp(" + std::to_string(r.height) + "x" + std::to_string(r.width) + ")";
    }
  };
  return std::visit(V{}, rep);
}

AreaVector effective_areas(const Representation& rep) {
  std::visit(ValidateRep{}, rep);
  AreaVector out{rep, {}};
  if (auto* s = std::get_if<SpherePhdRep>(&rep)) {
    auto t = TableCache::global().get(s->subdivision);
    out.areas.resize(t->mesh.pixel_count());
    for (PixelIndex p = 0; p < out.areas.size(); ++p) out.areas[p] = t->mesh.area(p);
  } else if (auto* c = std::get_if<CubeMapRep>(&rep)) {
    const int f = c->face_size;
    std::vector<double> face(std::size_t(f) * f);
    for (int r = 0; r < f; ++r)
      for (int col = 0; col < f; ++col) {
        double u0 = 2.0 * col / f - 1, u1 = 2.0 * (col + 1) / f - 1;
        double v1 = 1 - 2.0 * r / f, v0 = 1 - 2.0 * (r + 1) / f;
        face[std::size_t(r) * f + col] = gnomonic_rectangle_solid_angle(u0, u1, v0, v1);
      }
    for (int k = 0; k < 6; ++k) out.areas.insert(out.areas.end(), face.begin(), face.end());
  } else {
    const auto& e = std::get<ErpRep>(rep);
    out.areas.reserve(std::size_t(e.height) * e.width);
    for (int r = 0; r < e.height; ++r) {
      double top = kPi / 2 - kPi * r / e.height, bot = kPi / 2 - kPi * (r + 1) / e.height;
      double a = 2 * kPi / e.width * (std::sin(top) - std::sin(bot));
      out.areas.insert(out.areas.end(), e.width, a);
    }
  }
  return out;
}

std::vector<Vec3> pixel_directions(const Representation& rep) {
  std::visit(ValidateRep{}, rep);
  std::vector<Vec3> out;
  if (auto* s = std::get_if<SpherePhdRep>(&rep)) {
    auto t = TableCache::global().get(s->subdivision);
    out.reserve(t->mesh.pixel_count());
    for (PixelIndex p = 0; p < t->mesh.pixel_count(); ++p) out.push_back(t->mesh.centroid(p));
  } else if (auto* c = std::get_if<CubeMapRep>(&rep)) {
    for (int k = 0; k < 6; ++k)
      for (int r = 0; r < c->face_size; ++r)
        for (int col = 0; col < c->face_size; ++col) out.push_back(cube_direction(c->face_size, k, r, col));
  } else {
    const auto& e = std::get<ErpRep>(rep);
    for (int r = 0; r < e.height; ++r)
      for (int col = 0; col < e.width; ++col) out.push_back(erp_direction(e.height, e.width, r, col));
  }
  return out;
}

IrregularityResult irregularity(const std::vector<double>& areas) {
  if (areas.empty()) throw ParameterError("no areas");
  IrregularityResult res;
  std::vector<double> logs(areas.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (!(areas[i] > 0.0) || !std::isfinite(areas[i])) throw DomainError("areas must be positive and finite");
    logs[i] = std::log(areas[i]);
    sum += logs[i];
  }
  double mean_log = sum / areas.size();
  res.mean_area = std::exp(mean_log);
  res.d.resize(areas.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    res.d[i] = logs[i] - mean_log;
    sq += res.d[i] * res.d[i];
  }
  res.score = std::sqrt(sq / areas.size());
  return res;
}

IrregularityProfile binned_irregularity(const std::vector<double>& d, const std::vector<Vec3>& directions,
                                        int lat_bins, int lon_bins) {
  if (lat_bins < 1 || lon_bins < 1) throw ParameterError("bin count must be positive");
  if (d.size() != directions.size()) throw ShapeError("d and directions differ in length");
  IrregularityProfile prof;
  prof.latitude.resize(lat_bins);
  prof.longitude.resize(lon_bins);
  for (int b = 0; b < lat_bins; ++b) prof.latitude[b] = {-90.0 + 180.0 * b / lat_bins, -90.0 + 180.0 * (b + 1) / lat_bins};
  for (int b = 0; b < lon_bins; ++b)
    prof.longitude[b] = {-180.0 + 360.0 * b / lon_bins, -180.0 + 360.0 * (b + 1) / lon_bins};
  auto add = [](Bin& bin, double v) {
    ++bin.count;
    bin.mean_abs_d += std::abs(v);
    bin.mean_d += v;
    bin.max_abs_d = std::max(bin.max_abs_d, std::abs(v));
  };
  for (std::size_t i = 0; i < d.size(); ++i) {
    UnitVec u(directions[i]);
    double lat = u.latitude() * 180.0 / kPi, lon = u.longitude() * 180.0 / kPi;
    int lb = std::clamp(static_cast<int>(std::floor((lat + 90.0) / 180.0 * lat_bins)), 0, lat_bins - 1);
    int ob = std::clamp(static_cast<int>(std::floor((lon + 180.0) / 360.0 * lon_bins)), 0, lon_bins - 1);
    add(prof.latitude[lb], d[i]);
    add(prof.longitude[ob], d[i]);
  }
  for (auto* bins : {&prof.latitude, &prof.longitude})
    for (Bin& b : *bins)
      if (b.count > 0) {
        b.mean_abs_d /= b.count;
        b.mean_d /= b.count;
      }
  return prof;
}

}  // namespace spherephd
