#pragma once

// Area irregularity of a pixelization: d_i = ln(A_i / A_mean) with A_mean
// the geometric mean, score = RMS(d).

#include <string>
#include <variant>
#include <vector>

#include "spherephd/vec3.hpp"

namespace spherephd {

struct SpherePhdRep {
  int subdivision = 3;
};
struct CubeMapRep {
  int face_size = 20;
};
struct ErpRep {
  int height = 40;
  int width = 80;
};
using Representation = std::variant<SpherePhdRep, CubeMapRep, ErpRep>;

std::string describe(const Representation& rep);

struct AreaVector {
  Representation rep;
  std::vector<double> areas;  // steradians, one per pixel
};

// Pixel order: SpherePHD by index, cubemap by (face, row, col), ERP by (row, col).
AreaVector effective_areas(const Representation& rep);
std::vector<Vec3> pixel_directions(const Representation& rep);

struct IrregularityResult {
  double mean_area = 0.0;
  std::vector<double> d;
  double score = 0.0;
};

IrregularityResult irregularity(const std::vector<double>& areas);
inline IrregularityResult irregularity(const AreaVector& av) { return irregularity(av.areas); }

struct Bin {
  double lower = 0.0;  // degrees
  double upper = 0.0;
  int count = 0;
  double mean_abs_d = 0.0;
  double max_abs_d = 0.0;
  double mean_d = 0.0;
};

struct IrregularityProfile {
  std::vector<Bin> latitude;   // south to north, uniform in degrees over [-90, 90]
  std::vector<Bin> longitude;  // uniform over [-180, 180)
};

IrregularityProfile binned_irregularity(const std::vector<double>& d, const std::vector<Vec3>& directions,
                                        int lat_bins = 36, int lon_bins = 36);

}  // namespace spherephd
