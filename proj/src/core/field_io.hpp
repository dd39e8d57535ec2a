#pragma once
// Binary field container and CSV export.
//
// Container layout (little-endian):
//   bytes 0..7   magic "GLFIELD1"
//   u32          kind: 0 = real scalar per cell, 1 = complex per cell
//                      (re,im interleaved), 2 = gauge links (all ax then ay)
//   u32 nx, u32 ny
//   f64 x0, f64 y0, f64 h
//   u32          layout tag: 0 = cell-centered row-major, 1 = link-resident
//   u64          payload count (number of f64 values that follow)
//   f64[count]   payload, row-major (j outer, i inner)

#include <string>

#include "core/grid.hpp"

namespace glx {

enum class FieldKind : uint32_t { RealCell = 0, ComplexCell = 1, GaugeLinks = 2 };

void save_real_field(const std::string& path, const Grid& g, const RVec& f);
void save_complex_field(const std::string& path, const Grid& g, const CVec& u);
void save_gauge_field(const std::string& path, const Grid& g, const Gauge& a);

struct LoadedField {
  FieldKind kind;
  Grid grid;
  RVec real_data;   // RealCell
  CVec cplx_data;   // ComplexCell
  Gauge gauge;      // GaugeLinks
};

LoadedField load_field(const std::string& path);

// CSV rows "x,y,value" (real) or "x,y,re,im" (complex); intended for small grids.
void save_real_csv(const std::string& path, const Grid& g, const RVec& f);
void save_complex_csv(const std::string& path, const Grid& g, const CVec& u);

}  // namespace glx
