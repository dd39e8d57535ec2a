#include "core/field_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace glx {

namespace {
constexpr char kMagic[8] = {'G', 'L', 'F', 'I', 'E', 'L', 'D', '1'};

struct Header {
  uint32_t kind = 0;
  uint32_t nx = 0, ny = 0;
  double x0 = 0, y0 = 0, h = 0;
  uint32_t layout = 0;
  uint64_t count = 0;
};

void write_header(std::ofstream& out, const Header& hd) {
  out.write(kMagic, 8);
  auto put = [&out](const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put(&hd.kind, 4);
  put(&hd.nx, 4);
  put(&hd.ny, 4);
  put(&hd.x0, 8);
  put(&hd.y0, 8);
  put(&hd.h, 8);
  put(&hd.layout, 4);
  put(&hd.count, 8);
}

Header read_header(std::ifstream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("field container: bad magic");
  }
  Header hd;
  auto get = [&in](void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  };
  get(&hd.kind, 4);
  get(&hd.nx, 4);
  get(&hd.ny, 4);
  get(&hd.x0, 8);
  get(&hd.y0, 8);
  get(&hd.h, 8);
  get(&hd.layout, 4);
  get(&hd.count, 8);
  if (!in) throw std::runtime_error("field container: truncated header");
  return hd;
}

void write_payload(std::ofstream& out, const double* p, uint64_t n) {
  out.write(reinterpret_cast<const char*>(p),
            static_cast<std::streamsize>(n * sizeof(double)));
}

void read_payload(std::ifstream& in, double* p, uint64_t n) {
  in.read(reinterpret_cast<char*>(p),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("field container: truncated payload");
}
}  // namespace

void save_real_field(const std::string& path, const Grid& g, const RVec& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  Header hd{static_cast<uint32_t>(FieldKind::RealCell),
            static_cast<uint32_t>(g.nx), static_cast<uint32_t>(g.ny),
            g.x0, g.y0, g.h, 0, static_cast<uint64_t>(f.size())};
  write_header(out, hd);
  write_payload(out, f.data(), f.size());
}

void save_complex_field(const std::string& path, const Grid& g, const CVec& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  Header hd{static_cast<uint32_t>(FieldKind::ComplexCell),
            static_cast<uint32_t>(g.nx), static_cast<uint32_t>(g.ny),
            g.x0, g.y0, g.h, 0, static_cast<uint64_t>(2 * u.size())};
  write_header(out, hd);
  write_payload(out, reinterpret_cast<const double*>(u.data()), 2 * u.size());
}

void save_gauge_field(const std::string& path, const Grid& g, const Gauge& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  Header hd{static_cast<uint32_t>(FieldKind::GaugeLinks),
            static_cast<uint32_t>(g.nx), static_cast<uint32_t>(g.ny),
            g.x0, g.y0, g.h, 1,
            static_cast<uint64_t>(a.ax.size() + a.ay.size())};
  write_header(out, hd);
  write_payload(out, a.ax.data(), a.ax.size());
  write_payload(out, a.ay.data(), a.ay.size());
}

LoadedField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Header hd = read_header(in);
  LoadedField lf;
  lf.kind = static_cast<FieldKind>(hd.kind);
  lf.grid.nx = static_cast<int>(hd.nx);
  lf.grid.ny = static_cast<int>(hd.ny);
  lf.grid.x0 = hd.x0;
  lf.grid.y0 = hd.y0;
  lf.grid.h = hd.h;
  const uint64_t cells = static_cast<uint64_t>(hd.nx) * hd.ny;
  switch (lf.kind) {
    case FieldKind::RealCell:
      if (hd.count != cells) throw std::runtime_error("field container: count mismatch");
      lf.real_data.resize(cells);
      read_payload(in, lf.real_data.data(), hd.count);
      break;
    case FieldKind::ComplexCell:
      if (hd.count != 2 * cells) throw std::runtime_error("field container: count mismatch");
      lf.cplx_data.resize(cells);
      read_payload(in, reinterpret_cast<double*>(lf.cplx_data.data()), hd.count);
      break;
    case FieldKind::GaugeLinks:
      if (hd.count != 2 * cells) throw std::runtime_error("field container: count mismatch");
      lf.gauge.ax.resize(cells);
      lf.gauge.ay.resize(cells);
      read_payload(in, lf.gauge.ax.data(), cells);
      read_payload(in, lf.gauge.ay.data(), cells);
      break;
    default:
      throw std::runtime_error("field container: unknown kind");
  }
  return lf;
}

void save_real_csv(const std::string& path, const Grid& g, const RVec& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "x,y,value\n";
  char buf[128];
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.xc(i), g.yc(j),
                    f[g.idx(i, j)]);
      out << buf;
    }
  }
}

void save_complex_csv(const std::string& path, const Grid& g, const CVec& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "x,y,re,im\n";
  char buf[160];
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Cplx z = u[g.idx(i, j)];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", g.xc(i),
                    g.yc(j), z.real(), z.imag());
      out << buf;
    }
  }
}

}  // namespace glx
