#pragma once

// Transverse light modes for the three qudit bases.
//
// Z-basis state m is the Laguerre-Gauss vortex LG_{0,ℓ} with ℓ = m − ⌊d/2⌋, taken at the
// waist plane with unit waist:
//
//   LG_{0,ℓ}(r, φ) = sqrt(2^{|ℓ|+1} / (π |ℓ|!)) · r^{|ℓ|} e^{−r²} e^{iℓφ}
//
// which has unit L2 norm over the plane. X and XZ states are the superpositions
// Σ_m c_m LG_m with c the basis vector in Z coordinates.

#include <qkdrates/errors.hpp>
#include <qkdrates/image.hpp>
#include <qkdrates/linalg.hpp>
#include <qkdrates/parallel.hpp>
#include <qkdrates/pauli_mub.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

namespace qkdrates {

/// W×H samples at pixel centres covering [−extent, extent]² in waist units.
struct GridSpec {
  int width = 512;
  int height = 512;
  double extent = 5.0;

  double dx() const { return 2.0 * extent / width; }
  double dy() const { return 2.0 * extent / height; }
  double x(int i) const { return -extent + (i + 0.5) * dx(); }
  double y(int row) const { return extent - (row + 0.5) * dy(); }  // row 0 at the top
};

inline void validate(const GridSpec& g) {
  detail::require(g.width >= 2 && g.height >= 2, "grid must be at least 2x2");
  detail::require(g.width <= 16384 && g.height <= 16384, "grid is too large");
  detail::require(g.extent > 0.0 && std::isfinite(g.extent), "extent must be positive");
}

struct ModeField {
  GridSpec grid;
  int d = 0;
  Basis basis = Basis::Z;
  int index = 0;
  std::vector<cplx> samples;  // row-major, row 0 at the top

  const cplx& at(int i, int row) const { return samples[static_cast<std::size_t>(row) * grid.width + i]; }
};

/// OAM value carried by Z-basis state m.
inline int oam_of(int d, int m) { return m - d / 2; }

inline ModeField vortex_mode(int d, int m, const GridSpec& grid) {
  validate(grid);
  detail::require(d >= 2, "d must be at least 2");
  detail::require(m >= 0 && m < d, "mode index must lie in [0, d-1]");
  const int ell = oam_of(d, m);
  const int a = std::abs(ell);
  const double c = std::sqrt(std::pow(2.0, a + 1) / (std::numbers::pi * std::tgamma(a + 1.0)));

  ModeField f{grid, d, Basis::Z, m, std::vector<cplx>(static_cast<std::size_t>(grid.width) * grid.height)};
  for (int row = 0; row < grid.height; ++row) {
    const double y = grid.y(row);
    for (int i = 0; i < grid.width; ++i) {
      const double x = grid.x(i);
      const double r2 = x * x + y * y;
      const double amp = c * std::pow(std::sqrt(r2), a) * std::exp(-r2);
      f.samples[static_cast<std::size_t>(row) * grid.width + i] = std::polar(amp, ell * std::atan2(y, x));
    }
  }
  return f;
}

/// Σ_k c_k · modes[k] for precomputed vortex fields.
inline ModeField combine_modes(const std::vector<ModeField>& vortices, const CVector& coeffs, Basis basis, int j) {
  detail::require(!vortices.empty() && static_cast<Eigen::Index>(vortices.size()) == coeffs.size(),
                  "coefficient count does not match the number of modes");
  ModeField f{vortices[0].grid, static_cast<int>(vortices.size()), basis, j,
              std::vector<cplx>(vortices[0].samples.size(), cplx(0.0))};
  for (std::size_t m = 0; m < vortices.size(); ++m) {
    const cplx cm = coeffs[static_cast<Eigen::Index>(m)];
    for (std::size_t p = 0; p < f.samples.size(); ++p) f.samples[p] += cm * vortices[m].samples[p];
  }
  return f;
}

/// Basis vector j in Z coordinates, rotated so its first largest entry is real positive.
/// Any global phase of the input therefore yields the same field.
inline CVector canonical_coefficients(const CVector& v) {
  CVector c = v;
  detail::fix_global_phase(c);
  return c;
}

inline ModeField superposition_mode(int d, Basis basis, int j, const GridSpec& grid) {
  detail::require(basis == Basis::X || basis == Basis::XZ, "superposition modes are defined for the X and XZ bases");
  detail::require(j >= 0 && j < d, "basis index must lie in [0, d-1]");
  const MubBasis mb = mub_eigenbasis(d, basis);
  std::vector<ModeField> vortices;
  for (int m = 0; m < d; ++m) vortices.push_back(vortex_mode(d, m, grid));
  return combine_modes(vortices, canonical_coefficients(mb.vectors.col(j)), basis, j);
}

inline ModeField mub_mode(int d, Basis basis, int j, const GridSpec& grid) {
  return basis == Basis::Z ? vortex_mode(d, j, grid) : superposition_mode(d, basis, j, grid);
}

/// Riemann-sum ⟨a|b⟩ over the grid.
inline cplx grid_inner_product(const ModeField& a, const ModeField& b) {
  detail::require(a.samples.size() == b.samples.size(), "fields live on different grids");
  cplx s = 0.0;
  for (std::size_t p = 0; p < a.samples.size(); ++p) s += std::conj(a.samples[p]) * b.samples[p];
  return s * a.grid.dx() * a.grid.dy();
}

inline double grid_norm(const ModeField& f) { return std::sqrt(std::real(grid_inner_product(f, f))); }

inline std::vector<double> intensity(const ModeField& f) {
  std::vector<double> out(f.samples.size());
  std::transform(f.samples.begin(), f.samples.end(), out.begin(), [](cplx z) { return std::norm(z); });
  return out;
}

enum class RenderKind { intensity, phase };

inline std::string_view to_string(RenderKind k) { return k == RenderKind::intensity ? "intensity" : "phase"; }

/// Intensity scaled by its maximum through the palette, or arg(field) in [0, 2π) on the hue wheel.
inline Image render(const ModeField& f, RenderKind kind, Palette palette = Palette::viridis) {
  const int w = f.grid.width, h = f.grid.height;
  if (kind == RenderKind::intensity) {
    const std::vector<double> I = intensity(f);
    const double peak = *std::max_element(I.begin(), I.end());
    Image img(w, h, palette == Palette::gray ? 1 : 3);
    for (int row = 0; row < h; ++row)
      for (int i = 0; i < w; ++i) {
        const double t = peak > 0 ? I[static_cast<std::size_t>(row) * w + i] / peak : 0.0;
        std::uint8_t* px = img.at(i, row);
        if (img.channels == 1) {
          px[0] = detail::to_byte(t);
        } else {
          const Rgb c = viridis(t);
          std::copy(c.begin(), c.end(), px);
        }
      }
    return img;
  }
  Image img(w, h, 3);
  for (int row = 0; row < h; ++row)
    for (int i = 0; i < w; ++i) {
      const Rgb c = phase_colour(std::arg(f.at(i, row)));
      std::copy(c.begin(), c.end(), img.at(i, row));
    }
  return img;
}

inline void render(const ModeField& f, RenderKind kind, const std::filesystem::path& path,
                   ImageFormat format = ImageFormat::png, Palette palette = Palette::viridis) {
  write_image(render(f, kind, palette), path, format);
}

/// Intensity at the pixels nearest the beam axis relative to the peak intensity.
inline double central_intensity_ratio(const ModeField& f) {
  const std::vector<double> I = intensity(f);
  const double peak = *std::max_element(I.begin(), I.end());
  const int w = f.grid.width, h = f.grid.height;
  double centre = 0.0;
  for (int row : {(h - 1) / 2, h / 2})
    for (int i : {(w - 1) / 2, w / 2}) centre = std::max(centre, I[static_cast<std::size_t>(row) * w + i]);
  return peak > 0 ? centre / peak : 0.0;
}

/// Width (radians) of the narrowest azimuthal sector holding more than `fraction` of the
/// total intensity, using `bins` equal angular bins.
inline double min_sector_span(const ModeField& f, double fraction = 0.5, int bins = 720) {
  detail::require(fraction > 0.0 && fraction < 1.0, "fraction must lie in (0, 1)");
  std::vector<double> hist(bins, 0.0);
  double total = 0.0;
  for (int row = 0; row < f.grid.height; ++row)
    for (int i = 0; i < f.grid.width; ++i) {
      const double v = std::norm(f.at(i, row));
      double phi = std::atan2(f.grid.y(row), f.grid.x(i));
      if (phi < 0) phi += kTwoPi;
      hist[std::min(bins - 1, static_cast<int>(phi / kTwoPi * bins))] += v;
      total += v;
    }
  for (int width = 1; width <= bins; ++width) {
    double window = 0.0;
    for (int k = 0; k < width; ++k) window += hist[k];
    for (int start = 0; start < bins; ++start) {
      if (window > fraction * total) return kTwoPi * width / bins;
      window += hist[(start + width) % bins] - hist[start];
    }
  }
  return kTwoPi;
}

struct SheetOptions {
  GridSpec grid;
  int tile = 128;
  ImageFormat format = ImageFormat::png;
  Palette palette = Palette::viridis;
  unsigned threads = 1;
};

struct SheetReport {
  int d = 0;
  int tiles = 0;
  std::vector<std::filesystem::path> files;
  std::filesystem::path montage;
};

/// Renders every mode of the Z, X and XZ bases and a montage with one row per index j and
/// columns Z/X/XZ, each as an intensity and a phase tile.
inline SheetReport render_mub_sheet(int d, const std::filesystem::path& out_dir, const SheetOptions& opt = {}) {
  detail::require(d >= 2, "d must be at least 2");
  detail::require(opt.tile >= 8 && opt.tile <= 4096, "tile size must lie in [8, 4096]");
  validate(opt.grid);

  std::vector<MubBasis> bases;
  for (Basis b : kAllBases) bases.push_back(mub_eigenbasis(d, b));  // degeneracy surfaces here

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ModeField> vortices(d);
  parallel_for(static_cast<std::size_t>(d), opt.threads, [&](std::size_t m) {
    vortices[m] = vortex_mode(d, static_cast<int>(m), opt.grid);
  });

  const int cols = 2 * static_cast<int>(kAllBases.size());
  const int gap = 2;
  Image montage(cols * opt.tile + (cols + 1) * gap, d * opt.tile + (d + 1) * gap, 3, 255);
  SheetReport rep{d, 0, std::vector<std::filesystem::path>(static_cast<std::size_t>(cols) * d), {}};
  std::mutex montage_mutex;

  parallel_for(kAllBases.size() * static_cast<std::size_t>(d), opt.threads, [&](std::size_t job) {
    const std::size_t bi = job / d;
    const int j = static_cast<int>(job % d);
    const Basis b = kAllBases[bi];
    const ModeField f = b == Basis::Z ? vortices[j] : combine_modes(vortices, canonical_coefficients(bases[bi].vectors.col(j)), b, j);
    for (RenderKind kind : {RenderKind::intensity, RenderKind::phase}) {
      const Image img = render(f, kind, opt.palette);
      const int col = 2 * static_cast<int>(bi) + (kind == RenderKind::phase ? 1 : 0);
      const auto path = out_dir / (std::string(to_string(b)) + "_" + std::to_string(j) + "_" +
                                   std::string(to_string(kind)) + std::string(file_extension(opt.format, img.channels)));
      write_image(img, path, opt.format);
      const Image small = resample(img, opt.tile, opt.tile);
      std::lock_guard lock(montage_mutex);
      blit(montage, small, gap + col * (opt.tile + gap), gap + j * (opt.tile + gap));
      rep.files[static_cast<std::size_t>(j) * cols + col] = path;
      ++rep.tiles;
    }
  });

  rep.montage = out_dir / (std::string("montage") + std::string(file_extension(opt.format, 3)));
  write_image(montage, rep.montage, opt.format);
  return rep;
}

}  // namespace qkdrates
