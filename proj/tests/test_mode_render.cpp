#include <qkdrates/mode_render.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace qkdrates;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("QKD_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "qkdrates_tests";
  dir /= name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Phase samples of the field along a centred circle, by nearest pixel.
std::vector<double> phases_on_circle(const ModeField& f, double radius, int samples) {
  std::vector<double> out;
  for (int s = 0; s < samples; ++s) {
    const double t = kTwoPi * s / samples;
    const double x = radius * std::cos(t), y = radius * std::sin(t);
    const int i = std::clamp(static_cast<int>(std::floor((x + f.grid.extent) / f.grid.dx())), 0, f.grid.width - 1);
    const int row = std::clamp(static_cast<int>(std::floor((f.grid.extent - y) / f.grid.dy())), 0, f.grid.height - 1);
    out.push_back(std::arg(f.at(i, row)));
  }
  return out;
}

double winding(const std::vector<double>& ph) {
  double total = 0;
  for (std::size_t s = 0; s < ph.size(); ++s) {
    double step = ph[(s + 1) % ph.size()] - ph[s];
    while (step > std::numbers::pi) step -= kTwoPi;
    while (step < -std::numbers::pi) step += kTwoPi;
    total += step;
  }
  return total;
}

std::array<std::uint8_t, 24> read_header(const fs::path& p) {
  std::array<std::uint8_t, 24> h{};
  std::ifstream in(p, std::ios::binary);
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  return h;
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

const GridSpec kRef{512, 512, 5.0};

}  // namespace

TEST(Vortex, OamMapping) {
  EXPECT_EQ(oam_of(7, 0), -3);
  EXPECT_EQ(oam_of(7, 6), 3);
  EXPECT_EQ(oam_of(4, 0), -2);
  EXPECT_EQ(oam_of(4, 3), 1);
  EXPECT_EQ(oam_of(2, 1), 0);
}

TEST(Vortex, GaussianAtZeroOam) {
  const auto f = vortex_mode(7, 3, kRef);
  const auto I = intensity(f);
  const auto top = std::max_element(I.begin(), I.end()) - I.begin();
  const int row = static_cast<int>(top / kRef.width), col = static_cast<int>(top % kRef.width);
  EXPECT_LE(std::abs(row - 255.5), 1.0);
  EXPECT_LE(std::abs(col - 255.5), 1.0);
  EXPECT_NEAR(winding(phases_on_circle(f, 1.0, 720)), 0.0, 1e-9);
}

TEST(Vortex, WindingNumberThree) {
  const auto f = vortex_mode(7, 6, kRef);
  EXPECT_NEAR(winding(phases_on_circle(f, 1.0, 720)), 3 * kTwoPi, 1e-6);
  const auto g = vortex_mode(7, 0, kRef);
  EXPECT_NEAR(winding(phases_on_circle(g, 1.0, 720)), -3 * kTwoPi, 1e-6);
}

TEST(Vortex, CentralNull) {
  for (int m = 0; m < 7; ++m) {
    if (oam_of(7, m) == 0) continue;
    EXPECT_LT(central_intensity_ratio(vortex_mode(7, m, kRef)), 0.01) << m;
  }
}

TEST(Vortex, NormAndResolution) {
  for (int m = 0; m < 7; ++m) {
    const double n256 = grid_norm(vortex_mode(7, m, {256, 256, 4.0}));
    const double n512 = grid_norm(vortex_mode(7, m, {512, 512, 4.0}));
    EXPECT_NEAR(n256 * n256, 1.0, 0.02);
    EXPECT_NEAR(n512 * n512, 1.0, 0.02);
    EXPECT_LT(std::abs(n512 * n512 - n256 * n256) / (n256 * n256), 0.005);
  }
}

TEST(Vortex, RejectsBadInput) {
  EXPECT_THROW(vortex_mode(7, 7, kRef), ValidationError);
  EXPECT_THROW(vortex_mode(7, 0, {1, 512, 5.0}), ValidationError);
  EXPECT_THROW(vortex_mode(7, 0, {64, 64, 0.0}), ValidationError);
  EXPECT_THROW(superposition_mode(7, Basis::Z, 0, kRef), ValidationError);
}

TEST(Superposition, GridOrthonormalWithinBasisAndUnbiasedAcross) {
  const GridSpec g{512, 512, 5.0};
  std::vector<std::vector<ModeField>> modes;
  for (Basis b : kAllBases) {
    modes.emplace_back();
    for (int j = 0; j < 7; ++j) modes.back().push_back(mub_mode(7, b, j, g));
  }
  for (std::size_t b = 0; b < 3; ++b)
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) {
        const double ov = std::abs(grid_inner_product(modes[b][i], modes[b][j]));
        EXPECT_NEAR(ov, i == j ? 1.0 : 0.0, 0.02) << b << " " << i << " " << j;
      }
      for (std::size_t c = b + 1; c < 3; ++c)
        for (int j = 0; j < 7; ++j)
          EXPECT_NEAR(std::norm(grid_inner_product(modes[b][i], modes[c][j])), 1.0 / 7.0, 0.05);
    }
}

TEST(Superposition, AngleModesConcentrateAndRotate) {
  double prev_centre = -1;
  for (int j = 0; j < 7; ++j) {
    const auto f = superposition_mode(7, Basis::X, j, kRef);
    EXPECT_LT(min_sector_span(f), kTwoPi / 3) << j;
    // intensity-weighted mean direction
    cplx acc = 0;
    for (int row = 0; row < kRef.height; ++row)
      for (int i = 0; i < kRef.width; ++i) acc += std::norm(f.at(i, row)) * cplx(kRef.x(i), kRef.y(row));
    const double centre = std::arg(acc);
    if (prev_centre > -1) {
      double step = centre - prev_centre;
      while (step > std::numbers::pi) step -= kTwoPi;
      while (step < -std::numbers::pi) step += kTwoPi;
      EXPECT_NEAR(std::abs(step), kTwoPi / 7, 0.05) << j;
    }
    prev_centre = centre;
  }
}

TEST(Superposition, QubitAngleModeHasOneLobe) {
  const auto f = superposition_mode(2, Basis::X, 0, kRef);
  std::vector<double> ring(36, 0.0);
  for (int row = 0; row < kRef.height; ++row)
    for (int i = 0; i < kRef.width; ++i) {
      const double r = std::hypot(kRef.x(i), kRef.y(row));
      if (r < 0.3 || r > 1.5) continue;
      const double t = std::atan2(kRef.y(row), kRef.x(i)) + std::numbers::pi;
      ring[std::min<std::size_t>(35, static_cast<std::size_t>(t / kTwoPi * 36))] += std::norm(f.at(i, row));
    }
  const double top = *std::max_element(ring.begin(), ring.end());
  int peaks = 0;
  for (std::size_t s = 0; s < ring.size(); ++s) {
    const double prev = ring[(s + ring.size() - 1) % ring.size()], next = ring[(s + 1) % ring.size()];
    if (ring[s] > prev && ring[s] >= next && ring[s] > 0.5 * top) ++peaks;
  }
  EXPECT_EQ(peaks, 1);
  EXPECT_LT(min_sector_span(f), std::numbers::pi * 1.01);
}

TEST(Render, IntensityInvariantUnderGlobalPhase) {
  const MubBasis mb = mub_eigenbasis(5, Basis::XZ);
  std::vector<ModeField> vort;
  for (int m = 0; m < 5; ++m) vort.push_back(vortex_mode(5, m, {256, 256, 5.0}));
  for (int j = 0; j < 5; ++j) {
    const CVector v = mb.vectors.col(j);
    const CVector rotated = v * std::polar(1.0, 1.234);
    const auto a = render(combine_modes(vort, canonical_coefficients(v), Basis::XZ, j), RenderKind::intensity);
    const auto b = render(combine_modes(vort, canonical_coefficients(rotated), Basis::XZ, j), RenderKind::intensity);
    EXPECT_EQ(a.pixels, b.pixels) << j;
  }
}

TEST(Render, PhaseImageHasSingleBranchCut) {
  const auto f = vortex_mode(3, 2, kRef);  // ℓ = 1
  const auto ph = phases_on_circle(f, 1.0, 720);
  int jumps = 0;
  for (std::size_t s = 0; s < ph.size(); ++s)
    if (std::abs(ph[(s + 1) % ph.size()] - ph[s]) > std::numbers::pi) ++jumps;
  EXPECT_EQ(jumps, 1);
}

TEST(Render, PaletteEndpoints) {
  EXPECT_EQ(viridis(0.0), (Rgb{68, 1, 84}));
  EXPECT_EQ(viridis(1.0), (Rgb{253, 231, 37}));
  EXPECT_EQ(phase_colour(0.0), phase_colour(kTwoPi));
  EXPECT_EQ(phase_colour(0.0), (Rgb{255, 0, 0}));
}

TEST(Render, WritesPngAndPnm) {
  const auto dir = scratch("render_single");
  const auto f = vortex_mode(3, 0, {64, 48, 4.0});
  render(f, RenderKind::intensity, dir / "a.png");
  const auto h = read_header(dir / "a.png");
  EXPECT_EQ(h[0], 0x89);
  EXPECT_EQ(h[1], 'P');
  EXPECT_EQ(be32(&h[16]), 64u);
  EXPECT_EQ(be32(&h[20]), 48u);
  render(f, RenderKind::intensity, dir / "a.pgm", ImageFormat::pnm, Palette::gray);
  std::ifstream in(dir / "a.pgm", std::ios::binary);
  std::string magic;
  int w, hh, maxv;
  in >> magic >> w >> hh >> maxv;
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 64);
  EXPECT_EQ(hh, 48);
  EXPECT_EQ(fs::file_size(dir / "a.pgm"), std::string("P5\n64 48\n255\n").size() + 64u * 48u);
}

TEST(Render, IoErrorsNameThePath) {
  const auto f = vortex_mode(3, 0, {16, 16, 4.0});
  try {
    render(f, RenderKind::phase, "/nonexistent-dir/x.png");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.png"), std::string::npos);
  }
}

TEST(Sheet, FilesAndMontage) {
  const auto dir = scratch("sheet");
  SheetOptions opt;
  opt.grid = {64, 64, 5.0};
  opt.tile = 32;
  opt.threads = 2;
  const auto rep = render_mub_sheet(3, dir, opt);
  EXPECT_EQ(rep.tiles, 18);
  for (const auto& p : rep.files) EXPECT_TRUE(fs::exists(p)) << p;
  EXPECT_TRUE(fs::exists(dir / "Z_0_intensity.png"));
  EXPECT_TRUE(fs::exists(dir / "XZ_2_phase.png"));
  const auto h = read_header(rep.montage);
  EXPECT_EQ(be32(&h[16]), 6u * 32 + 7 * 2);
  EXPECT_EQ(be32(&h[20]), 3u * 32 + 4 * 2);
}
