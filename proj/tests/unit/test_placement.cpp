#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "errors.hpp"
#include "placement.hpp"

using namespace spinweb;

namespace {

double pareto_cdf(double r, double gamma, double r_min, double r_max) {
  const double a = gamma - 1.0;
  return (1.0 - std::pow(r / r_min, -a)) / (1.0 - std::pow(r_max / r_min, -a));
}

}  // namespace

TEST_SUITE("placement") {
  TEST_CASE("inverse-CDF radius") {
    CHECK(radius_from_uniform(1.0, 2.67, 2.0) == doctest::Approx(2.0));
    CHECK(radius_from_uniform(0.5, 2.67, 2.0) == doctest::Approx(3.029).epsilon(1e-3));
    CHECK(radius_from_uniform(0.5, 2.67, 2.0) == doctest::Approx(2.0 * std::pow(0.5, -1.0 / 1.67)));
  }

  TEST_CASE("sampled radii follow the truncated power law") {
    Rng rng(2024);
    const double gamma = 2.67, r_min = 2.0, r_max = 16.0;
    std::vector<double> r(100000);
    for (auto& x : r) x = sample_radius(rng, gamma, r_min, r_max);
    std::sort(r.begin(), r.end());
    CHECK(r.front() >= r_min);
    CHECK(r.back() <= r_max);
    double d = 0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double F = pareto_cdf(r[i], gamma, r_min, r_max);
      d = std::max({d, std::abs((i + 1) / n - F), std::abs(F - i / n)});
    }
    CHECK(d < 1.628 / std::sqrt(n));
  }

  TEST_CASE("radius parameter errors") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_radius(rng, 1.0, 2.0, 10.0), ParameterError);
    CHECK_THROWS_AS(sample_radius(rng, 2.5, 1.0, 10.0), ParameterError);
  }

  TEST_CASE("disk discretization") {
    const auto spec = LatticeSpec::make(64);
    CHECK(discretize_disk({10.0, 10.0, 2.0}, spec).size() == 13);
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j)
        CHECK(discretize_disk({20.0 + 0.1 * i, 30.0 + 0.1 * j, 2.0}, spec).size() >= 9);
    for (double r = 2.0; r < 12.0; r += 0.37) {
      const double n = static_cast<double>(discretize_disk({31.3, 7.9, r}, spec).size());
      CHECK(n >= std::numbers::pi * (r - 1) * (r - 1));
      CHECK(n <= std::numbers::pi * (r + 1) * (r + 1));
    }
  }

  TEST_CASE("discretization wraps around the torus and uses the torus metric") {
    const auto spec = LatticeSpec::make(16);
    auto sites = discretize_disk({0.0, 0.0, 2.0}, spec);
    CHECK(sites.size() == 13);
    CHECK(std::binary_search(sites.begin(), sites.end(), spec.site(15, 15)));
    CHECK(std::binary_search(sites.begin(), sites.end(), spec.site(0, 14)));
    for (auto s : sites)
      CHECK(torus_distance2(0.0, 0.0, spec.x_of(s), spec.y_of(s), 16) <= 4.0);
  }

  TEST_CASE("spiral packing reaches the target with disjoint disks") {
    const auto spec = LatticeSpec::make(128);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      PackingParams p;
      auto layout = pack_spiral(spec, seed, p);
      CHECK(layout.complete);
      CHECK(layout.coverage >= 0.3);
      CHECK(layout.coverage <= 0.35);
      validate_layout(layout);
      const auto& d = layout.disks;
      for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d[i].r >= 2.0);
        CHECK(d[i].r <= 16.0);
        for (std::size_t j = i + 1; j < d.size(); ++j) {
          const double dist = std::sqrt(torus_distance2(d[i].cx, d[i].cy, d[j].cx, d[j].cy, 128));
          CHECK(dist >= d[i].r + d[j].r);
        }
      }
      CHECK(d.front().cx == doctest::Approx(64.0));
      CHECK(d.front().cy == doctest::Approx(64.0));
      const auto covered = static_cast<double>(std::count_if(layout.site_to_node.begin(), layout.site_to_node.end(),
                                                             [](auto v) { return v != kNoNode; }));
      CHECK(layout.coverage == covered / spec.sites());
      for (std::size_t id = 0; id < d.size(); ++id)
        CHECK(std::count(layout.site_to_node.begin(), layout.site_to_node.end(), static_cast<std::int32_t>(id)) > 0);
    }
  }

  TEST_CASE("a vanishing coverage target places one disk") {
    PackingParams p;
    p.coverage = 1e-6;
    auto layout = pack_spiral(LatticeSpec::make(64), 3, p);
    CHECK(layout.node_count() == 1);
    CHECK(layout.complete);
  }

  TEST_CASE("an unreachable target returns an incomplete layout") {
    PackingParams p;
    p.coverage = 0.85;
    p.failure_budget = 20;
    auto layout = pack_spiral(LatticeSpec::make(64), 3, p);
    CHECK_FALSE(layout.complete);
    CHECK(layout.coverage < 0.85);
    validate_layout(layout);
  }

  TEST_CASE("spiral packing is deterministic") {
    PackingParams p;
    auto a = pack_spiral(LatticeSpec::make(96), 17, p), b = pack_spiral(LatticeSpec::make(96), 17, p);
    CHECK(a.disks == b.disks);
    CHECK(a.site_to_node == b.site_to_node);
    CHECK(pack_spiral(LatticeSpec::make(96), 18, p).disks != a.disks);
  }

  TEST_CASE("hexagonal radius and density") {
    CHECK(hex_node_radius(1.0, 0.3) == doctest::Approx(0.2876).epsilon(1e-3));
    CHECK(hex_node_radius(10.0, PackingParams::kHexDensity) == doctest::Approx(5.0));
    CHECK(PackingParams::kHexDensity == doctest::Approx(std::numbers::pi / (2 * std::sqrt(3.0))));
  }

  TEST_CASE("hexagonal packing") {
    const auto spec = LatticeSpec::make(128);
    auto layout = pack_hexagonal(spec, 0.3, 16.0);
    validate_layout(layout);
    CHECK(layout.coverage == doctest::Approx(0.3).epsilon(0.05));
    for (const auto& d : layout.disks) CHECK(d.r == layout.disks.front().r);
    CHECK(layout.node_count() == 8 * 10);
    CHECK_THROWS_AS(pack_hexagonal(spec, 0.3, 6.0), ParameterError);
    auto odd = pack_hexagonal(spec, 0.3, 17.0);
    CHECK_FALSE(odd.warnings.empty());
  }

  TEST_CASE("layout files round trip") {
    PackingParams p;
    auto layout = pack_spiral(LatticeSpec::make(64), 5, p);
    for (bool map : {false, true}) {
      std::stringstream s;
      write_layout(s, layout, map);
      const std::string first = s.str();
      auto back = read_layout(s);
      CHECK(back.disks == layout.disks);
      CHECK(back.site_to_node == layout.site_to_node);
      CHECK(back.coverage == layout.coverage);
      std::stringstream again;
      write_layout(again, back, map);
      CHECK(again.str() == first);
    }
    auto hex = pack_hexagonal(LatticeSpec::make(64), 0.3, 12.0);
    std::stringstream s;
    write_layout(s, hex);
    CHECK(read_layout(s).site_to_node == hex.site_to_node);
  }

  TEST_CASE("corrupt layout files are rejected") {
    std::stringstream bad("64 1 2.67 2 8 0.3\n# packing=spiral gap=1 pitch=0 budget=1000 nodes=1 achieved=0.5 complete=1 failures=0\n0 32 32 4\n");
    CHECK_THROWS_AS(read_layout(bad), ParseError);
  }
}
