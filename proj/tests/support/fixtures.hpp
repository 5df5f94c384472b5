#pragma once

// Loaders for the bundled .soc instances plus the reference coordinates that
// certify the embeddable fixture.

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include "euclid2/election.hpp"

#ifndef EUCLID2_FIXTURE_DIR
#error "EUCLID2_FIXTURE_DIR must be defined by the build"
#endif

namespace euclid2::fixtures {

inline std::string fixture_path(const std::string& name) {
  return std::string(EUCLID2_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline Election load(const std::string& name) { return parse_soc(read_file(fixture_path(name))); }

// Known planar realization of embeddable4x7.soc: candidates a..d then one
// point per distinct vote in file order (bdac, bacd, adcb, acdb, dacb, cadb,
// bcad). Every ranking holds with squared-distance gaps of at least 5.83.
struct Point {
  double x, y;
};

inline constexpr std::array<Point, 4> kEmbeddable4x7Candidates = {{
    {3.18, -0.78},   // a
    {-4.58, -2.66},  // b
    {4.27, -3.23},   // c
    {5.4, 5.84},     // d
}};

inline constexpr std::array<Point, 7> kEmbeddable4x7Voters = {{
    {-4, 6.02},      // bdac
    {-2.18, -1.23},  // bacd
    {1.44, 2.63},    // adcb
    {4.04, 0.44},    // acdb
    {6, 4},          // dacb
    {10.2, -3.22},   // cadb
    {-2.58, -6},     // bcad
}};

}  // namespace euclid2::fixtures
