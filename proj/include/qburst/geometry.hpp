#pragma once

#include <array>
#include <string>
#include <vector>

#include "qburst/vec.hpp"

namespace qburst {

// Lab frame: x and y centered on the chip (so x in [-side_x/2, side_x/2]),
// z in [0, thickness] with the metalized face at z = thickness.

struct Substrate {
  double side_x_um = 6250.0;
  double side_y_um = 6250.0;
  double thickness_um = 375.0;
  double relative_permittivity = 11.7;
  Vec3 crystal_axis_normal{0.0, 0.0, 1.0};  // <001>
  Vec3 crystal_axis_edge{1.0, 0.0, 0.0};    // <110>, along the chip edge
  double sound_speed_m_s = 6.0e3;

  bool contains(const Vec3& r) const {
    return std::abs(r.x) <= 0.5 * side_x_um && std::abs(r.y) <= 0.5 * side_y_um &&
           r.z >= 0.0 && r.z <= thickness_um;
  }
  double volume_um3() const { return side_x_um * side_y_um * thickness_um; }
  void validate() const;
};

// Six <100> conduction-valley axes expressed in the lab frame.
std::array<Vec3, 6> valley_axes(const Substrate& substrate);

struct QubitGeometry {
  std::string id;
  double center_x_um = 0.0;
  double center_y_um = 0.0;
  double island_radius_um = 70.0;   // r_i
  double cavity_radius_um = 90.5;   // r_o
  double charging_energy_hz = 355.0e6;   // E_C/h
  double josephson_energy_hz = 8.52e9;   // E_J/h
  double omega01_rad_s = 2.868e10;

  Vec3 center() const { return {center_x_um, center_y_um, 0.0}; }
  void validate() const;
};

struct ChipLayout {
  Substrate substrate;
  std::vector<QubitGeometry> qubits;  // order defines reporting order
  double anchor_fraction = 0.2;       // beta, acoustically coupled perimeter fraction

  const QubitGeometry& qubit(const std::string& id) const;
  int qubit_index(const std::string& id) const;  // -1 if absent
  void validate() const;                         // throws listing every violation
};

// The four-qubit reference layout: 6250 x 6250 x 375 um substrate, two qubit
// pairs placed symmetrically about the chip center with center-to-center
// separations 340 um and 640 um, and 3195 um between the outer pair members.
ChipLayout default_layout();

// Sensing area for uniform fields, pi * eps * r_i * r_o (um^2).
double sensing_area_um2(const QubitGeometry& q, double relative_permittivity);

ChipLayout load_layout(const std::string& path);
void save_layout(const ChipLayout& layout, const std::string& path);

}  // namespace qburst
