#pragma once

#include <array>
#include <cstddef>

// Physical constants and per-species tables of the FaIR 1.x model family.
// Species order for the concentration tables: CO2, CH4, N2O, then the 28 minor
// gases in the same order as the multi-gas scenario schema.
namespace climalign::fair::constants {

inline constexpr double kAtmosphereMass = 5.1352e18;  // kg
inline constexpr double kMolwtAir = 28.97;
inline constexpr double kMolwtC = 12.01;
inline constexpr double kMolwtN2 = 28.013;
inline constexpr double kMolwtN2O = 44.013;
inline constexpr double kMolwtN = 14.0067;
inline constexpr double kMolwtNO = 30.01;

// GtC per ppm of atmospheric CO2.
inline constexpr double kPpmToGtC = kAtmosphereMass / 1e18 * kMolwtC / kMolwtAir;

inline constexpr std::size_t kConcSpecies = 31;

inline constexpr std::array<double, kConcSpecies> kMolwt = {
    44.01,  16.04,  44.013, 88.0043, 138.01, 338.041845, 70.01,  52.02,  252.055, 120.02, 102.03,
    84.04,  170.03, 134.05, 146.06,  137.37, 120.91,     187.376, 170.92, 154.466, 153.81, 133.4,
    86.47,  116.94, 100.49, 165.36,  209.82, 148.91,     259.823, 94.94, 50.49};

// years; index 0 (CO2) unused
inline constexpr std::array<double, kConcSpecies> kLifetime = {
    0.0,  9.3,   121.,  50000., 10000., 3100., 222., 5.2,  16.1, 28.2, 13.4,
    47.1, 38.9,  7.7,   3200.,  45.,    100.,  85.,  190., 1020., 26., 5.,
    11.9, 9.2,   17.2,  16.,    2.9,    65.,   20.,  0.8,  1.};

// W m-2 ppb-1
inline constexpr std::array<double, kConcSpecies> kRadiativeEfficiency = {
    1.37e-5, 3.63e-4, 3.00e-3, 0.09, 0.25, 0.44, 0.18, 0.11, 0.42, 0.23, 0.16,
    0.16,    0.26,    0.24,    0.57, 0.26, 0.32, 0.30, 0.31, 0.20, 0.17, 0.07,
    0.21,    0.16,    0.19,    0.29, 0.27, 0.30, 0.31, 0.004, 0.01};

// ppm for CO2, ppb for CH4 and N2O, ppt for the rest
inline constexpr std::array<double, kConcSpecies> kPreindustrial = {
    278.05158, 721.89411, 272.95961, 35., 0., 0., 0., 0., 0., 0., 0.,
    0.,        0.,        0.,        0.,  0., 0., 0., 0., 0., 0., 0.,
    0.,        0.,        0.,        0.,  0., 0., 0., 5.8, 480.};

// Ozone-depleting substances, CFC11 .. CH3CL.
inline constexpr std::array<double, 16> kClAtoms = {3, 2, 3, 2, 1, 4, 3, 1, 2, 1, 1, 0, 0, 0, 0, 1};
inline constexpr std::array<double, 16> kBrAtoms = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 1, 2, 1, 0};
inline constexpr std::array<double, 16> kFracRelease = {0.47, 0.23, 0.29, 0.12, 0.04, 0.56, 0.67, 0.13,
                                                        0.34, 0.17, 0.62, 0.62, 0.28, 0.65, 0.60, 0.44};

// Emission mass per unit concentration (Mt per ppb, equivalently kt per ppt).
// N2O emissions are in MtN2, hence the molecular-weight ratio.
constexpr double emis_to_conc(std::size_t species) {
    double e = kAtmosphereMass / 1e18 * kMolwt[species] / kMolwtAir;
    if (species == 2) e /= kMolwtN2O / kMolwtN2;
    return e;
}

}  // namespace climalign::fair::constants
