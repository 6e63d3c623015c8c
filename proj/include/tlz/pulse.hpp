// Rotating-frame waveform synthesis for the TLZ drive.
//
// A drive field b(t) is realized by a microwave with Rabi frequency f_R,
// phase phi_mw and detuning f_det such that
//   b = (f_R cos phi_mw, -f_R sin phi_mw, d(f_det t)/dt).
// Rectangular prep/readout pulses rotate the spin onto the field direction
// at t = 0 and back from it at t = T.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tlz/model.hpp"
#include "tlz/propagator.hpp"

namespace tlz {

struct PulseSample {
  double t = 0.0;               // s
  double f_r = 0.0;             // Hz, >= 0
  double phi = 0.0;             // rad, unwrapped
  double f_det = 0.0;           // Hz, accumulated detuning phase / t
  double detuning_cycles = 0.0;  // f_det * t = integral of b_z from 0 to t
};

/// Rotation angles and microwave phases of the rectangular prep (i) and
/// readout (f) pulses. Phases refer to the frame rotating at resonance.
struct PrepAngles {
  double theta_i = 0.0;
  double phi_i = 0.0;
  double theta_f = 0.0;
  double phi_f = 0.0;
};

struct ConstraintCheck {
  std::string name;
  double limit = 0.0;
  double observed_max = 0.0;
  bool pass = false;
};

using ConstraintReport = std::vector<ConstraintCheck>;

struct PulseProgram {
  double sample_rate = 0.0;  // Hz
  double T = 0.0;            // s
  std::vector<PulseSample> samples;
  PrepAngles prep;
  double prep_duration = 130e-9;  // s, metadata only
  ConstraintReport constraints;
};

/// Samples the waveform on a uniform grid with spacing <= 1 / sample_rate.
/// When m = 0 the grid skips the midpoint, where the field vanishes.
PulseProgram synthesize_drive(const DriveParams& params, double sample_rate);

/// Inverse map back to the field. b_z differentiates the stored detuning
/// phase with a five-point Lagrange stencil (centred in the interior).
std::vector<FieldVector> reconstruct_field(const PulseProgram& prog);

/// Rabi amplitude, instantaneous detuning and duration against the limits.
/// A check passes when observed <= limit * (1 + rel_slack).
ConstraintReport verify_constraints(const PulseProgram& prog, const DriveParams& params,
                                    double rel_slack = 1e-3);

/// Rectangular-pulse amplitude error: both prep rotation angles scale by alpha.
PulseProgram prep_rotation_error(PulseProgram prog, double alpha);

/// Spin-1/2 rotation exp(-i theta (cos(chi) sigma_x + sin(chi) sigma_y) / 2)
/// applied to psi.
Spinor rotate_xy(const Spinor& psi, double theta, double axis_azimuth);

/// Initial state produced by the prep pulse from |down>, and the state the
/// readout pulse maps onto |up>, both in the frame of the drive field.
struct PrepStates {
  Spinor initial;
  Spinor target;
};
PrepStates prep_states(const PulseProgram& prog);

/// Smooth field interpolant (uniform cubic B-spline) through field samples
/// taken at the program's sample times.
FieldFunction sampled_field(const PulseProgram& prog, const std::vector<FieldVector>& field);

enum class WaveformColumns { polar, iq };

/// CSV with header `t_s,f_R_Hz,phi_rad,f_det_Hz` (or `t_s,I_Hz,Q_Hz,f_det_Hz`),
/// 17 significant digits.
void write_waveform_csv(const PulseProgram& prog, const std::filesystem::path& path,
                        WaveformColumns columns = WaveformColumns::polar);

}  // namespace tlz
