#pragma once

#include <vector>

#include "tqdsim/dynamics.hpp"
#include "tqdsim/models.hpp"

namespace tqdsim {

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
};

struct PopulationSeries {
    TimeSeries cavity1;
    TimeSeries mech;
    TimeSeries cavity2;
};

// Mode-amplitude populations |v_i(t)|^2 (one initial excitation).
PopulationSeries populations(const ModeTrajectory& traj);
// <a1^dag a1>, <b^dag b>, <a2^dag a2> for a state-vector trajectory.
PopulationSeries populations(const StateTrajectory& traj, const FockSpace& space);
// Same expectations for a density-matrix trajectory.
PopulationSeries populations(const DensityTrajectory& traj, const FockSpace& space);

// Maximum of the mechanical population over the trajectory grid.
double max_phonon(const PopulationSeries& pops);
double max_phonon(const ModeTrajectory& traj);
double max_phonon(const StateTrajectory& traj, const FockSpace& space);
double max_phonon(const DensityTrajectory& traj, const FockSpace& space);

// Transfer fidelity F = <01| tr_mech(rho) |01>: the (cavity1=0, cavity2=1)
// diagonal element of the reduced cavity-cavity density matrix.
double transfer_fidelity(const Matrix& rho, const FockSpace& space);
TimeSeries fidelity_series(const DensityTrajectory& traj, const FockSpace& space);

// Amplitudes (<100|psi>, <010|psi>, <001|psi>) of the single-excitation kets.
Eigen::Vector3cd single_excitation_amplitudes(const FockSpace& space, const Vector& psi);

// Overlap |psi1(t)^dag v(t)|^2 / ||v(t)||^2 with the instantaneous dark mode
// psi1 = [cos theta, 0, sin theta].  Throws SolverError on degenerate g0.
TimeSeries dark_mode_overlap(const ModeTrajectory& traj, const CouplingSchedule& s);
// Same overlap evaluated on the single-excitation amplitudes of a full
// state-vector trajectory.
TimeSeries dark_mode_overlap(const StateTrajectory& traj, const FockSpace& space,
                             const CouplingSchedule& s);

} // namespace tqdsim
