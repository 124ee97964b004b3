#include "tqdsim/observables.hpp"

#include <algorithm>
#include <cmath>

namespace tqdsim {

namespace {

PopulationSeries empty_series(const std::vector<double>& times) {
    PopulationSeries pops;
    pops.cavity1.times = times;
    pops.mech.times = times;
    pops.cavity2.times = times;
    pops.cavity1.values.reserve(times.size());
    pops.mech.values.reserve(times.size());
    pops.cavity2.values.reserve(times.size());
    return pops;
}

// Per-basis-state occupation table for one mode, used to fold diagonal
// expectations without building operator matrices.
std::vector<double> occupation_table(const FockSpace& space, int mode) {
    std::vector<double> occ(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
        occ[i] = static_cast<double>(space.occupation(i, mode));
    }
    return occ;
}

void check_dim(Eigen::Index got, const FockSpace& space) {
    if (got != space.dim()) {
        throw ConfigError("trajectory state dimension " + std::to_string(got) +
                          " does not match Fock space dimension " + std::to_string(space.dim()));
    }
}

} // namespace

PopulationSeries populations(const ModeTrajectory& traj) {
    PopulationSeries pops = empty_series(traj.times);
    for (const auto& v : traj.states) {
        pops.cavity1.values.push_back(std::norm(v(0)));
        pops.mech.values.push_back(std::norm(v(1)));
        pops.cavity2.values.push_back(std::norm(v(2)));
    }
    return pops;
}

PopulationSeries populations(const StateTrajectory& traj, const FockSpace& space) {
    PopulationSeries pops = empty_series(traj.times);
    const auto occ1 = occupation_table(space, kCavity1);
    const auto occm = occupation_table(space, kMech);
    const auto occ2 = occupation_table(space, kCavity2);
    for (const auto& psi : traj.states) {
        check_dim(psi.size(), space);
        double p1 = 0.0, pm = 0.0, p2 = 0.0;
        for (int i = 0; i < space.dim(); ++i) {
            const double w = std::norm(psi(i));
            p1 += w * occ1[i];
            pm += w * occm[i];
            p2 += w * occ2[i];
        }
        pops.cavity1.values.push_back(p1);
        pops.mech.values.push_back(pm);
        pops.cavity2.values.push_back(p2);
    }
    return pops;
}

PopulationSeries populations(const DensityTrajectory& traj, const FockSpace& space) {
    PopulationSeries pops = empty_series(traj.times);
    const auto occ1 = occupation_table(space, kCavity1);
    const auto occm = occupation_table(space, kMech);
    const auto occ2 = occupation_table(space, kCavity2);
    for (const auto& rho : traj.states) {
        check_dim(rho.rows(), space);
        double p1 = 0.0, pm = 0.0, p2 = 0.0;
        for (int i = 0; i < space.dim(); ++i) {
            const double w = rho(i, i).real();
            p1 += w * occ1[i];
            pm += w * occm[i];
            p2 += w * occ2[i];
        }
        pops.cavity1.values.push_back(p1);
        pops.mech.values.push_back(pm);
        pops.cavity2.values.push_back(p2);
    }
    return pops;
}

double max_phonon(const PopulationSeries& pops) {
    if (pops.mech.values.empty()) {
        throw ConfigError("max_phonon requires a non-empty trajectory");
    }
    return *std::max_element(pops.mech.values.begin(), pops.mech.values.end());
}

double max_phonon(const ModeTrajectory& traj) { return max_phonon(populations(traj)); }

double max_phonon(const StateTrajectory& traj, const FockSpace& space) {
    return max_phonon(populations(traj, space));
}

double max_phonon(const DensityTrajectory& traj, const FockSpace& space) {
    return max_phonon(populations(traj, space));
}

double transfer_fidelity(const Matrix& rho, const FockSpace& space) {
    check_dim(rho.rows(), space);
    const Matrix reduced = partial_trace(rho, space, {kCavity1, kCavity2});
    // Reduced space is (cavity1, cavity2) lexicographic: |01> sits at index 1.
    const int idx = 0 * space.dims[kCavity2] + 1;
    return reduced(idx, idx).real();
}

TimeSeries fidelity_series(const DensityTrajectory& traj, const FockSpace& space) {
    TimeSeries series;
    series.times = traj.times;
    series.values.reserve(traj.states.size());
    for (const auto& rho : traj.states) {
        series.values.push_back(transfer_fidelity(rho, space));
    }
    return series;
}

Eigen::Vector3cd single_excitation_amplitudes(const FockSpace& space, const Vector& psi) {
    check_dim(psi.size(), space);
    const auto idx = single_excitation_indices(space);
    Eigen::Vector3cd v;
    v << psi(idx[0]), psi(idx[1]), psi(idx[2]);
    return v;
}

namespace {

double overlap_value(const CouplingSchedule& s, double t, const Eigen::Vector3cd& v) {
    const double nrm2 = v.squaredNorm();
    if (!(nrm2 > 0.0)) {
        throw ConfigError("dark-mode overlap of a zero vector is undefined");
    }
    const Eigen::Vector3cd psi1 = dark_mode(s, t);
    return std::norm(psi1.dot(v)) / nrm2;
}

} // namespace

TimeSeries dark_mode_overlap(const ModeTrajectory& traj, const CouplingSchedule& s) {
    TimeSeries series;
    series.times = traj.times;
    series.values.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        series.values.push_back(overlap_value(s, traj.times[i], traj.states[i]));
    }
    return series;
}

TimeSeries dark_mode_overlap(const StateTrajectory& traj, const FockSpace& space,
                             const CouplingSchedule& s) {
    TimeSeries series;
    series.times = traj.times;
    series.values.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const Eigen::Vector3cd amps = single_excitation_amplitudes(space, traj.states[i]);
        series.values.push_back(overlap_value(s, traj.times[i], amps));
    }
    return series;
}

} // namespace tqdsim
