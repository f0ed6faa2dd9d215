#ifndef GALLSTONE_ODE_HPP
#define GALLSTONE_ODE_HPP

#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"

namespace gallstone::ode {

// The four first-order interaction dynamics. State evolves in the driver
// variable, e.g. EcfVitd is d(ECF)/d(VitD).
enum class OdeId { EcfVitd, CrpHgb, HyperVitd, DmBm };

inline const char* ode_name(OdeId id) {
    switch (id) {
        case OdeId::EcfVitd: return "ecf_vitd";
        case OdeId::CrpHgb: return "crp_hgb";
        case OdeId::HyperVitd: return "hyper_vitd";
        case OdeId::DmBm: return "dm_bm";
    }
    return "?";
}

inline constexpr std::array<OdeId, 4> kAllOdes = {OdeId::EcfVitd, OdeId::CrpHgb, OdeId::HyperVitd,
                                                  OdeId::DmBm};

inline void check_driver_domain(OdeId id, double driver) {
    if ((id == OdeId::EcfVitd || id == OdeId::CrpHgb) && driver <= -1.0)
        throw NumericError(std::string(ode_name(id)) + ": driver must be > -1, got " + fmt_double(driver));
}

inline double rhs_eval(OdeId id, double state, double driver) {
    check_driver_domain(id, driver);
    switch (id) {
        case OdeId::EcfVitd: return state * std::log1p(driver);
        case OdeId::CrpHgb: return state / (1.0 + driver);
        case OdeId::HyperVitd: return -2.0 * driver * state;
        case OdeId::DmBm: return driver * driver * state;
    }
    return 0.0;
}

struct Trajectory {
    std::vector<double> driver_grid;
    std::vector<double> state_values;
    double step = 0.0;
};

inline constexpr double kStateOverflowLimit = 1e12;

// Classical RK4 on a uniform grid; the last step is shortened so the grid
// lands exactly on x1.
inline Trajectory rk4_integrate(OdeId id, double y0, double x0, double x1, double step) {
    if (!(step > 0.0)) throw ConfigError("rk4_integrate: step must be > 0");
    if (!(x1 > x0)) throw ConfigError("rk4_integrate: need x1 > x0");
    check_driver_domain(id, x0);

    Trajectory traj;
    traj.step = step;
    traj.driver_grid.push_back(x0);
    const double tol = 1e-9 * step;
    for (long k = 1; x0 + static_cast<double>(k) * step < x1 - tol; ++k)
        traj.driver_grid.push_back(x0 + static_cast<double>(k) * step);
    traj.driver_grid.push_back(x1);

    traj.state_values.push_back(y0);
    double y = y0;
    for (std::size_t i = 1; i < traj.driver_grid.size(); ++i) {
        const double x = traj.driver_grid[i - 1];
        const double h = traj.driver_grid[i] - x;
        const double k1 = rhs_eval(id, y, x);
        const double k2 = rhs_eval(id, y + 0.5 * h * k1, x + 0.5 * h);
        const double k3 = rhs_eval(id, y + 0.5 * h * k2, x + 0.5 * h);
        const double k4 = rhs_eval(id, y + h * k3, x + h);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(y) || std::abs(y) > kStateOverflowLimit)
            throw NumericError(std::string(ode_name(id)) + ": state overflow at driver=" +
                               fmt_double(traj.driver_grid[i]));
        traj.state_values.push_back(y);
    }
    return traj;
}

// Separable-variable solutions, used as analytic oracles for the integrator.
inline double closed_form(OdeId id, double y0, double x0, double x) {
    check_driver_domain(id, x0);
    check_driver_domain(id, x);
    auto antideriv_log = [](double v) { return (1.0 + v) * std::log1p(v) - v; };
    switch (id) {
        case OdeId::EcfVitd: return y0 * std::exp(antideriv_log(x) - antideriv_log(x0));
        case OdeId::CrpHgb: return y0 * (1.0 + x) / (1.0 + x0);
        case OdeId::HyperVitd: return y0 * std::exp(-(x * x - x0 * x0));
        case OdeId::DmBm: return y0 * std::exp((x * x * x - x0 * x0 * x0) / 3.0);
    }
    return 0.0;
}

// ------------------------------------------------------- regression features

// The four interaction covariates of the final model are the ODE right-hand
// sides evaluated at each subject's raw values.
struct InteractionFeatures {
    double f1 = 0.0;  // ECF * log(1 + VitD)
    double f2 = 0.0;  // CRP / (1 + HGB)
    double f3 = 0.0;  // -2 * VitD * Hyper
    double f4 = 0.0;  // BM^2 * DM
};

struct InteractionInputs {
    double ecf = 0.0, vitd = 0.0, crp = 0.0, hgb = 0.0, hyper = 0.0, bm = 0.0, dm = 0.0;
};

inline InteractionFeatures interaction_features(const InteractionInputs& in) {
    if (in.vitd <= -1.0) throw NumericError("interaction_features: VitD must be > -1");
    if (in.hgb <= -1.0) throw NumericError("interaction_features: HGB must be > -1");
    InteractionFeatures f;
    f.f1 = in.ecf * std::log1p(in.vitd);
    f.f2 = in.crp / (1.0 + in.hgb);
    f.f3 = -2.0 * in.vitd * in.hyper;
    f.f4 = in.bm * in.bm * in.dm;
    return f;
}

// ----------------------------------------------------------------- emission

struct SimulationRange {
    double y0 = 1.0;
    double x0 = 0.0;
    double x1 = 3.0;
    double step = 1e-3;
};

struct SimulationConfig {
    SimulationRange ecf_vitd{1.0, 0.0, 3.0, 1e-3};
    SimulationRange crp_hgb{1.0, 0.0, 3.0, 1e-3};
    SimulationRange hyper_vitd{1.0, 0.0, 3.0, 1e-3};
    SimulationRange dm_bm{1.0, 0.0, 1.5, 1e-3};

    const SimulationRange& range(OdeId id) const {
        switch (id) {
            case OdeId::EcfVitd: return ecf_vitd;
            case OdeId::CrpHgb: return crp_hgb;
            case OdeId::HyperVitd: return hyper_vitd;
            case OdeId::DmBm: return dm_bm;
        }
        return ecf_vitd;
    }
};

inline std::array<Trajectory, 4> simulate_trajectories(const SimulationConfig& config) {
    std::array<Trajectory, 4> out;
    for (std::size_t i = 0; i < kAllOdes.size(); ++i) {
        const auto& r = config.range(kAllOdes[i]);
        out[i] = rk4_integrate(kAllOdes[i], r.y0, r.x0, r.x1, r.step);
    }
    return out;
}

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "driver,state\n";
    for (std::size_t i = 0; i < traj.driver_grid.size(); ++i)
        out << fmt_double(traj.driver_grid[i]) << ',' << fmt_double(traj.state_values[i]) << '\n';
}

inline nlohmann::json trajectories_to_json(const std::array<Trajectory, 4>& trajs) {
    nlohmann::json j;
    for (std::size_t i = 0; i < kAllOdes.size(); ++i) {
        nlohmann::json t;
        t["driver"] = trajs[i].driver_grid;
        t["state"] = trajs[i].state_values;
        t["step"] = trajs[i].step;
        j[ode_name(kAllOdes[i])] = std::move(t);
    }
    return j;
}

}  // namespace gallstone::ode

#endif
