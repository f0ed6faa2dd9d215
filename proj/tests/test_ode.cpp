#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gallstone/common.hpp"
#include "gallstone/ode.hpp"

using namespace gallstone;
using namespace gallstone::ode;

TEST_CASE("rhs_eval matches the four closed formulas") {
    REQUIRE(rhs_eval(OdeId::EcfVitd, 10.0, 0.0) == 0.0);             // ECF*log(1)
    REQUIRE(rhs_eval(OdeId::CrpHgb, 3.0, 2.0) == Catch::Approx(1.0));
    REQUIRE(rhs_eval(OdeId::HyperVitd, 1.0, 2.0) == -4.0);           // -2*2*1
    REQUIRE(rhs_eval(OdeId::DmBm, 0.5, 3.0) == Catch::Approx(4.5));  // 9*0.5
}

TEST_CASE("rhs_eval rejects domain violations") {
    REQUIRE_THROWS_AS(rhs_eval(OdeId::EcfVitd, 1.0, -1.0), NumericError);
    REQUIRE_THROWS_AS(rhs_eval(OdeId::CrpHgb, 1.0, -1.5), NumericError);
    REQUIRE_NOTHROW(rhs_eval(OdeId::HyperVitd, 1.0, -5.0));
}

TEST_CASE("closed forms satisfy initial conditions") {
    REQUIRE(closed_form(OdeId::HyperVitd, 1.0, 0.0, 0.0) == 1.0);
    REQUIRE(closed_form(OdeId::EcfVitd, 5.0, 0.0, 0.0) == 5.0);
    REQUIRE(closed_form(OdeId::DmBm, 1.0, 0.0, 1.0) == Catch::Approx(std::exp(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("closed forms cross-checked by a fine-step integrator") {
    // independent verification of the separation-of-variables solutions
    for (OdeId id : kAllOdes) {
        const double x1 = (id == OdeId::DmBm) ? 1.0 : 2.0;
        const auto traj = rk4_integrate(id, 1.0, 0.0, x1, 1e-5);
        const double exact = closed_form(id, 1.0, 0.0, x1);
        REQUIRE(traj.state_values.back() == Catch::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("rk4 hits the derived endpoint values") {
    SECTION("Hyper-VitD decay: y(2) = exp(-4)") {
        const auto traj = rk4_integrate(OdeId::HyperVitd, 1.0, 0.0, 2.0, 1e-3);
        REQUIRE(traj.state_values.back() == Catch::Approx(std::exp(-4.0)).epsilon(1e-6));
    }
    SECTION("CRP-HGB linear growth: y(3) = 4") {
        const auto traj = rk4_integrate(OdeId::CrpHgb, 1.0, 0.0, 3.0, 1e-3);
        REQUIRE(traj.state_values.back() == Catch::Approx(4.0).epsilon(1e-6));
    }
}

TEST_CASE("rk4 tracks the closed forms over the whole grid") {
    for (OdeId id : kAllOdes) {
        const double x1 = (id == OdeId::DmBm) ? 1.5 : 3.0;
        const auto traj = rk4_integrate(id, 1.0, 0.0, x1, 1e-3);
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.driver_grid.size(); ++i) {
            const double exact = closed_form(id, 1.0, 0.0, traj.driver_grid[i]);
            worst = std::max(worst, std::abs(traj.state_values[i] - exact) / std::max(1e-300, std::abs(exact)));
        }
        INFO("ode " << ode_name(id));
        REQUIRE(worst <= 1e-6);
    }
}

TEST_CASE("rk4 converges at fourth order") {
    auto max_err = [](double step) {
        const auto traj = rk4_integrate(OdeId::EcfVitd, 1.0, 0.0, 2.0, step);
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.driver_grid.size(); ++i) {
            const double exact = closed_form(OdeId::EcfVitd, 1.0, 0.0, traj.driver_grid[i]);
            worst = std::max(worst, std::abs(traj.state_values[i] - exact));
        }
        return worst;
    };
    const double e1 = max_err(0.05);
    const double e2 = max_err(0.025);
    const double order = std::log2(e1 / e2);
    REQUIRE(order > 3.5);
    REQUIRE(order < 4.5);
}

TEST_CASE("zero state is a fixed point of the linear-in-state equations") {
    for (OdeId id : {OdeId::EcfVitd, OdeId::CrpHgb, OdeId::DmBm}) {
        const auto traj = rk4_integrate(id, 0.0, 0.0, 1.0, 0.25);
        for (double v : traj.state_values) REQUIRE(v == 0.0);
    }
}

TEST_CASE("rk4 grid lands exactly on the right endpoint") {
    const auto traj = rk4_integrate(OdeId::CrpHgb, 1.0, 0.0, 1.0005, 1e-3);
    REQUIRE(traj.driver_grid.back() == 1.0005);
    REQUIRE(traj.driver_grid.size() == 1002);  // 1000 full steps + final partial
    REQUIRE_THROWS_AS(rk4_integrate(OdeId::CrpHgb, 1.0, 1.0, 0.5, 1e-3), ConfigError);
    REQUIRE_THROWS_AS(rk4_integrate(OdeId::CrpHgb, 1.0, 0.0, 1.0, -1e-3), ConfigError);
}

TEST_CASE("dm-bm growth overflows with a diagnostic") {
    REQUIRE_THROWS_WITH(rk4_integrate(OdeId::DmBm, 1.0, 0.0, 40.0, 0.01),
                        Catch::Matchers::ContainsSubstring("overflow"));
}

TEST_CASE("interaction features evaluate the model covariates") {
    SECTION("zero vitamin D kills f1 and f3") {
        InteractionInputs in;
        in.ecf = 17.0;
        in.vitd = 0.0;
        in.hyper = 1.0;
        const auto f = interaction_features(in);
        REQUIRE(f.f1 == 0.0);
        REQUIRE(f.f3 == 0.0);
    }
    SECTION("zero CRP kills f2") {
        InteractionInputs in;
        in.crp = 0.0;
        in.hgb = 12.0;
        REQUIRE(interaction_features(in).f2 == 0.0);
    }
    SECTION("log term calibration") {
        InteractionInputs in;
        in.ecf = 10.0;
        in.vitd = std::exp(1.0) - 1.0;
        REQUIRE(interaction_features(in).f1 == Catch::Approx(10.0).epsilon(1e-12));
    }
    SECTION("sign structure on the clinical domain") {
        Rng rng(5);
        for (int rep = 0; rep < 200; ++rep) {
            InteractionInputs in;
            in.ecf = 30.0 * rng.u01();
            in.vitd = 50.0 * rng.u01();
            in.crp = 20.0 * rng.u01();
            in.hgb = 18.0 * rng.u01();
            in.hyper = (rng.u01() < 0.5) ? 1.0 : 0.0;
            in.bm = 4.0 * rng.u01();
            in.dm = (rng.u01() < 0.5) ? 1.0 : 0.0;
            const auto f = interaction_features(in);
            REQUIRE(f.f1 >= 0.0);
            REQUIRE(f.f2 >= 0.0);
            REQUIRE(f.f3 <= 0.0);
            REQUIRE(f.f4 >= 0.0);
        }
    }
    SECTION("domain violations") {
        InteractionInputs in;
        in.vitd = -1.5;
        REQUIRE_THROWS_AS(interaction_features(in), NumericError);
    }
}

TEST_CASE("figure-4 style trajectories have the documented shapes") {
    SimulationConfig config;
    const auto trajs = simulate_trajectories(config);
    const auto& ecf = trajs[0];   // increasing for positive VitD
    const auto& crp = trajs[1];   // increasing in HGB (equation as written)
    const auto& hyp = trajs[2];   // decreasing
    for (std::size_t i = 2; i < ecf.state_values.size(); ++i)
        REQUIRE(ecf.state_values[i] > ecf.state_values[i - 1]);
    for (std::size_t i = 1; i < crp.state_values.size(); ++i)
        REQUIRE(crp.state_values[i] > crp.state_values[i - 1]);
    for (std::size_t i = 1; i < hyp.state_values.size(); ++i)
        REQUIRE(hyp.state_values[i] < hyp.state_values[i - 1]);
}
