#include "absc/errors.hpp"
#include "absc/kinematics.hpp"
#include "absc/robot_file.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace absc;

TEST_SUITE("kinematics") {

TEST_CASE("forward_points on planar chains") {
    const KinematicChain one = test::one_joint_chain();
    auto p = forward_points(one, Eigen::VectorXd::Zero(1));
    CHECK((p[0] - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
    p = forward_points(one, Eigen::VectorXd::Constant(1, M_PI / 2));
    CHECK((p[0] - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);

    const KinematicChain two = test::planar_chain(1.0, 1.0);
    p = forward_points(two, Eigen::Vector2d::Zero());
    CHECK((p.back() - Eigen::Vector3d(2, 0, 0)).norm() < 1e-12);
    p = forward_points(two, Eigen::Vector2d(M_PI / 2, -M_PI / 2));
    CHECK((p.back() - Eigen::Vector3d(1, 1, 0)).norm() < 1e-12);
    CHECK_THROWS_AS(forward_points(two, Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("distance examples") {
    const KinematicChain one = test::one_joint_chain();
    auto r = distance(one, Eigen::VectorXd::Zero(1), Obstacle{Eigen::Vector3d(3, 0, 0), 1.0});
    CHECK(r.d == doctest::Approx(1.0));
    r = distance(one, Eigen::VectorXd::Zero(1), Obstacle{Eigen::Vector3d(1, 0, 0), 0.5});
    CHECK(r.d == doctest::Approx(-0.5));

    // elbow (id 0) at (1,0,0) and tip (id 1) at (2,0,0)
    const KinematicChain two = test::planar_chain(1.0, 1.0, true);
    r = distance(two, Eigen::Vector2d::Zero(), Obstacle{Eigen::Vector3d(1.0, 0.4, 0.0), 0.0});
    CHECK(r.point_id == 0);
    CHECK(r.d == doctest::Approx(0.4));
    // equidistant: lowest id wins
    r = distance(two, Eigen::Vector2d::Zero(), Obstacle{Eigen::Vector3d(1.5, 0.7, 0.0), 0.0});
    CHECK(r.point_id == 0);
}

TEST_CASE("distance_jacobian matches the analytic one-joint oracle") {
    const KinematicChain one = test::one_joint_chain();
    const Obstacle obs{Eigen::Vector3d(3, 0, 0), 0.2};
    auto J = distance_jacobian(one, Eigen::VectorXd::Zero(1), obs);
    CHECK(std::abs(J.grad(0)) < 1e-6);
    J = distance_jacobian(one, Eigen::VectorXd::Constant(1, M_PI / 2), obs);
    CHECK(J.grad(0) == doctest::Approx(0.9486832980505138).epsilon(1e-6));  // 3 / sqrt(10)
    CHECK(distance_jacobian_analytic(one, Eigen::VectorXd::Constant(1, M_PI / 2), obs, 0)(0) ==
          doctest::Approx(0.9486832980505138));
}

TEST_CASE("frozen joints drop their Jacobian column and pin the coordinate") {
    const KinematicChain full = test::spatial_chain();
    const KinematicChain frozen = full.with_frozen({{2, 0.4}});
    CHECK(frozen.n_q() == 3);
    const Obstacle obs{Eigen::Vector3d(0.4, 0.3, 0.5), 0.05};
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd q = test::uniform_vec(rng, 3, -1.5, 1.5);
        Eigen::VectorXd qf(4);
        qf << q(0), q(1), 0.4, q(2);
        const auto a = forward_points(frozen, q);
        const auto b = forward_points(full, qf);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() < 1e-12);
        const auto Jf = distance_jacobian(frozen, q, obs);
        const auto J = distance_jacobian(full, qf, obs);
        CHECK(Jf.grad.size() == 3);
        CHECK(Jf.grad(0) == doctest::Approx(J.grad(0)));
        CHECK(Jf.grad(1) == doctest::Approx(J.grad(1)));
        CHECK(Jf.grad(2) == doctest::Approx(J.grad(3)));
    }
}

TEST_CASE("distance_jacobian agrees with a finer difference and with the analytic form") {
    const KinematicChain chain = test::spatial_chain();
    const Obstacle obs{Eigen::Vector3d(0.3, -0.2, 0.6), 0.1};
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::VectorXd q = test::uniform_vec(rng, 4, -2.5, 2.5);
        const auto coarse = distance_jacobian(chain, q, obs);
        if (coarse.degenerate) continue;
        const auto fine = distance_jacobian(chain, q, obs, kJointStep / 10);
        const Eigen::RowVectorXd an = distance_jacobian_analytic(chain, q, obs, coarse.point_id);
        CHECK((coarse.grad - fine.grad).cwiseAbs().maxCoeff() < 10 * kJointStep * kJointStep + 1e-8);
        CHECK((coarse.grad - an).cwiseAbs().maxCoeff() < 1e-7);
        ++checked;
    }
    CHECK(checked > 90);
}

TEST_CASE("distance is invariant under a common translation") {
    const KinematicChain chain = test::spatial_chain();
    const Eigen::Vector3d shift(0.7, -1.3, 2.1);
    const KinematicChain moved = chain.translated(shift);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const Eigen::VectorXd q = test::uniform_vec(rng, 4, -3.0, 3.0);
        const Obstacle obs{test::uniform_vec(rng, 3, -1.0, 1.0), 0.1};
        const Obstacle obs2{obs.center + shift, 0.1};
        const auto a = distance(chain, q, obs);
        const auto b = distance(moved, q, obs2);
        CHECK(a.d == doctest::Approx(b.d).epsilon(1e-12));
        CHECK(a.point_id == b.point_id);
    }
}

TEST_CASE("degenerate pose is flagged when the nearest point switches") {
    const KinematicChain two = test::planar_chain(1.0, 1.0, true);
    // obstacle equidistant from elbow and tip
    const auto J = distance_jacobian(two, Eigen::Vector2d::Zero(), Obstacle{Eigen::Vector3d(1.5, 0.7, 0.0), 0.0});
    CHECK(J.degenerate);
    CHECK(J.grad.allFinite());
}

}  // TEST_SUITE

TEST_SUITE("robot_file") {

TEST_CASE("bundled robot files load") {
    const std::filesystem::path dir = std::filesystem::path(ABSC_SOURCE_DIR) / "config" / "robots";
    const KinematicChain p = load_robot((dir / "panda_ee1.json").string());
    CHECK(p.n_q() == 7);
    CHECK(p.points()[p.ee_point()].name == "flange");
    const KinematicChain r = load_robot((dir / "panda_ee2.json").string());
    CHECK(r.points()[r.ee_point()].name == "rod_tip");
    CHECK(r.n_points() == p.n_points() + 1);
    const KinematicChain planar = load_robot((dir / "planar2.json").string());
    CHECK(planar.n_q() == 2);
}

TEST_CASE("syntax errors cite line and column") {
    try {
        parse_robot("{\n  \"joints\": [\n   oops\n]}", "bad.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.json:3:") == 0);
    }
}

TEST_CASE("semantic errors cite the field path") {
    const std::string text = R"({"joints": [{"axis": [0, 0, 1], "origin_m": [0, 0]}],
                                 "control_points": [{"link": 0, "offset_m": [1, 0, 0]}]})";
    try {
        parse_robot(text, "r.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("joints[0].origin_m") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_robot(R"({"joints": [], "control_points": []})"), ConfigError);
    CHECK_THROWS_AS(parse_robot(R"({"joints": [{"axis": [0,0,1], "origin_m": [0,0,0]}],
                                    "control_points": [{"link": 3, "offset_m": [1,0,0]}]})"),
                    ConfigError);
    CHECK_THROWS_AS(load_robot("/nonexistent/robot.json"), ConfigError);
}

}  // TEST_SUITE
