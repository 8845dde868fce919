#include "absc/dynamics.hpp"

#include "absc/errors.hpp"

#include <spdlog/spdlog.h>

namespace absc {

Eigen::VectorXd ConcreteState::stacked() const {
    Eigen::VectorXd x(q.size() + qdot.size());
    x << q, qdot;
    return x;
}

ConcreteState ConcreteState::from_stacked(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() % 2 != 0) throw DimensionError("stacked state must have even length");
    const Eigen::Index n = x.size() / 2;
    return ConcreteState{x.head(n), x.tail(n)};
}

ConcreteSystem::ConcreteSystem(KinematicChain chain, Polytope U, StateBounds bounds, JacobianMode mode)
    : chain_(std::move(chain)), U_(std::move(U)), bounds_(std::move(bounds)), mode_(mode) {
    const Eigen::Index n = chain_.n_q();
    if (U_.dim() != n) throw DimensionError("control limits dimension does not match actuated joints");
    if (!U_.is_box()) throw ConfigError("control limits must be a box over joint accelerations");
    if (!contains(U_, Eigen::VectorXd::Zero(n))) throw ConfigError("control limits must contain 0");
    if (bounds_.q_lo.size() != n || bounds_.q_hi.size() != n || bounds_.qdot_lo.size() != n ||
        bounds_.qdot_hi.size() != n)
        throw DimensionError("state bounds dimension does not match actuated joints");
    if ((bounds_.q_hi - bounds_.q_lo).minCoeff() < 0.0 || (bounds_.qdot_hi - bounds_.qdot_lo).minCoeff() < 0.0)
        throw ConfigError("state bounds must satisfy lo <= hi");
}

ConcreteSystem ConcreteSystem::with_control_limits(Polytope U) const {
    return ConcreteSystem(chain_, std::move(U), bounds_, mode_);
}

Eigen::VectorXd drift(const ConcreteSystem& sys, const ConcreteState& x) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n_x());
    f.head(sys.n_q()) = x.qdot;
    return f;
}

Eigen::MatrixXd input_matrix(const ConcreteSystem& sys, const ConcreteState&) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(sys.n_x(), sys.n_q());
    g.bottomRows(sys.n_q()).setIdentity();
    return g;
}

Eigen::VectorXd state_derivative(const ConcreteSystem& sys, const ConcreteState& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& u) {
    Eigen::VectorXd xd(sys.n_x());
    xd << x.qdot, u;
    return xd;
}

Eigen::VectorXd clamp_to_U(const ConcreteSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& u) {
    return u.cwiseMax(sys.u_min()).cwiseMin(sys.u_max());
}

ConcreteState step(const ConcreteSystem& sys, const ConcreteState& x, const Eigen::Ref<const Eigen::VectorXd>& u,
                   double dt) {
    if (!(dt > 0.0)) throw Error("step: dt must be positive");
    if (u.size() != sys.n_q() || x.q.size() != sys.n_q() || x.qdot.size() != sys.n_q())
        throw DimensionError("step: state/control dimension mismatch");
    Eigen::VectorXd uc = u;
    if (!contains(sys.U(), u)) {
        spdlog::debug("step: control outside U clamped");
        uc = clamp_to_U(sys, u);
    }
    ConcreteState next;
    next.qdot = x.qdot + uc * dt;
    next.q = x.q + next.qdot * dt;
    if (!next.q.allFinite() || !next.qdot.allFinite()) throw NumericFault("step: non-finite state");
    return next;
}

ConcreteState sample_state(const ConcreteSystem& sys, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& b = sys.bounds();
    ConcreteState x{Eigen::VectorXd(sys.n_q()), Eigen::VectorXd(sys.n_q())};
    for (int i = 0; i < sys.n_q(); ++i) x.q(i) = b.q_lo(i) + (b.q_hi(i) - b.q_lo(i)) * unit(rng);
    for (int i = 0; i < sys.n_q(); ++i) x.qdot(i) = b.qdot_lo(i) + (b.qdot_hi(i) - b.qdot_lo(i)) * unit(rng);
    return x;
}

}  // namespace absc
