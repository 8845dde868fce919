#include "absc/kinematics.hpp"

#include "absc/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace absc {

KinematicChain::KinematicChain(std::vector<Joint> joints, std::vector<ControlPoint> points,
                               std::map<int, double> frozen, Eigen::Vector3d base)
    : joints_(std::move(joints)), points_(std::move(points)), frozen_(std::move(frozen)), base_(std::move(base)) {
    if (joints_.empty()) throw ConfigError("kinematic chain needs at least one joint");
    if (points_.empty()) throw ConfigError("kinematic chain needs at least one control point");
    for (std::size_t j = 0; j < joints_.size(); ++j) {
        auto& jt = joints_[j];
        const double n = jt.axis.norm();
        if (!std::isfinite(n) || n < 1e-12) throw ConfigError("joint " + std::to_string(j) + ": axis must be nonzero");
        jt.axis /= n;
        if (!jt.origin.allFinite()) throw ConfigError("joint " + std::to_string(j) + ": origin must be finite");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& pt = points_[i];
        if (pt.link < 0 || pt.link >= n_joints())
            throw ConfigError("control point " + std::to_string(i) + ": link index out of range");
        if (!pt.offset.allFinite()) throw ConfigError("control point " + std::to_string(i) + ": offset must be finite");
    }
    for (const auto& [j, angle] : frozen_) {
        if (j < 0 || j >= n_joints()) throw ConfigError("frozen joint index " + std::to_string(j) + " out of range");
        if (!std::isfinite(angle)) throw ConfigError("frozen joint " + std::to_string(j) + ": angle must be finite");
    }
    for (int j = 0; j < n_joints(); ++j) {
        if (!frozen_.contains(j)) actuated_.push_back(j);
    }
    if (actuated_.empty()) throw ConfigError("kinematic chain has no actuated joints");
    ee_point_ = n_points() - 1;
}

void KinematicChain::set_ee_point(int id) {
    if (id < 0 || id >= n_points()) throw ConfigError("end-effector point index out of range");
    ee_point_ = id;
}

int KinematicChain::point_index(const std::string& name) const {
    for (int i = 0; i < n_points(); ++i) {
        if (points_[static_cast<std::size_t>(i)].name == name) return i;
    }
    throw ConfigError("unknown control point '" + name + "'");
}

KinematicChain KinematicChain::with_frozen(std::map<int, double> frozen) const {
    KinematicChain out(joints_, points_, std::move(frozen), base_);
    out.ee_point_ = ee_point_;
    return out;
}

KinematicChain KinematicChain::translated(const Eigen::Vector3d& shift) const {
    KinematicChain out(joints_, points_, frozen_, base_ + shift);
    out.ee_point_ = ee_point_;
    return out;
}

Eigen::VectorXd KinematicChain::expand(const Eigen::Ref<const Eigen::VectorXd>& q) const {
    if (q.size() != n_q())
        throw DimensionError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                             std::to_string(n_q()) + " actuated joints");
    Eigen::VectorXd full(n_joints());
    for (int a = 0; a < n_q(); ++a) full(actuated_[static_cast<std::size_t>(a)]) = q(a);
    for (const auto& [j, angle] : frozen_) full(j) = angle;
    return full;
}

ChainPose chain_pose(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q) {
    const Eigen::VectorXd theta = chain.expand(q);
    const int n = chain.n_joints();
    ChainPose pose;
    pose.R.resize(static_cast<std::size_t>(n));
    pose.origin.resize(static_cast<std::size_t>(n));
    pose.axis.resize(static_cast<std::size_t>(n));
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d p = chain.base();
    for (int j = 0; j < n; ++j) {
        const auto& jt = chain.joints()[static_cast<std::size_t>(j)];
        const auto js = static_cast<std::size_t>(j);
        p += R * jt.origin;
        pose.origin[js] = p;
        pose.axis[js] = R * jt.axis;
        R = R * Eigen::AngleAxisd(theta(j), jt.axis).toRotationMatrix();
        pose.R[js] = R;
    }
    return pose;
}

Eigen::Vector3d point_position(const KinematicChain& chain, const ChainPose& pose, int point_id) {
    const auto& pt = chain.points()[static_cast<std::size_t>(point_id)];
    const auto link = static_cast<std::size_t>(pt.link);
    return pose.origin[link] + pose.R[link] * pt.offset;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> point_jacobian(const KinematicChain& chain, const ChainPose& pose,
                                                        int point_id) {
    const Eigen::Vector3d p = point_position(chain, pose, point_id);
    const int link = chain.points()[static_cast<std::size_t>(point_id)].link;
    Eigen::Matrix<double, 3, Eigen::Dynamic> J = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, chain.n_q());
    for (int a = 0; a < chain.n_q(); ++a) {
        const int j = chain.actuated()[static_cast<std::size_t>(a)];
        if (j > link) break;
        const auto js = static_cast<std::size_t>(j);
        J.col(a) = pose.axis[js].cross(p - pose.origin[js]);
    }
    return J;
}

std::vector<Eigen::Vector3d> forward_points(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q) {
    const ChainPose pose = chain_pose(chain, q);
    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<std::size_t>(chain.n_points()));
    for (int i = 0; i < chain.n_points(); ++i) out.push_back(point_position(chain, pose, i));
    return out;
}

namespace {

DistanceResult nearest(const KinematicChain& chain, const ChainPose& pose, const Obstacle& obs) {
    DistanceResult best{std::numeric_limits<double>::infinity(), 0};
    for (int i = 0; i < chain.n_points(); ++i) {
        const double d = (point_position(chain, pose, i) - obs.center).norm() - obs.radius;
        if (d < best.d) best = {d, i};
    }
    return best;
}

}  // namespace

DistanceResult distance(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q, const Obstacle& obs) {
    return nearest(chain, chain_pose(chain, q), obs);
}

double point_distance(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q, const Obstacle& obs,
                      int point_id) {
    const ChainPose pose = chain_pose(chain, q);
    return (point_position(chain, pose, point_id) - obs.center).norm() - obs.radius;
}

DistanceJacobian distance_jacobian(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q,
                                   const Obstacle& obs, double h) {
    DistanceJacobian out;
    const ChainPose pose0 = chain_pose(chain, q);
    const DistanceResult base = nearest(chain, pose0, obs);
    out.point_id = base.point_id;
    out.grad.resize(chain.n_q());
    Eigen::VectorXd qp = q;
    for (int a = 0; a < chain.n_q(); ++a) {
        qp(a) = q(a) + h;
        const ChainPose pp = chain_pose(chain, qp);
        qp(a) = q(a) - h;
        const ChainPose pm = chain_pose(chain, qp);
        qp(a) = q(a);

        const double dp = (point_position(chain, pp, base.point_id) - obs.center).norm() - obs.radius;
        const double dm = (point_position(chain, pm, base.point_id) - obs.center).norm() - obs.radius;
        const bool plus_switch = nearest(chain, pp, obs).point_id != base.point_id;
        const bool minus_switch = nearest(chain, pm, obs).point_id != base.point_id;
        if (plus_switch != minus_switch) {
            out.degenerate = true;
            out.grad(a) = plus_switch ? (base.d - dm) / h : (dp - base.d) / h;
        } else {
            out.degenerate = out.degenerate || plus_switch;
            out.grad(a) = (dp - dm) / (2.0 * h);
        }
    }
    return out;
}

Eigen::RowVectorXd distance_jacobian_analytic(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q,
                                              const Obstacle& obs, int point_id) {
    const ChainPose pose = chain_pose(chain, q);
    const Eigen::Vector3d rel = point_position(chain, pose, point_id) - obs.center;
    const double rho = rel.norm();
    if (rho == 0.0) return Eigen::RowVectorXd::Zero(chain.n_q());
    return (rel / rho).transpose() * point_jacobian(chain, pose, point_id);
}

}  // namespace absc
