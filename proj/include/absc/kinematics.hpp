#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace absc {

/// Step used by the finite-difference distance Jacobian [rad].
inline constexpr double kJointStep = 1e-5;

struct Joint {
    std::string name;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit, expressed in the parent frame
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();  // offset from the parent joint frame [m]
};

struct ControlPoint {
    std::string name;
    int link = 0;                                      // index of the joint whose frame carries the point
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();  // in that frame [m]
};

struct Obstacle {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

/// Revolute serial chain. All joint frames coincide in orientation at zero angle,
/// so each joint is fully described by its axis and its offset from the previous joint.
class KinematicChain {
public:
    KinematicChain(std::vector<Joint> joints, std::vector<ControlPoint> points, std::map<int, double> frozen = {},
                   Eigen::Vector3d base = Eigen::Vector3d::Zero());

    int n_joints() const { return static_cast<int>(joints_.size()); }
    /// Number of actuated (non-frozen) joints.
    int n_q() const { return static_cast<int>(actuated_.size()); }
    int n_points() const { return static_cast<int>(points_.size()); }

    const std::vector<Joint>& joints() const { return joints_; }
    const std::vector<ControlPoint>& points() const { return points_; }
    const std::map<int, double>& frozen() const { return frozen_; }
    const std::vector<int>& actuated() const { return actuated_; }
    const Eigen::Vector3d& base() const { return base_; }

    int ee_point() const { return ee_point_; }
    void set_ee_point(int id);
    int point_index(const std::string& name) const;

    KinematicChain with_frozen(std::map<int, double> frozen) const;
    KinematicChain translated(const Eigen::Vector3d& shift) const;

    /// Full joint vector with frozen joints filled in.
    Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& q) const;

private:
    std::vector<Joint> joints_;
    std::vector<ControlPoint> points_;
    std::map<int, double> frozen_;
    std::vector<int> actuated_;
    Eigen::Vector3d base_;
    int ee_point_ = 0;
};

/// World poses of every joint frame for one configuration.
struct ChainPose {
    std::vector<Eigen::Matrix3d> R;       // frame orientation after joint rotation
    std::vector<Eigen::Vector3d> origin;  // joint origin
    std::vector<Eigen::Vector3d> axis;    // joint axis in world
};

ChainPose chain_pose(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q);

Eigen::Vector3d point_position(const KinematicChain& chain, const ChainPose& pose, int point_id);

/// 3 x n_q positional Jacobian of a control point.
Eigen::Matrix<double, 3, Eigen::Dynamic> point_jacobian(const KinematicChain& chain, const ChainPose& pose,
                                                        int point_id);

std::vector<Eigen::Vector3d> forward_points(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q);

struct DistanceResult {
    double d = 0.0;
    int point_id = 0;
};

/// Signed distance (surface to point) of the nearest control point; ties go to the lowest id.
DistanceResult distance(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q, const Obstacle& obs);

/// Distance of one specific control point.
double point_distance(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q, const Obstacle& obs,
                      int point_id);

struct DistanceJacobian {
    Eigen::RowVectorXd grad;  // dd/dq over actuated joints [m/rad]
    int point_id = 0;
    bool degenerate = false;  // nearest point switches within +-h
};

/// Central differences with the nearest point pinned; one-sided where the nearest point switches.
DistanceJacobian distance_jacobian(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q,
                                   const Obstacle& obs, double h = kJointStep);

/// Analytic counterpart n' J for a given point.
Eigen::RowVectorXd distance_jacobian_analytic(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q,
                                              const Obstacle& obs, int point_id);

}  // namespace absc
