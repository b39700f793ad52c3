//! User pose, locomotion (fly, jump, teleport), easing, picking and the
//! angular-deviation measure.
//!
//! View convention: the head looks down its local `-Z` axis with `+X` to the
//! right and `+Y` up. Locomotion only ever moves the user; head orientation
//! belongs to the client and passes through every operation untouched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::math::{angle_between, centroid, Quat, Vec3};

/// Length of a node-to-node jump, ease-in/out included.
pub const JUMP_SECONDS: f64 = 3.0;
/// Default duration of the smooth overview/detail switch.
pub const TELEPORT_SECONDS: f64 = 2.0;
/// Time a simulated agent needs to pick the next node.
pub const SELECT_SECONDS: f64 = 0.75;
/// Straight-line flight time along the reference 5-node path.
pub const REFERENCE_FLIGHT_SECONDS: f64 = 25.0;
/// Bounding radius used for degenerate scenes.
pub const MIN_OVERVIEW_RADIUS: f64 = 1.0;
/// Overview distance from the centroid, in bounding radii.
pub const OVERVIEW_DISTANCE: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; fails on a zero or non-finite direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        let len = direction.norm();
        if !(len.is_finite() && len > 0.0) || !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::Input("ray needs a finite origin and non-zero direction".into()));
        }
        Ok(Self {
            origin,
            direction: direction / len,
        })
    }

    pub fn toward(origin: Vec3, target: Vec3) -> Result<Self> {
        Self::new(origin, target - origin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
    pub controller_ray: Ray,
}

impl Pose {
    pub fn at(position: Vec3) -> Self {
        Self::looking(position, Quat::identity())
    }

    pub fn looking(position: Vec3, orientation: Quat) -> Self {
        Self {
            position,
            orientation,
            controller_ray: Ray {
                origin: position,
                direction: orientation * -Vec3::z(),
            },
        }
    }

    pub fn forward(&self) -> Vec3 {
        self.orientation * -Vec3::z()
    }

    pub fn right(&self) -> Vec3 {
        self.orientation * Vec3::x()
    }

    /// Same pose translated to `position`; the controller ray moves along.
    pub fn moved_to(&self, position: Vec3) -> Self {
        let offset = position - self.position;
        Self {
            position,
            orientation: self.orientation,
            controller_ray: Ray {
                origin: self.controller_ray.origin + offset,
                direction: self.controller_ray.direction,
            },
        }
    }
}

/// Orientation whose forward axis points along `direction`, keeping `+Y` up
/// where possible.
pub fn look_rotation(direction: &Vec3) -> Quat {
    let up = if direction.cross(&Vec3::y()).norm() < 1e-9 {
        Vec3::z()
    } else {
        Vec3::y()
    };
    // `face_towards` aligns +Z, the view axis is -Z.
    Quat::face_towards(&-direction, &up)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavParams {
    /// Layout units per second.
    pub max_fly_speed: f64,
    pub jump_seconds: f64,
    pub teleport_seconds: f64,
}

impl NavParams {
    pub fn new(max_fly_speed: f64) -> Result<Self> {
        if !(max_fly_speed > 0.0 && max_fly_speed.is_finite()) {
            return Err(Error::Parameter("max_fly_speed must be positive".into()));
        }
        Ok(Self {
            max_fly_speed,
            jump_seconds: JUMP_SECONDS,
            teleport_seconds: TELEPORT_SECONDS,
        })
    }
}

/// Smootherstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
pub fn ease(t: f64) -> f64 {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Interpolation that is exact at both ends (`s = 0` gives `a`, `s = 1`
/// gives `b`, bit for bit).
pub fn blend(a: &Vec3, b: &Vec3, s: f64) -> Vec3 {
    a * (1.0 - s) + b * s
}

/// Kinematic flight: moves along the view forward/right axes at up to
/// `max_fly_speed`. The input vector is clamped to the unit disc.
pub fn fly_step(pose: &Pose, axis_x: f64, axis_y: f64, dt: f64, params: &NavParams) -> Pose {
    let mut input = nalgebra::Vector2::new(axis_x, axis_y);
    if !input.iter().all(|c| c.is_finite()) || dt <= 0.0 {
        return *pose;
    }
    let len = input.norm();
    if len > 1.0 {
        input /= len;
    }
    if input == nalgebra::Vector2::zeros() {
        return *pose;
    }
    let dir = pose.forward() * input.y + pose.right() * input.x;
    pose.moved_to(pose.position + dir * (params.max_fly_speed * dt))
}

/// Eased translation between two points over a fixed duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: Vec3,
    pub to: Vec3,
    pub start_time: f64,
    pub duration: f64,
}

impl Transition {
    /// Normalized, un-eased progress in `[0, 1]`.
    pub fn progress(&self, now: f64) -> f64 {
        if self.duration <= 0.0 {
            return 1.0;
        }
        ((now - self.start_time) / self.duration).clamp(0.0, 1.0)
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration.max(0.0)
    }

    pub fn is_finished(&self, now: f64) -> bool {
        self.progress(now) >= 1.0
    }

    pub fn position(&self, now: f64) -> Vec3 {
        blend(&self.from, &self.to, ease(self.progress(now)))
    }

    pub fn sample(&self, pose: &Pose, now: f64) -> Pose {
        pose.moved_to(self.position(now))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpAnimation {
    pub target_node: NodeId,
    pub transition: Transition,
}

pub fn start_jump(session_time: f64, pose: &Pose, target_node: NodeId, target_position: Vec3) -> JumpAnimation {
    JumpAnimation {
        target_node,
        transition: Transition {
            from: pose.position,
            to: target_position,
            start_time: session_time,
            duration: JUMP_SECONDS,
        },
    }
}

pub fn jump_sample(anim: &JumpAnimation, pose: &Pose, session_time: f64) -> Pose {
    anim.transition.sample(pose, session_time)
}

/// Smooth move between two poses; only the position is animated.
pub fn teleport(session_time: f64, pose: &Pose, target: &Pose, duration: f64) -> Transition {
    Transition {
        from: pose.position,
        to: target.position,
        start_time: session_time,
        duration: duration.max(0.0),
    }
}

/// Pose on the `+Z` axis at 2.5 bounding radii from the centroid, looking
/// at the centroid.
pub fn overview_pose(positions: &[Vec3]) -> Result<Pose> {
    if positions.is_empty() {
        return Err(Error::Parameter("overview needs at least one position".into()));
    }
    let c = centroid(positions);
    let radius = positions
        .iter()
        .map(|p| (p - c).norm())
        .fold(0.0, f64::max)
        .max(MIN_OVERVIEW_RADIUS);
    Ok(Pose::at(c + Vec3::z() * (OVERVIEW_DISTANCE * radius)))
}

/// Angle in degrees between a pointing ray and the direction from the ray
/// origin to `target`.
pub fn angular_deviation(origin: &Vec3, direction: &Vec3, target: &Vec3) -> Result<f64> {
    let to_target = target - origin;
    if to_target.norm() == 0.0 {
        return Err(Error::UndefinedDirection);
    }
    if direction.norm() == 0.0 {
        return Err(Error::Input("pointing direction is zero".into()));
    }
    Ok(angle_between(direction, &to_target).to_degrees())
}

/// Closest node whose sphere the ray enters in front of its origin. Nodes
/// whose sphere contains the origin (the node the user sits in) are skipped.
pub fn pick_node(ray: &Ray, positions: &[Vec3], node_radius: f64) -> Option<NodeId> {
    let r2 = node_radius * node_radius;
    let mut best: Option<(f64, NodeId)> = None;
    for (i, center) in positions.iter().enumerate() {
        let oc = ray.origin - center;
        let c = oc.norm_squared() - r2;
        if c < 0.0 {
            continue;
        }
        let b = oc.dot(&ray.direction);
        let disc = b * b - c;
        if disc < 0.0 {
            continue;
        }
        let t = -b - disc.sqrt();
        if t < 0.0 {
            continue;
        }
        if best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Total Euclidean length of a node path.
pub fn path_length(path: &[NodeId], positions: &[Vec3]) -> f64 {
    path.windows(2)
        .map(|w| (positions[w[1]] - positions[w[0]]).norm())
        .sum()
}

/// Fly speed that makes straight flight along `path` take the reference
/// flight time.
pub fn calibrate_fly_speed(path: &[NodeId], positions: &[Vec3]) -> Result<f64> {
    let len = path_length(path, positions);
    if !(len > 0.0) {
        return Err(Error::Parameter("reference path has zero length".into()));
    }
    Ok(len / REFERENCE_FLIGHT_SECONDS)
}
