mod common;

use common::*;
use egonet::math::{Quat, Vec3};
use egonet::navigation::*;
use proptest::prelude::*;

#[test]
fn easing() {
    assert_eq!(ease(0.0), 0.0);
    assert_eq!(ease(1.0), 1.0);
    assert_eq!(ease(0.5), 0.5);
    assert_eq!(ease(-3.0), 0.0);
    assert_eq!(ease(2.0), 1.0);
    let h = 1e-6;
    assert!((ease(h) - ease(0.0)) / h < 1e-6);
    assert!((ease(1.0) - ease(1.0 - h)) / h < 1e-6);
    let mut prev = 0.0;
    for i in 1..=1000 {
        let e = ease(i as f64 / 1000.0);
        assert!(e >= prev);
        prev = e;
    }
}

#[test]
fn flying() {
    let params = NavParams::new(4.0).unwrap();
    let pose = Pose::at(Vec3::new(1.0, 2.0, 3.0));
    assert_eq!(fly_step(&pose, 0.0, 0.0, 1.0, &params), pose);
    let ahead = fly_step(&pose, 0.0, 1.0, 1.0, &params);
    assert!((ahead.position - Vec3::new(1.0, 2.0, -1.0)).norm() < 1e-12);
    assert_eq!(ahead.orientation, pose.orientation);
    let back = fly_step(&ahead, 0.0, -1.0, 1.0, &params);
    assert!((back.position - pose.position).norm() < 1e-9);
    let diagonal = fly_step(&pose, 1.0, 1.0, 1.0, &params);
    assert!(((diagonal.position - pose.position).norm() - 4.0).abs() < 1e-9);
    assert!(NavParams::new(0.0).is_err());
}

#[test]
fn jumps_and_teleports() {
    let orientation = look_rotation(&Vec3::new(1.0, 2.0, -3.0));
    let pose = Pose::looking(Vec3::new(0.0, 0.0, 0.0), orientation);
    let target = Vec3::new(6.0, -3.0, 9.0);
    let anim = start_jump(10.0, &pose, 4, target);
    assert_eq!(jump_sample(&anim, &pose, 10.0).position, pose.position);
    assert!((jump_sample(&anim, &pose, 13.0).position - target).norm() <= 1e-9);
    assert!((jump_sample(&anim, &pose, 11.5).position - target / 2.0).norm() <= 1e-9);
    assert_eq!(jump_sample(&anim, &pose, 11.5).orientation, orientation);

    let far = Pose::at(Vec3::new(0.0, 0.0, 100.0));
    let tr = teleport(0.0, &pose, &far, TELEPORT_SECONDS);
    assert_eq!(tr.sample(&pose, 0.0).position, pose.position);
    assert_eq!(tr.sample(&pose, 2.0).position, far.position);
    assert!((tr.sample(&pose, 1.0).position - Vec3::new(0.0, 0.0, 50.0)).norm() < 1e-9);
    assert_eq!(tr.sample(&pose, 1.0).orientation, orientation);
    assert_eq!(teleport(0.0, &pose, &far, 0.0).sample(&pose, 0.0).position, far.position);
}

#[test]
fn overview_frames_everything() {
    let single = overview_pose(&[Vec3::zeros()]).unwrap();
    assert_eq!(single.position, Vec3::new(0.0, 0.0, 2.5 * MIN_OVERVIEW_RADIUS));
    let mut rng = TestRng(2);
    for _ in 0..20 {
        let pts: Vec<Vec3> = (0..200).map(|_| rng.vec3(80.0)).collect();
        let pose = overview_pose(&pts).unwrap();
        assert_eq!(pose, overview_pose(&pts).unwrap());
        for p in &pts {
            let angle = angle_from(&pose, p);
            assert!(angle <= 45.0, "{angle}");
        }
    }
}

fn angle_from(pose: &Pose, p: &Vec3) -> f64 {
    angular_deviation(&pose.position, &pose.forward(), p).unwrap()
}

#[test]
fn angles() {
    let o = Vec3::zeros();
    let t = Vec3::new(0.0, 3.0, 0.0);
    assert_eq!(angular_deviation(&o, &Vec3::y(), &t).unwrap(), 0.0);
    assert_eq!(angular_deviation(&o, &-Vec3::y(), &t).unwrap(), 180.0);
    assert!((angular_deviation(&o, &Vec3::x(), &t).unwrap() - 90.0).abs() < 1e-12);
    assert!(matches!(angular_deviation(&o, &Vec3::x(), &o), Err(egonet::Error::UndefinedDirection)));
}

#[test]
fn picking() {
    let pts = vec![Vec3::new(0.0, 0.0, -10.0), Vec3::new(0.0, 0.0, -20.0), Vec3::new(5.0, 0.0, -5.0)];
    let ray = Ray::new(Vec3::zeros(), -Vec3::z()).unwrap();
    assert_eq!(pick_node(&ray, &pts, 1.0), Some(0));
    let miss = Ray::new(Vec3::zeros(), Vec3::y()).unwrap();
    assert_eq!(pick_node(&miss, &pts, 1.0), None);
    let side = Ray::toward(Vec3::zeros(), pts[2]).unwrap();
    assert_eq!(pick_node(&side, &pts, 1.0), Some(2));
}

/// Nearest sphere hit by brute-force marching along the ray.
fn marched_pick(ray: &Ray, pts: &[Vec3], radius: f64) -> Option<usize> {
    let step = 0.01;
    for i in 0..20_000 {
        let x = ray.origin + ray.direction * (i as f64 * step);
        let hit = pts
            .iter()
            .enumerate()
            .filter(|(_, c)| (x - *c).norm() <= radius)
            .min_by(|a, b| (x - a.1).norm().total_cmp(&(x - b.1).norm()));
        if let Some((j, _)) = hit {
            return Some(j);
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pick_matches_marching(seed in any::<u64>()) {
        let mut rng = TestRng(seed);
        let pts: Vec<Vec3> = (0..30).map(|_| rng.vec3(40.0)).collect();
        let origin = rng.vec3(5.0);
        let target = pts[rng.below(pts.len())];
        let ray = Ray::toward(origin, target + rng.vec3(0.5)).unwrap();
        let picked = pick_node(&ray, &pts, 1.5);
        let marched = marched_pick(&ray, &pts, 1.5);
        // Marching can only miss grazing hits thinner than its step.
        if marched.is_some() {
            prop_assert_eq!(picked, marched);
        }
    }

    #[test]
    fn fly_is_frame_rate_independent(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, dt in 0.001f64..1.0,
        q in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let params = NavParams::new(7.5).unwrap();
        let orientation = Quat::from_quaternion(nalgebra::Quaternion::new(q[0] + 1.5, q[1], q[2], q[3]));
        let pose = Pose::looking(Vec3::new(1.0, 1.0, 1.0), orientation);
        let once = fly_step(&pose, ax, ay, dt, &params);
        let twice = fly_step(&fly_step(&pose, ax, ay, dt / 2.0, &params), ax, ay, dt / 2.0, &params);
        prop_assert!((once.position - twice.position).norm() < 1e-9);
        prop_assert_eq!(once.orientation, pose.orientation);
        prop_assert!((once.position - pose.position).norm() <= params.max_fly_speed * dt + 1e-9);
    }
}
