//! Gripper geometry: the eight pad corners and the closing region of a grasp.

use uncertain_grasp::cloud::{Point3, Vector3};
use uncertain_grasp::gripper::{closing_region, contact_points, GraspPose, GripperModel};

fn main() -> uncertain_grasp::Result<()> {
    let g = GripperModel::default();
    println!(
        "opening {} m, finger depth {} m, finger width {} m",
        g.max_opening, g.finger_depth, g.finger_width
    );
    // Top-down grasp 10 cm above the table, jaws closing along x.
    let pose = GraspPose::from_axes(Point3::new(0.0, 0.0, 0.1), -Vector3::z(), Vector3::x())?;
    for (k, c) in contact_points(&g, &pose).iter().enumerate() {
        println!("corner {k}: [{:+.4} {:+.4} {:+.4}]", c.x, c.y, c.z);
    }
    let region = closing_region(&g, &pose);
    println!("closing region volume {:.3e} m^3", region.volume());
    for p in [Point3::new(0.0, 0.0, 0.1), Point3::new(0.05, 0.0, 0.1)] {
        println!("{p:?} inside: {}", region.contains(&p));
    }
    Ok(())
}
