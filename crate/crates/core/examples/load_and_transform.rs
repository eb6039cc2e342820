//! Point clouds: PLY round trip, rigid transforms and box containment.

use uncertain_grasp::cloud::{
    apply_transform, load_cloud, points_in_obb, save_cloud, CloudFormat, Obb, Point3, PointCloud, Precision,
    RigidTransform, SaveOptions, Vector3,
};

fn main() -> uncertain_grasp::Result<()> {
    // A 10 x 10 x 10 grid with 1 cm spacing.
    let points = (0..1000)
        .map(|i| Point3::new((i % 10) as f64, ((i / 10) % 10) as f64, (i / 100) as f64) * 0.01)
        .collect();
    let cloud = PointCloud::new(points)?;

    let dir = tempfile::tempdir().map_err(|e| uncertain_grasp::Error::io(".", e))?;
    let path = dir.path().join("grid.ply");
    let opts = SaveOptions {
        precision: Precision::F64,
        ..Default::default()
    };
    save_cloud(&cloud, &path, CloudFormat::PlyBinaryLe, &opts)?;
    let loaded = load_cloud(&path, CloudFormat::PlyBinaryLe)?.cloud;
    println!("round trip exact: {}", loaded == cloud);

    let t = RigidTransform::from_axis_angle(Vector3::z(), std::f64::consts::FRAC_PI_4, Vector3::new(0.1, 0.0, 0.0));
    let moved = apply_transform(&cloud, &t);
    println!("centroid {:?} -> {:?}", cloud.centroid().unwrap(), moved.centroid().unwrap());

    // The same box before and after the transform selects the same points.
    let obb = Obb::axis_aligned(Point3::new(0.045, 0.045, 0.045), Vector3::new(0.02, 0.02, 0.02))?;
    let moved_obb = Obb::new(t.transform_point(obb.center()), *t.rotation(), *obb.half_extents())?;
    let a = points_in_obb(&cloud, &obb);
    let b = points_in_obb(&moved, &moved_obb);
    println!("box holds {} points before, {} after; same indices: {}", a.len(), b.len(), a == b);
    Ok(())
}
