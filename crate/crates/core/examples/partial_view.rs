//! Single-view capture: hidden-point removal, table points, RANSAC removal.

use uncertain_grasp::scene::{capture_view, generate_fixture_set, render_partial_view, segment_plane, TablePatch};

fn main() -> uncertain_grasp::Result<()> {
    let fixture = generate_fixture_set(1, 7)[0].build()?;
    let gt = &fixture.scene.ground_truth;
    let visible = render_partial_view(&fixture.scene, &fixture.camera)?;
    println!(
        "{:?}: {} ground-truth points, {} visible ({:.0}%)",
        fixture.shape.unwrap(),
        gt.len(),
        visible.len(),
        100.0 * visible.len() as f64 / gt.len() as f64
    );

    let capture = capture_view(&fixture.scene, &fixture.camera, &TablePatch::default(), 1)?;
    let seg = segment_plane(&capture, 0.001, 100, 2)?;
    println!(
        "capture {} points -> table normal {:.3?}, {} object points after removal",
        capture.len(),
        seg.plane.normal(),
        seg.object.len()
    );
    Ok(())
}
