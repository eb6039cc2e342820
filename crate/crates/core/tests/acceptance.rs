//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uncertain_grasp::cli::{cmd_eval, PipelineConfig};
use uncertain_grasp::cloud::{apply_transform, Point3, PointCloud, RigidTransform, Vector3, OBB_TOLERANCE};
use uncertain_grasp::completion::EnsembleStack;
use uncertain_grasp::eval::{
    adversarial_scenes, judge_grasp, mirror_backend, run_experiment, run_scene, ExperimentConfig, Method,
};
use uncertain_grasp::gripper::{GraspCandidate, GraspPose, GraspSource, GripperModel};
use uncertain_grasp::rescore::{crop_for_grasp, rescore, RescoreConfig, W_U_UNIT, W_U_UNNORMALIZED};
use uncertain_grasp::scene::{can_fixture, generate_fixture_set, Scene};
use uncertain_grasp::uncertainty::{aggregate, generated_band_fraction, UncertainCloud};

const AGGREGATE_ABS_TOL: f64 = 1e-12;
const AGGREGATE_BUDGET_S: f64 = 10.0;
const RESCORE_REL_TOL: f64 = 1e-9;
const STD_BAND_M: (f64, f64) = (0.002, 0.006);
const STD_BAND_MIN_FRACTION: f64 = 0.8;
const STD_BAND_BUDGET_S: f64 = 30.0;
const FAR_SIDE_MIN_SCENES: usize = 9;
const PRECISION_MARGIN: f64 = 0.10;
const THROUGHPUT_BUDGET_S: f64 = 2.0;
const RIGID_PENALTY_TOL: f64 = 1e-9;

/// Seed of the 10-scene standard set and of the adversarial draw.
const FIXTURE_SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> RigidTransform {
    let axis = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    let axis = axis.try_normalize(1e-6).unwrap_or_else(Vector3::z);
    RigidTransform::from_axis_angle(axis, rng.random_range(-3.1..3.1), Vector3::zeros())
}

fn random_transform(rng: &mut ChaCha8Rng) -> RigidTransform {
    let r = random_rotation(rng);
    let t = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    RigidTransform::new(*r.rotation(), t).unwrap()
}

fn candidate(center: Point3, rot: &RigidTransform, score: f64) -> GraspCandidate {
    let pose = RigidTransform::new(*rot.rotation(), center.coords).unwrap();
    GraspCandidate::new(GraspPose::new(pose), score, GraspSource::Imported).unwrap()
}

/// Scores sorted descending, with deliberate ties.
fn ranked_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(1..40) as f64 * 50.0).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Per-point, per-coordinate two-pass loop.
fn brute_force_aggregate(passes: &[Vec<Point3>]) -> (Vec<Point3>, Vec<f64>) {
    let t = passes.len();
    let n = passes[0].len();
    let mut mean = Vec::with_capacity(n);
    let mut std = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = [0.0; 3];
        let mut var = 0.0;
        for c in 0..3 {
            let mut sum = 0.0;
            for pass in passes {
                sum += pass[i][c];
            }
            m[c] = sum / t as f64;
            let mut sq = 0.0;
            for pass in passes {
                let d = pass[i][c] - m[c];
                sq += d * d;
            }
            var += sq / (t - 1) as f64;
        }
        mean.push(Point3::new(m[0], m[1], m[2]));
        std.push(var.sqrt());
    }
    (mean, std)
}

fn aggregation_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let t = [2, 5, 60][case % 3];
        let n = [16, 512, 2048][(case / 3) % 3];
        let p = rng.random_range(0..n / 2);
        let observed: Vec<Point3> = (0..p)
            .map(|_| Point3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(0.0..0.2)))
            .collect();
        let base: Vec<Point3> = (p..n)
            .map(|_| Point3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(0.0..0.2)))
            .collect();
        let passes: Vec<Vec<Point3>> = (0..t)
            .map(|_| {
                let mut pts = observed.clone();
                pts.extend(base.iter().map(|b| {
                    b + Vector3::new(
                        rng.random_range(-0.005..0.005),
                        rng.random_range(-0.005..0.005),
                        rng.random_range(-0.005..0.005),
                    )
                }));
                pts
            })
            .collect();
        let stack = EnsembleStack::new(passes.iter().map(|p| PointCloud::new(p.clone()).unwrap()).collect(), p).unwrap();
        let uc = aggregate(&stack).unwrap();
        let (mean, std) = brute_force_aggregate(&passes);
        for i in 0..n {
            worst = worst.max((uc.mean()[i] - mean[i]).abs().max());
            worst = worst.max((uc.std()[i] - std[i]).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= AGGREGATE_ABS_TOL && secs < AGGREGATE_BUDGET_S,
        format!("max |diff| {worst:.1e} (tol {AGGREGATE_ABS_TOL:.0e}), {secs:.2} s (budget {AGGREGATE_BUDGET_S} s)"),
    )
}

/// Random cloud: `p` observed points with zero std, the rest generated with
/// std up to 1 cm.
fn random_uncertain(rng: &mut ChaCha8Rng, n: usize, p: usize, extent: f64) -> UncertainCloud {
    let pts: Vec<Point3> = (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-extent..extent),
                rng.random_range(-extent..extent),
                rng.random_range(-extent..extent),
            )
        })
        .collect();
    let std: Vec<f64> = (0..n).map(|i| if i < p { 0.0 } else { rng.random_range(0.0..0.01) }).collect();
    UncertainCloud::new(PointCloud::new(pts).unwrap(), std, p, 60).unwrap()
}

fn random_candidates(rng: &mut ChaCha8Rng, uc: &UncertainCloud, k: usize) -> Vec<GraspCandidate> {
    ranked_scores(rng, k)
        .into_iter()
        .map(|s| {
            let center = uc.mean()[rng.random_range(0..uc.len())];
            candidate(center, &random_rotation(rng), s)
        })
        .collect()
}

/// Indices whose grasp-frame coordinates lie within the half extents plus
/// the containment slack, computed axis by axis.
fn brute_force_crop(cloud: &PointCloud, cand: &GraspCandidate, g: &GripperModel) -> Vec<usize> {
    let r = cand.grasp.pose.rotation();
    let c = cand.grasp.center();
    let h = g.half_extents();
    let mut out = Vec::new();
    for (i, p) in cloud.iter().enumerate() {
        let d = p - c;
        let inside = (0..3).all(|axis| {
            let local = r[(0, axis)] * d.x + r[(1, axis)] * d.y + r[(2, axis)] * d.z;
            local.abs() <= h[axis] + OBB_TOLERANCE
        });
        if inside {
            out.push(i);
        }
    }
    out
}

fn rescore_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = GripperModel::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..50 {
        let uc = random_uncertain(&mut rng, 2000, 500, 0.1);
        let cands = random_candidates(&mut rng, &uc, 15);
        for w_u in [0.0, W_U_UNIT, W_U_UNNORMALIZED] {
            let list = rescore(&cands, &uc, &g, &RescoreConfig { w_u, ..Default::default() }).unwrap();
            for e in &list.entries {
                let sigma: f64 = brute_force_crop(uc.mean(), &e.candidate, &g).iter().map(|&i| uc.std()[i]).sum();
                let want = e.candidate.score - w_u * sigma;
                let scale = e.candidate.score.abs().max(w_u * sigma).max(f64::MIN_POSITIVE);
                worst = worst.max((e.rescored - want).abs() / scale);
                checked += 1;
            }
        }
    }
    outcome(
        worst <= RESCORE_REL_TOL,
        format!("{checked} candidates over W_u in {{0, 1e-1, 1e5}}, max relative error {worst:.1e} (tol {RESCORE_REL_TOL:.0e})"),
    )
}

fn zero_weight_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = GripperModel::default();
    let uc = random_uncertain(&mut rng, 400, 100, 0.08);
    let mut failures = 0;
    for _ in 0..1000 {
        let k = rng.random_range(1..=30);
        let cands = random_candidates(&mut rng, &uc, k);
        let list = rescore(&cands, &uc, &g, &RescoreConfig { w_u: 0.0, ..Default::default() }).unwrap();
        failures += usize::from(!list.is_identity());
    }
    outcome(failures == 0, format!("{failures}/1000 lists reordered"))
}

fn zero_uncertainty_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = GripperModel::default();
    let mut failures = 0;
    let mut runs = 0;
    for _ in 0..100 {
        // Observed points near the origin, generated ones 10 m away.
        let n_obs = rng.random_range(50..400);
        let mut pts: Vec<Point3> = (0..n_obs)
            .map(|_| Point3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
            .collect();
        pts.extend((0..200).map(|_| Point3::new(10.0 + rng.random_range(-0.1..0.1), 0.0, rng.random_range(-0.1..0.1))));
        let std: Vec<f64> = (0..pts.len()).map(|i| if i < n_obs { 0.0 } else { rng.random_range(0.001..0.01) }).collect();
        let uc = UncertainCloud::new(PointCloud::new(pts).unwrap(), std, n_obs, 60).unwrap();
        let cands: Vec<GraspCandidate> = ranked_scores(&mut rng, 15)
            .into_iter()
            .map(|s| candidate(uc.mean()[rng.random_range(0..n_obs)], &random_rotation(&mut rng), s))
            .collect();
        for w_u in [0.0, W_U_UNIT, 1.0, W_U_UNNORMALIZED, 1e12] {
            let list = rescore(&cands, &uc, &g, &RescoreConfig { w_u, ..Default::default() }).unwrap();
            failures += usize::from(!list.is_identity() || list.entries.iter().any(|e| e.penalty != 0.0));
            runs += 1;
        }
    }
    outcome(failures == 0, format!("{failures}/{runs} runs reordered or penalized"))
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = GripperModel::default();
    let mut violations = 0;
    for _ in 0..500 {
        // One tight cluster per candidate, 0.2 m apart, so crops are disjoint.
        let k = rng.random_range(2..=15);
        let mut pts = Vec::new();
        let mut owner = Vec::new();
        for c in 0..k {
            for _ in 0..rng.random_range(20..80) {
                pts.push(Point3::new(
                    0.2 * c as f64 + rng.random_range(-0.01..0.01),
                    rng.random_range(-0.01..0.01),
                    rng.random_range(-0.01..0.01),
                ));
                owner.push(c);
            }
        }
        let std: Vec<f64> = (0..pts.len()).map(|_| rng.random_range(0.0..0.008)).collect();
        let cloud = PointCloud::new(pts).unwrap();
        let cands: Vec<GraspCandidate> = ranked_scores(&mut rng, k)
            .into_iter()
            .enumerate()
            .map(|(c, s)| candidate(Point3::new(0.2 * c as f64, 0.0, 0.0), &random_rotation(&mut rng), s))
            .collect();
        let cfg = RescoreConfig {
            w_u: if rng.random_bool(0.5) { W_U_UNNORMALIZED } else { W_U_UNIT },
            ..Default::default()
        };
        let target = rng.random_range(0..k);
        let factor = rng.random_range(1.0..10.0) + f64::EPSILON;
        let before = rescore(&cands, &UncertainCloud::new(cloud.clone(), std.clone(), 0, 60).unwrap(), &g, &cfg).unwrap();
        let inflated: Vec<f64> = std
            .iter()
            .zip(&owner)
            .map(|(s, &o)| if o == target { s * factor } else { *s })
            .collect();
        let after = rescore(&cands, &UncertainCloud::new(cloud, inflated, 0, 60).unwrap(), &g, &cfg).unwrap();
        let rank = |l: &uncertain_grasp::rescore::RankedList| l.new_rank_of(target + 1).unwrap();
        violations += usize::from(rank(&after) < rank(&before));
    }
    outcome(violations == 0, format!("{violations}/500 inflations improved the rank"))
}

fn crop_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = GripperModel::default();
    let h = g.half_extents();
    let mut mismatches = 0;
    let mut boundary_errors = 0;
    let mut boundary_points = 0;
    for case in 0..200 {
        // Every fourth grasp is axis aligned at the origin so boundary offsets
        // are exact; the rest are random.
        let aligned = case % 4 == 0;
        let rot = if aligned { RigidTransform::identity() } else { random_rotation(&mut rng) };
        let center = if aligned {
            Point3::origin()
        } else {
            Point3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
        };
        let cand = candidate(center, &rot, 1.0);
        let mut local: Vec<Vector3> = (0..rng.random_range(100..600))
            .map(|_| {
                Vector3::new(
                    rng.random_range(-0.06..0.06),
                    rng.random_range(-0.06..0.06),
                    rng.random_range(-0.06..0.06),
                )
            })
            .collect();
        let first_boundary = local.len();
        let offsets: &[f64] = if aligned { &[-1e-12, 0.0, 0.5e-12, 2e-12] } else { &[-1e-9, 1e-9] };
        for axis in 0..3 {
            for &d in offsets {
                for sign in [-1.0, 1.0] {
                    let mut v = Vector3::new(0.3 * h.x, -0.2 * h.y, 0.1 * h.z);
                    v[axis] = sign * (h[axis] + d);
                    local.push(v);
                }
            }
        }
        let pts: Vec<Point3> = local.iter().map(|v| center + rot.rotation() * v).collect();
        let cloud = PointCloud::new(pts).unwrap();
        let std: Vec<f64> = (0..cloud.len()).map(|_| rng.random_range(0.0..0.01)).collect();
        let uc = UncertainCloud::new(cloud, std, 0, 60).unwrap();
        let crop = crop_for_grasp(&uc, &cand, &g);
        let want = brute_force_crop(uc.mean(), &cand, &g);
        let stds_match = crop.stds.iter().zip(&crop.indices).all(|(s, &i)| *s == uc.std()[i]);
        mismatches += usize::from(crop.indices != want || !stds_match);
        for (j, v) in local.iter().enumerate().skip(first_boundary) {
            let excess = (0..3).map(|a| v[a].abs() - h[a]).fold(f64::MIN, f64::max);
            let expected = excess <= OBB_TOLERANCE;
            boundary_errors += usize::from(crop.indices.contains(&j) != expected);
            boundary_points += 1;
        }
    }
    outcome(
        mismatches == 0 && boundary_errors == 0,
        format!("{mismatches}/200 crops differ from brute force; {boundary_errors}/{boundary_points} boundary points misclassified"),
    )
}

fn std_band() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    let fixture = can_fixture(0).build().unwrap();
    let out = run_scene(&fixture, &cfg, &mirror_backend(&cfg.completer)).unwrap();
    let uc = &out.uncertain;
    let fraction = generated_band_fraction(uc, STD_BAND_M.0, STD_BAND_M.1);
    let observed_zero = uc.std()[..uc.partial_count()].iter().all(|s| *s == 0.0);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        fraction >= STD_BAND_MIN_FRACTION && observed_zero && secs < STD_BAND_BUDGET_S && uc.passes_used() == 60,
        format!(
            "T={}, {:.1}% of generated stds in [2, 6] mm (need {:.0}%), observed all zero: {observed_zero}, {secs:.2} s",
            uc.passes_used(),
            100.0 * fraction,
            100.0 * STD_BAND_MIN_FRACTION
        ),
    )
}

fn far_side_demotion() -> Outcome {
    let cfg = ExperimentConfig::default();
    let fixtures: Vec<_> = generate_fixture_set(10, FIXTURE_SEED).iter().map(|s| s.build().unwrap()).collect();
    let out = run_experiment(&fixtures, &cfg).unwrap();
    let mut passing = 0;
    let mut lines = Vec::new();
    for s in &out.scenes {
        let hidden = s.hidden_direction(&Vector3::z()).unwrap();
        let (mut far, mut near) = (Vec::new(), Vec::new());
        for r in &s.records {
            let depth = (Point3::from(r.center) - s.partial_centroid).dot(&hidden);
            if depth > 0.0 { &mut far } else { &mut near }.push(r.penalty_m);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let ok = !far.is_empty() && !near.is_empty() && mean(&far) > mean(&near);
        passing += usize::from(ok);
        if !ok {
            lines.push(s.scene_id.clone());
        }
    }
    outcome(
        passing >= FAR_SIDE_MIN_SCENES,
        format!("{passing}/10 scenes penalize the hidden side more (need {FAR_SIDE_MIN_SCENES}); not: {lines:?}"),
    )
}

fn adversarial_separation() -> Outcome {
    let cfg = ExperimentConfig::adversarial();
    let scenes = adversarial_scenes(20, FIXTURE_SEED, &cfg).unwrap();
    let out = run_experiment(&scenes, &cfg).unwrap();
    let p5 = |m| out.report.method(m).unwrap().precision_at_5;
    let (base, res) = (p5(Method::Baseline), p5(Method::Rescored));
    outcome(
        res >= base + PRECISION_MARGIN - 1e-12,
        format!("20 trials: baseline P@5 {base:.2}, rescored P@5 {res:.2} (need +{PRECISION_MARGIN:.2})"),
    )
}

fn shipped_scenes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/scenes")
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let cfg = PipelineConfig {
            output: d.path().to_path_buf(),
            ..Default::default()
        };
        if let Err(e) = cmd_eval(&shipped_scenes(), &cfg) {
            return outcome(false, format!("eval failed: {e}"));
        }
    }
    let same = ["report.json", "trials.csv"]
        .iter()
        .all(|f| std::fs::read(dirs[0].path().join(f)).unwrap() == std::fs::read(dirs[1].path().join(f)).unwrap());
    outcome(same, format!("report.json and trials.csv byte-identical across two runs: {same}"))
}

fn throughput() -> Outcome {
    let cfg = ExperimentConfig::default();
    let fixture = generate_fixture_set(1, FIXTURE_SEED)[0].build().unwrap();
    let factory = mirror_backend(&cfg.completer);
    run_scene(&fixture, &cfg, &factory).unwrap();
    let start = Instant::now();
    let out = run_scene(&fixture, &cfg, &factory).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        secs < THROUGHPUT_BUDGET_S && out.uncertain.len() == 2048 && out.candidates.len() == 15,
        format!(
            "2048 points, T=60, {} candidates: {secs:.3} s wall (budget {THROUGHPUT_BUDGET_S} s; complete {:.0} ms, sample {:.0} ms, rescore {:.1} ms)",
            out.candidates.len(),
            out.timings.complete_ms,
            out.timings.sample_ms,
            out.timings.rescore_ms
        ),
    )
}

fn rigid_invariance() -> Outcome {
    let cfg = ExperimentConfig::default();
    let fixture = can_fixture(0).build().unwrap();
    let out = run_scene(&fixture, &cfg, &mirror_backend(&cfg.completer)).unwrap();
    let base = rescore(&out.candidates, &out.uncertain, &cfg.gripper, &cfg.rescore).unwrap();
    let verdicts: Vec<_> = out
        .candidates
        .iter()
        .map(|c| judge_grasp(c, &fixture.scene, &cfg.gripper, &cfg.oracle))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst, mut perm_changes, mut verdict_changes): (f64, usize, usize) = (0.0, 0, 0);
    for _ in 0..50 {
        let t = random_transform(&mut rng);
        let uc = UncertainCloud::new(
            apply_transform(out.uncertain.mean(), &t),
            out.uncertain.std().to_vec(),
            out.uncertain.partial_count(),
            out.uncertain.passes_used(),
        )
        .unwrap();
        let cands: Vec<GraspCandidate> = out
            .candidates
            .iter()
            .map(|c| GraspCandidate::new(c.grasp.transformed(&t), c.score, c.source).unwrap())
            .collect();
        let moved = rescore(&cands, &uc, &cfg.gripper, &cfg.rescore).unwrap();
        perm_changes += usize::from(moved.permutation != base.permutation);
        for (a, b) in base.entries.iter().zip(&moved.entries) {
            worst = worst.max((a.penalty - b.penalty).abs());
        }
        let scene = Scene::new(
            apply_transform(&fixture.scene.ground_truth, &t),
            fixture.scene.table_plane,
            t.compose(&fixture.scene.object_pose),
        );
        verdict_changes += cands
            .iter()
            .zip(&verdicts)
            .filter(|(c, v)| judge_grasp(c, &scene, &cfg.gripper, &cfg.oracle) != **v)
            .count();
    }
    outcome(
        worst <= RIGID_PENALTY_TOL && perm_changes == 0 && verdict_changes == 0,
        format!(
            "50 transforms: max penalty drift {worst:.1e} m (tol {RIGID_PENALTY_TOL:.0e}), {perm_changes} permutation changes, {verdict_changes} oracle verdict changes"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("aggregation matches brute force", aggregation_oracle),
        ("penalized score formula", rescore_formula),
        ("zero weight keeps order", zero_weight_identity),
        ("zero uncertainty keeps order", zero_uncertainty_identity),
        ("inflated uncertainty never helps", monotonicity),
        ("crop matches brute force", crop_oracle),
        ("std band on the can fixture", std_band),
        ("far side penalized more", far_side_demotion),
        ("adversarial Precision@5 separation", adversarial_separation),
        ("eval is byte-deterministic", determinism),
        ("single-scene throughput", throughput),
        ("rigid invariance", rigid_invariance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("[{}] {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
