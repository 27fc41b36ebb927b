use hoicap::capture::{solve_sequence, SolverSettings};
use hoicap::geometry::{rotation_distance, rotation_from_axis_angle};
use hoicap::metrics::{mpjpe, FrameGeometry};
use hoicap::synth::{generate_assets, generate_sequence, SynthConfig};

fn run(config: &SynthConfig) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, usize) {
    let assets = generate_assets::<f64>(config).unwrap();
    let seq = generate_sequence(&assets, config).unwrap();
    let solved = solve_sequence(&assets, &seq.markers, &SolverSettings::default()).unwrap();
    let mut aae = Vec::new();
    let mut rot = Vec::new();
    let mut trans = Vec::new();
    let mut hand = Vec::new();
    let mut gaps = 0;
    for (s, g) in solved.iter().zip(&seq.ground_truth) {
        aae.push((s.object.omega - g.object.omega).abs().to_degrees());
        rot.push(
            rotation_distance(
                &rotation_from_axis_angle(&s.object.rotation),
                &rotation_from_axis_angle(&g.object.rotation),
            )
            .to_degrees(),
        );
        trans.push((s.object.translation - g.object.translation).norm() * 1000.0);
        let a = FrameGeometry::from_pose(&assets, s).unwrap();
        let b = FrameGeometry::from_pose(&assets, g).unwrap();
        hand.push(mpjpe(&a.right_joints, &b.right_joints).unwrap());
        hand.push(mpjpe(&a.left_joints, &b.left_joints).unwrap());
        gaps += usize::from(s.flags.left_gap || s.flags.right_gap || s.flags.object_gap);
    }
    (aae, rot, trans, hand, gaps)
}

fn max(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

#[test]
fn noise_free_sequence_is_recovered() {
    let config = SynthConfig {
        marker_noise_sigma: 0.0,
        dropout_rate: 0.0,
        ..Default::default()
    };
    let (aae, rot, trans, hand, gaps) = run(&config);
    eprintln!("aae {} rot {} trans {} hand {}", max(&aae), max(&rot), max(&trans), max(&hand));
    assert_eq!(gaps, 0);
    assert!(max(&aae) < 1e-6);
    assert!(max(&rot) < 1e-6);
    assert!(max(&trans) < 1e-6);
    assert!(max(&hand) < 1.0);
}

#[test]
fn noisy_sequence_with_dropout() {
    let config = SynthConfig {
        marker_noise_sigma: 0.0005,
        dropout_rate: 0.1,
        seed: 4,
        ..Default::default()
    };
    let (aae, _, trans, hand, _) = run(&config);
    let mut h = hand.clone();
    h.sort_by(f64::total_cmp);
    eprintln!("aae {} trans {} hand median {} max {}", max(&aae), max(&trans), h[h.len() / 2], max(&hand));
    assert!(max(&aae) < 2.0);
    assert!(h[h.len() / 2] < 5.0);
}
