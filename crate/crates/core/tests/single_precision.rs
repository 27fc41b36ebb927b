use hoicap::capture::{solve_sequence, SolverSettings};
use hoicap::fields::{field_bruteforce, field_fast, frame_fields};
use hoicap::metrics::{mpjpe, FrameGeometry};
use hoicap::synth::{generate_assets, generate_sequence, SynthConfig};

#[test]
fn f32_pipeline_runs_end_to_end() {
    let config = SynthConfig {
        frame_count: 12,
        marker_noise_sigma: 0.0,
        dropout_rate: 0.0,
        ..Default::default()
    };
    let assets = generate_assets::<f32>(&config).unwrap();
    let seq = generate_sequence(&assets, &config).unwrap();
    let solved = solve_sequence(&assets, &seq.markers, &SolverSettings::default()).unwrap();
    for (s, g) in solved.iter().zip(&seq.ground_truth) {
        assert!((s.object.omega - g.object.omega).abs().to_degrees() < 0.05);
        assert!((s.object.translation - g.object.translation).norm() < 1e-4);
        let a = FrameGeometry::from_pose(&assets, s).unwrap();
        let b = FrameGeometry::from_pose(&assets, g).unwrap();
        assert!(mpjpe(&a.right_joints, &b.right_joints).unwrap() < 1.0);
        assert!(mpjpe(&a.left_joints, &b.left_joints).unwrap() < 1.0);
    }

    let fields = frame_fields(&assets, &seq.ground_truth[0], 0.1).unwrap();
    for f in fields.fields() {
        assert!(f.distances.iter().all(|&d| (0.0..=0.1).contains(&d)));
    }
    let (base, top) = assets.object.pose(&seq.ground_truth[0].object).unwrap();
    let hand = assets.right.pose(&seq.ground_truth[0].right).unwrap();
    for (s, t) in [(&hand, &base), (&top, &hand)] {
        assert_eq!(field_fast(s, t, 0.1).unwrap(), field_bruteforce(s, t, 0.1).unwrap());
    }
}
