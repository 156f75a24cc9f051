//! Reference data, scaler and measurement noise.

mod common;

use common::*;
use vdyn::config::Config;
use vdyn::solver::SampleId;
use vdyn::training::DataSet;

#[test]
fn samples_cover_the_full_horizon() {
    let data = dataset();
    for s in &data.samples {
        assert_eq!(s.clean.len(), 1001);
        assert_eq!(s.clean.n_states(), 9);
        assert_eq!(s.noisy.n_states(), 7);
        assert_eq!(s.split_index, 700);
        assert!((s.clean.times()[1000] - 100.0).abs() < 1e-9);
        // the maneuvers stay in the grip regime
        let v = s.clean.column(4);
        let beta = s.clean.column(5);
        assert!(v.iter().all(|&v| v > 15.0), "sample {:?}", s.id);
        assert!(beta.iter().all(|b| b.abs() < 0.2), "sample {:?}", s.id);
    }
}

#[test]
fn scaled_fit_sample_is_standard() {
    let data = dataset();
    let clean = data.sample(SampleId::Three).clean_single_track();
    let n = clean.len() as f64;
    let mut z = vec![0.0; 9];
    let (mut sum, mut sq) = (vec![0.0; 9], vec![0.0; 9]);
    for i in 0..clean.len() {
        data.scaler
            .transform_into(clean.state(i), &clean.inputs()[i], &mut z);
        for c in 0..9 {
            sum[c] += z[c];
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    for i in 0..clean.len() {
        data.scaler
            .transform_into(clean.state(i), &clean.inputs()[i], &mut z);
        for c in 0..9 {
            sq[c] += (z[c] - mean[c]).powi(2);
        }
    }
    for c in 0..9 {
        let std = (sq[c] / n).sqrt();
        assert!(mean[c].abs() < 1e-10, "channel {c} mean {}", mean[c]);
        assert!((std - 1.0).abs() < 1e-10, "channel {c} std {std}");
    }
}

#[test]
fn noise_has_the_configured_spread() {
    let data = dataset();
    let mut diffs = Vec::new();
    for s in &data.samples {
        let clean = s.clean_single_track();
        for i in 0..clean.len() {
            for c in 0..7 {
                diffs.push(
                    data.scaler.z(c, s.noisy.state(i)[c]) - data.scaler.z(c, clean.state(i)[c]),
                );
            }
        }
        // inputs are recorded clean
        assert_eq!(s.noisy.inputs(), clean.inputs());
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((0.023..=0.027).contains(&std), "empirical sigma {std}");
    assert!(mean.abs() < 3.0 * 0.025 / n.sqrt() * 2.0, "mean {mean}");
}

#[test]
fn generation_is_deterministic_and_seeded() {
    let a = DataSet::generate(&Config::default()).unwrap();
    let b = DataSet::generate(&Config::default()).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.noisy, y.noisy);
        assert_eq!(x.rng_seed, u64::from(x.id.number()));
    }
    assert_eq!(a.config_hash, b.config_hash);
    let mut cfg = Config::default();
    cfg.data.noise_seed_offset = 10;
    let c = DataSet::generate(&cfg).unwrap();
    assert_ne!(a.samples[0].noisy, c.samples[0].noisy);
    assert_eq!(a.samples[0].clean, c.samples[0].clean);
    assert_ne!(a.config_hash, c.config_hash);
}

#[test]
fn wheels_at_rest_act_as_a_brake() {
    // Starting with zero wheel speeds is a full lock at 25 m/s; the tires
    // scrub off almost all speed before the wheels catch up.
    let mut cfg = Config::default();
    cfg.data.rolling_wheels = false;
    let data = DataSet::generate(&cfg).unwrap();
    let v = data.sample(SampleId::Three).clean.column(4);
    assert!(v[100] < 2.0, "v(10 s) = {}", v[100]);
    assert!(dataset().sample(SampleId::Three).clean.column(4)[100] > 24.0);
}
