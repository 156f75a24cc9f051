//! File formats read back exactly what was written.

mod common;

use proptest::prelude::*;
use vdyn::eval::io::{
    read_json, read_trajectory_csv, write_json, write_trajectory_csv, ScalerFile, WeightFile,
};
use vdyn::vehicle::ModelKind;
use vdyn::{ExogenousInput, Trajectory, ZScoreScaler};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6, Just(0.0), Just(-0.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectory_csv(rows in 1usize..20, nine in any::<bool>(), vals in prop::collection::vec(finite(), 20 * 11)) {
        let n = if nine { 9 } else { 7 };
        let times: Vec<f64> = (0..rows).map(|i| i as f64 * 0.1).collect();
        let states = vals[..rows * n].to_vec();
        let inputs = (0..rows).map(|i| ExogenousInput::new(vals[200 + i % 20], vals[199 - i])).collect();
        let traj = Trajectory::new(times, n, states, inputs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trajectory_csv(&path, &traj).unwrap();
        let back = read_trajectory_csv(&path).unwrap();
        prop_assert_eq!(back.states_flat().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                        traj.states_flat().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(back, traj);
    }

    #[test]
    fn weights_and_scaler_json(
        hidden in 1usize..16,
        ude in any::<bool>(),
        seed in any::<u64>(),
        vals in prop::collection::vec(finite(), 300),
        stds in prop::collection::vec(1e-3f64..1e3, 9),
    ) {
        let model = if ude { ModelKind::Ude } else { ModelKind::Node };
        let dims = model.dims(hidden);
        let n = vdyn::nn::param_count(dims);
        let w = WeightFile {
            model,
            dims,
            seed,
            learning_rate: 0.025,
            iterations: 500,
            config_hash: "0123abcd".into(),
            theta: vals.iter().cycle().take(n).copied().collect(),
        };
        let s = ScalerFile {
            config_hash: "0123abcd".into(),
            scaler: ZScoreScaler::from_parts(vals[..9].to_vec(), stds).unwrap(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_json(&dir.path().join("w.json"), &w).unwrap();
        write_json(&dir.path().join("s.json"), &s).unwrap();
        let w2: WeightFile = read_json(&dir.path().join("w.json")).unwrap();
        let s2: ScalerFile = read_json(&dir.path().join("s.json")).unwrap();
        prop_assert_eq!(w2.net().unwrap().into_theta(), w.net().unwrap().into_theta());
        prop_assert_eq!(w2, w);
        prop_assert_eq!(s2, s);
    }
}

#[test]
fn scaler_with_zero_std_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"config_hash":"x","scaler":{"means":[0,0,0,0,0,0,0,0,0],"stds":[1,1,1,0,1,1,1,1,1]}}"#,
    )
    .unwrap();
    assert!(read_json::<ScalerFile>(&path).is_err());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = read_trajectory_csv(std::path::Path::new("/nonexistent/x.csv")).unwrap_err();
    assert_eq!(err.class(), vdyn::error::ErrorClass::Io);
}
