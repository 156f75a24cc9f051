#![allow(dead_code)]

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdyn::config::Config;
use vdyn::solver::{adjoint_gradient, rollout_with_gradient, simulate, SampleId, TimeGrid};
use vdyn::training::DataSet;
use vdyn::vehicle::{HybridModel, ModelKind};
use vdyn::{ExogenousInput, MlpParams, Result, Trajectory, ZScoreScaler};

/// Central-difference step shared by every gradient check.
pub const FD_STEP: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Default data set, generated once per test binary.
pub fn dataset() -> &'static DataSet {
    static DATA: OnceLock<DataSet> = OnceLock::new();
    DATA.get_or_init(|| DataSet::generate(&Config::default()).expect("default data set"))
}

pub fn scaler() -> &'static ZScoreScaler {
    &dataset().scaler
}

/// A state in the operating envelope of the reference maneuvers.
pub fn random_state(r: &mut impl Rng) -> [f64; 7] {
    [
        r.gen_range(-200.0..200.0),
        r.gen_range(-200.0..200.0),
        r.gen_range(-3.0..3.0),
        r.gen_range(-0.05..0.05),
        r.gen_range(15.0..30.0),
        r.gen_range(-0.1..0.1),
        r.gen_range(-0.5..0.5),
    ]
}

pub fn random_input(r: &mut impl Rng) -> ExogenousInput {
    ExogenousInput::new(r.gen_range(-0.2..0.2), r.gen_range(-0.05..0.05))
}

/// Network with Glorot weights and non-zero biases so every parameter
/// matters.
pub fn random_net(dims: vdyn::nn::MlpDims, r: &mut impl Rng) -> MlpParams {
    let mut net = MlpParams::init(dims, r.gen());
    for p in net.theta_mut() {
        *p += r.gen_range(-0.1..0.1);
    }
    net
}

/// Fourth-order central difference of `f` along every coordinate of `x`.
/// The two-point formula's `h²·f‴/6` truncation term reaches 1e-5 relative
/// on some network gradients at `h = 1e-5`; this stencil pushes it to
/// `O(h⁴)` so the check measures the implementation, not the oracle.
pub fn central_diff(x: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let x0 = xp[i];
            let mut at = |k: f64| {
                xp[i] = x0 + k * step;
                f(&xp)
            };
            let d = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * step);
            xp[i] = x0;
            d
        })
        .collect()
}

/// `max|a − b| / max|b|`, the error relative to the gradient's scale.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Worst FD mismatch of `MlpParams::backward` over `cases` random networks.
pub fn mlp_fd_worst(cases: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let kind = if case % 2 == 0 {
            ModelKind::Node
        } else {
            ModelKind::Ude
        };
        let dims = kind.dims([5, 8, 10, 12][case % 4]);
        let net = random_net(dims, &mut r);
        let input: Vec<f64> = (0..dims.n_in).map(|_| r.gen_range(-2.0..2.0)).collect();
        let cot: Vec<f64> = (0..dims.n_out).map(|_| r.gen_range(-1.0..1.0)).collect();
        let g = net.backward(&input, &cot).unwrap();

        let loss = |net: &MlpParams, x: &[f64]| -> f64 {
            net.forward(x)
                .unwrap()
                .iter()
                .zip(&cot)
                .map(|(a, b)| a * b)
                .sum()
        };
        let fd_theta = central_diff(net.theta(), FD_STEP, |th| {
            loss(&MlpParams::from_theta(dims, th.to_vec()).unwrap(), &input)
        });
        let fd_input = central_diff(&input, FD_STEP, |x| loss(&net, x));
        worst = worst
            .max(rel_err(&g.d_theta, &fd_theta))
            .max(rel_err(&g.d_input, &fd_input));
    }
    worst
}

pub fn weighted_sse<'a>(
    target: &'a Trajectory,
    scale: &'a [f64],
) -> impl Fn(&Trajectory) -> Result<(f64, Vec<f64>)> + 'a {
    move |traj: &Trajectory| {
        let n = traj.n_states();
        let mut cot = vec![0.0; traj.len() * n];
        let mut loss = 0.0;
        for i in 0..traj.len() {
            for c in 0..n {
                let e = (traj.state(i)[c] - target.state(i)[c]) / scale[c];
                loss += e * e;
                cot[i * n + c] = 2.0 * e / scale[c];
            }
        }
        Ok((loss, cot))
    }
}

fn perturbed_target(
    model: &HybridModel<f64>,
    x0: &[f64],
    grid: &TimeGrid<f64>,
    r: &mut impl Rng,
) -> Trajectory {
    let inputs = |t: f64| SampleId::Three.input(t);
    let traj = simulate(model, x0, grid, &inputs).unwrap();
    traj.map_states(|_, x| {
        for (c, v) in x.iter_mut().enumerate() {
            *v += 0.3 * scaler().stds()[c] * r.gen_range(-1.0..1.0);
        }
    })
}

/// Worst FD mismatch of `rollout_with_gradient` over one-second rollouts
/// of random hybrid models.
pub fn rollout_fd_worst(cases: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let inputs = |t: f64| SampleId::Three.input(t);
    let stds = &scaler().stds()[..7];
    let mut worst = 0.0f64;
    for case in 0..cases {
        let kind = if case % 2 == 0 {
            ModelKind::Ude
        } else {
            ModelKind::Node
        };
        let dims = kind.dims([5, 8, 10, 12][case % 4]);
        let mut net = random_net(dims, &mut r);
        // keep the learned part small so the rollout stays in range
        for p in net.theta_mut() {
            *p *= 0.2;
        }
        let x0 = random_state(&mut r);
        let t0 = r.gen_range(0.0..50.0);
        let grid = TimeGrid::with_intervals(t0, 0.1, 10, 10).unwrap();
        let model = HybridModel::new(kind, &net, scaler()).unwrap();
        let target = perturbed_target(&model, &x0, &grid, &mut r);
        let loss = weighted_sse(&target, stds);
        let g = rollout_with_gradient(&model, &x0, &grid, &inputs, &loss).unwrap();

        let eval = |net: &MlpParams, x0: &[f64]| -> f64 {
            let m = HybridModel::new(kind, net, scaler()).unwrap();
            loss(&simulate(&m, x0, &grid, &inputs).unwrap()).unwrap().0
        };
        let fd_theta = central_diff(net.theta(), FD_STEP, |th| {
            eval(&MlpParams::from_theta(dims, th.to_vec()).unwrap(), &x0)
        });
        let fd_x0 = central_diff(&x0, FD_STEP, |x| eval(&net, x));
        worst = worst
            .max(rel_err(&g.d_theta, &fd_theta))
            .max(rel_err(&g.d_x0, &fd_x0));
    }
    worst
}

/// Worst relative gap between adjoint and tape gradients on two-second
/// UDE segments of the sample-three training window.
pub fn adjoint_vs_tape_worst(cases: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let inputs = |t: f64| SampleId::Three.input(t);
    let data = dataset();
    let window = data.sample(SampleId::Three).noisy.slice(0..700);
    let stds = &scaler().stds()[..7];
    let mut worst = 0.0f64;
    for case in 0..cases {
        let hidden = [5, 8, 10, 12][case % 4];
        let mut net = random_net(ModelKind::Ude.dims(hidden), &mut r);
        for p in net.theta_mut() {
            *p *= 0.3;
        }
        let model = HybridModel::new(ModelKind::Ude, &net, scaler()).unwrap();
        let start = r.gen_range(0..680);
        let target = window.slice(start..start + 21);
        let grid = TimeGrid::with_intervals(target.times()[0], 0.1, 20, 10).unwrap();
        let loss = weighted_sse(&target, stds);
        let tape = rollout_with_gradient(&model, target.state(0), &grid, &inputs, &loss).unwrap();
        let adj = adjoint_gradient(&model, target.state(0), &grid, &inputs, &loss).unwrap();
        assert_eq!(tape.loss, adj.loss);
        worst = worst
            .max(rel_err(&adj.d_theta, &tape.d_theta))
            .max(rel_err(&adj.d_x0, &tape.d_x0));
        // the backward sweep also reconstructs the initial state
        for (a, b) in adj.x0_recovered.iter().zip(target.state(0)) {
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
    worst
}
